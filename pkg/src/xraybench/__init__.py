"""Benchmark harness: a from-scratch CNN baseline versus calibrated
zero-shot scoring of precomputed embeddings, on 64x64 chest X-ray tasks."""

__version__ = "0.1.0"
