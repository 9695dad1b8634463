"""Synthetic bundle and embedding generators: determinism and structure."""

import numpy as np
import pytest

from xraybench import synth, zeroshot
from xraybench.data import load_bundle, save_bundle
from xraybench.errors import InvalidArgument


class TestBundles:
    def test_tb_counts_and_splits(self):
        bundle = synth.make_bundle("tb-like", seed=0)
        assert bundle.count == 662
        labels = bundle.labels()
        assert int((labels == 0).sum()) == 326
        assert int((labels == 1).sum()) == 336
        assert all(r.split == "unassigned" for r in bundle.records)

    def test_pneumonia_split_counts(self):
        bundle = synth.make_bundle("pneumonia-like", seed=0)
        by_split = {}
        for r in bundle.records:
            by_split.setdefault(r.split, [0, 0])[r.label] += 1
        assert by_split["train"] == [1214, 3494]
        assert by_split["val"] == [135, 389]
        assert by_split["test"] == [234, 390]

    def test_same_seed_reproduces_frames(self):
        a = synth.make_bundle("tb-like", seed=5)
        b = synth.make_bundle("tb-like", seed=5)
        assert np.array_equal(a.frames, b.frames)
        assert [r.id for r in a.records] == [r.id for r in b.records]

    def test_different_seed_changes_frames(self):
        a = synth.make_bundle("tb-like", seed=0)
        b = synth.make_bundle("tb-like", seed=1)
        assert not np.array_equal(a.frames, b.frames)

    def test_round_trip_through_files(self, tmp_path):
        bundle = synth.make_bundle("tb-like", seed=0)
        save_bundle(bundle, str(tmp_path / "b"))
        loaded = load_bundle(str(tmp_path / "b"))
        assert np.array_equal(loaded.frames, bundle.frames)
        assert [r.label for r in loaded.records] == [
            r.label for r in bundle.records
        ]

    def test_frames_are_nontrivial_images(self):
        bundle = synth.make_bundle("tb-like", seed=0)
        assert bundle.frames.dtype == np.uint8
        # Body brighter than background corners on average.
        assert bundle.frames[:, 28:36, 28:36].mean() > bundle.frames[:, :4, :4].mean()

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidArgument, match="unknown kind"):
            synth.make_bundle("hips")


class TestEmbeddings:
    def test_counts_per_split(self):
        val = synth.make_embedding_set("tb-like", "val", seed=0)
        test = synth.make_embedding_set("tb-like", "test", seed=0)
        assert val.count == 65 and test.count == 201
        assert int((val.labels == 0).sum()) == 32
        assert int((test.labels == 1).sum()) == 102

    def test_val_and_test_share_prompt_vectors(self):
        val = synth.make_embedding_set("tb-like", "val", seed=3)
        test = synth.make_embedding_set("tb-like", "test", seed=3)
        assert np.array_equal(val.prompt_vectors, test.prompt_vectors)

    def test_determinism(self):
        a = synth.make_embedding_set("pneumonia-like", "val", seed=2)
        b = synth.make_embedding_set("pneumonia-like", "val", seed=2)
        assert np.array_equal(a.vectors, b.vectors)
        assert np.array_equal(a.labels, b.labels)

    def test_vectors_are_unit_norm(self):
        eset = synth.make_embedding_set("tb-like", "val", seed=0)
        norms = np.linalg.norm(eset.vectors.astype(np.float64), axis=1)
        assert np.allclose(norms, 1.0, atol=1e-5)

    def test_scores_have_planned_cosine_structure(self):
        """Each vector is synthesized to hit an exact pair of prototype
        cosines, so the realized scaled gap must match the construction
        up to float32 storage error."""
        eset = synth.make_embedding_set("tb-like", "val", seed=0)
        p0 = zeroshot.build_prototype(eset.prompt_rows(0), 0)
        p1 = zeroshot.build_prototype(eset.prompt_rows(1), 1)
        v = eset.vectors.astype(np.float64)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        s0 = v @ p0.vector
        s1 = v @ p1.vector
        gaps = eset.logit_scale * (s1 - s0)
        pos, neg = gaps[eset.labels == 1], gaps[eset.labels == 0]
        assert pos.mean() > neg.mean() + 1.0
        # a0 was drawn tight around 0.25; every s0 must sit near it
        assert np.all(np.abs(s0 - 0.25) < 0.1)

    def test_round_trip_through_files(self, tmp_path):
        eset = synth.make_embedding_set("tb-like", "test", seed=0)
        zeroshot.save_embedding_set(eset, str(tmp_path / "e"))
        loaded = zeroshot.load_embedding_set(str(tmp_path / "e"))
        assert np.array_equal(loaded.vectors, eset.vectors)
        assert loaded.logit_scale == 100.0
        assert loaded.prompts.class1 == eset.prompts.class1

    def test_unknown_kind_and_split_rejected(self):
        with pytest.raises(InvalidArgument, match="unknown kind"):
            synth.make_embedding_set("hips", "val")
        with pytest.raises(InvalidArgument, match="split"):
            synth.make_embedding_set("tb-like", "train")
