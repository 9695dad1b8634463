"""Synthetic stand-ins for the real corpora.

Two generators, both fully seed-deterministic:

* ``make_bundle`` renders chest-like frames where the class signal is a
  latent severity drawn from overlapping per-class normals.  Severity sets
  the peak brightness of opacity blobs inside the lung fields, so the
  separability of the classes (and with it the reachable AUC band) is
  controlled by the gap between the class means.

* ``make_embedding_set`` fabricates embedding sets whose similarity gaps
  follow class-conditional mixtures in logit space.  Image vectors are
  constructed to hit exact target cosines against the prototypes the
  scorer will rebuild from the prompt rows, so the downstream score
  distribution is known by design.

The mixture and severity constants are tuned so a default training or
scoring run lands inside the benchmark's tolerance bands.
"""

from __future__ import annotations

import numpy as np

from .data import DatasetBundle, Record
from .errors import InvalidArgument
from .zeroshot import EmbeddingSet, PromptSet, build_prototype

# ---------------------------------------------------------------- images

IMAGE_KINDS = {
    "pneumonia-like": {
        "kind_id": 1,
        "prefix": "pn",
        # (negatives, positives) per split, mirroring the real task's skew
        "splits": {"train": (1214, 3494), "val": (135, 389), "test": (234, 390)},
        "sev_gap": 2.05,
    },
    "tb-like": {
        "kind_id": 2,
        "prefix": "tb",
        # near-balanced single pool; splits get assigned downstream
        "counts": (326, 336),
        "sev_gap": 2.15,
    },
}

SEV_BASE = 3.0  # keeps severities essentially positive for both classes
AMP_PER_SEV = 16.0  # blob peak brightness per severity unit
NOISE_SIGMA = 4.0  # additive pixel noise
SIDE = 64


def _render_frame(rng: np.random.Generator, severity: float) -> np.ndarray:
    """One chest-like frame: dark lung fields on a bright body, plus blobs."""
    yy, xx = np.mgrid[0:SIDE, 0:SIDE].astype(np.float64)

    cy = 33.0 + rng.uniform(-1.5, 1.5)
    cx = 31.5 + rng.uniform(-1.5, 1.5)
    body = (((yy - cy) / (27.0 + rng.uniform(-1, 1))) ** 2
            + ((xx - cx) / (23.0 + rng.uniform(-1, 1))) ** 2) <= 1.0
    img = np.where(body, 135.0, 12.0)
    img += np.where(body & (np.abs(xx - cx) < 4.0), 40.0, 0.0)  # mediastinum

    lungs = []
    for side_sign in (-1.0, 1.0):
        lx = cx + side_sign * (11.0 + rng.uniform(-1, 1))
        ly = cy - 3.0 + rng.uniform(-1, 1)
        ry = 15.0 + rng.uniform(-1, 1)
        rx = 7.5 + rng.uniform(-0.7, 0.7)
        mask = (((yy - ly) / ry) ** 2 + ((xx - lx) / rx) ** 2) <= 1.0
        img = np.where(mask, 55.0, img)
        lungs.append((ly, lx, ry, rx))

    amp = AMP_PER_SEV * max(severity, 0.0)
    if amp > 0:
        field = np.zeros((SIDE, SIDE))
        for _ in range(int(rng.integers(2, 5))):
            ly, lx, ry, rx = lungs[int(rng.integers(0, 2))]
            ang = rng.uniform(0, 2 * np.pi)
            rad = np.sqrt(rng.random()) * 0.75
            by = ly + rad * ry * np.sin(ang)
            bx = lx + rad * rx * np.cos(ang)
            sigma = rng.uniform(3.0, 7.0)
            blob = amp * np.exp(-((yy - by) ** 2 + (xx - bx) ** 2) / (2 * sigma**2))
            field = np.maximum(field, blob)
        img += field

    img += rng.uniform(-4.0, 4.0)  # exposure jitter
    img += rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _severities(rng, n_neg: int, n_pos: int, gap: float):
    labels = np.concatenate([np.zeros(n_neg, np.int64), np.ones(n_pos, np.int64)])
    labels = labels[rng.permutation(labels.size)]
    sev = rng.normal(SEV_BASE + gap * labels, 1.0)
    return labels, sev


def make_bundle(kind: str, seed: int = 0) -> DatasetBundle:
    """Generate a complete synthetic bundle for one task flavor."""
    if kind not in IMAGE_KINDS:
        raise InvalidArgument(
            f"unknown kind {kind!r}; expected one of {sorted(IMAGE_KINDS)}"
        )
    spec = IMAGE_KINDS[kind]
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), spec["kind_id"]]))
    )

    records = []
    frames = []
    if "splits" in spec:
        for split, (n_neg, n_pos) in spec["splits"].items():
            labels, sev = _severities(rng, n_neg, n_pos, spec["sev_gap"])
            for i, (label, s) in enumerate(zip(labels, sev)):
                records.append(
                    Record(f"{spec['prefix']}-{split}-{i:04d}", int(label), split)
                )
                frames.append(_render_frame(rng, float(s)))
    else:
        n_neg, n_pos = spec["counts"]
        labels, sev = _severities(rng, n_neg, n_pos, spec["sev_gap"])
        for i, (label, s) in enumerate(zip(labels, sev)):
            records.append(Record(f"{spec['prefix']}-{i:04d}", int(label)))
            frames.append(_render_frame(rng, float(s)))

    return DatasetBundle(
        width=SIDE,
        height=SIDE,
        source=f"synthetic:{kind}:seed{int(seed)}",
        records=records,
        frames=np.stack(frames),
    )


# ------------------------------------------------------------ embeddings

EMBED_DIM = 512
LOGIT_SCALE = 100.0

# (weight, mean, sigma) mixtures over the scaled similarity gap
# z = logit_scale * (s_pos - s_neg); chosen so argmax sits far below the
# F1 optimum and threshold search recovers a large chunk of it.
EMBED_KINDS = {
    "pneumonia-like": {
        "kind_id": 1,
        "prefix": "pnz",
        "splits": {"val": (135, 389), "test": (234, 390)},
        "neg": [(0.79, -5.0, 1.0), (0.21, -0.60, 0.8)],
        "pos": [(0.80, 0.88, 1.0), (0.20, -2.70, 1.0)],
        "prompts": PromptSet(
            class0=[
                "clear lung fields without focal opacity",
                "normal frontal chest radiograph",
                "no acute cardiopulmonary findings",
            ],
            class1=[
                "focal airspace opacity in the lung",
                "patchy consolidation consistent with infection",
                "lobar infiltrate on a frontal radiograph",
            ],
        ),
    },
    "tb-like": {
        "kind_id": 2,
        "prefix": "tbz",
        "splits": {"val": (32, 33), "test": (99, 102)},
        "neg": [(0.82, -7.0, 1.2), (0.18, -2.2, 1.0)],
        "pos": [(0.72, -0.22, 2.0), (0.28, -6.3, 1.1)],
        "prompts": PromptSet(
            class0=[
                "clear upper zones and costophrenic angles",
                "normal chest radiograph of an adult",
                "no cavitation or nodular shadowing",
            ],
            class1=[
                "upper zone cavitary lesion",
                "fibronodular shadowing in the apex",
                "miliary nodules across both lungs",
            ],
        ),
    },
}


def _sample_mixture(rng, mixture, n: int) -> np.ndarray:
    weights = np.array([w for w, _, _ in mixture])
    comp = rng.choice(len(mixture), size=n, p=weights / weights.sum())
    mus = np.array([m for _, m, _ in mixture])[comp]
    sigmas = np.array([s for _, _, s in mixture])[comp]
    return rng.normal(mus, sigmas)


def _prompt_rows(rng, n0: int, n1: int):
    """Two clusters of prompt vectors with a fixed center angle."""
    raw0 = rng.normal(size=EMBED_DIM)
    c0 = raw0 / np.linalg.norm(raw0)
    raw1 = rng.normal(size=EMBED_DIM)
    orth = raw1 - (raw1 @ c0) * c0
    orth /= np.linalg.norm(orth)
    c1 = 0.5 * c0 + np.sqrt(1 - 0.25) * orth

    rows = []
    for center, n in ((c0, n0), (c1, n1)):
        for _ in range(n):
            r = center + 0.08 * rng.normal(size=EMBED_DIM)
            rows.append(r / np.linalg.norm(r))
    return np.array(rows)


def make_embedding_set(kind: str, split: str, seed: int = 0) -> EmbeddingSet:
    """Fabricate one embedding set with known score structure.

    The ``val`` and ``test`` sets of a given kind and seed share prompt
    vectors (hence prototypes), so a threshold swept on val transfers to
    test the same way it would between real extractions of one model.
    """
    if kind not in EMBED_KINDS:
        raise InvalidArgument(
            f"unknown kind {kind!r}; expected one of {sorted(EMBED_KINDS)}"
        )
    spec = EMBED_KINDS[kind]
    if split not in spec["splits"]:
        raise InvalidArgument(f"split must be one of {sorted(spec['splits'])}")

    prompts = spec["prompts"]
    prompt_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), spec["kind_id"], 100]))
    )
    prompt_vectors = _prompt_rows(
        prompt_rng, len(prompts.class0), len(prompts.class1)
    )
    p0 = build_prototype(prompt_vectors[: len(prompts.class0)], 0).vector
    p1 = build_prototype(prompt_vectors[len(prompts.class0) :], 1).vector

    # Orthonormal basis of the prototype plane, for exact-cosine synthesis.
    g = float(p0 @ p1)
    e1 = (p1 - g * p0) / np.sqrt(1 - g * g)

    split_id = {"val": 1, "test": 2}[split]
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), spec["kind_id"], split_id]))
    )
    n_neg, n_pos = spec["splits"][split]
    labels = np.concatenate(
        [np.zeros(n_neg, np.int64), np.ones(n_pos, np.int64)]
    )
    labels = labels[rng.permutation(labels.size)]
    z = np.where(
        labels == 1,
        _sample_mixture(rng, spec["pos"], labels.size),
        _sample_mixture(rng, spec["neg"], labels.size),
    )

    vectors = np.empty((labels.size, EMBED_DIM), dtype=np.float64)
    for i in range(labels.size):
        a0 = rng.normal(0.25, 0.015)
        a1 = a0 + z[i] / LOGIT_SCALE
        det = 1 - g * g
        x = (a0 - g * a1) / det
        y = (a1 - g * a0) / det
        plane = x * p0 + y * p1
        resid = 1.0 - (x * a0 + y * a1)
        if resid <= 0:
            raise InvalidArgument("similarity targets exceed the unit sphere")
        raw = rng.normal(size=EMBED_DIM)
        w = raw - (raw @ p0) * p0 - (raw @ e1) * e1
        w /= np.linalg.norm(w)
        vectors[i] = plane + np.sqrt(resid) * w

    ids = [f"{spec['prefix']}-{split}-{i:04d}" for i in range(labels.size)]
    return EmbeddingSet(
        dim=EMBED_DIM,
        ids=ids,
        labels=labels,
        vectors=vectors.astype(np.float32),
        prompts=prompts,
        prompt_vectors=prompt_vectors.astype(np.float32),
        logit_scale=LOGIT_SCALE,
        model_id=f"synthetic:zmix:{kind}",
    )
