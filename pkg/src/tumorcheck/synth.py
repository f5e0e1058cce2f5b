"""Seeded synthetic brain phantoms for desk-scale end-to-end runs.

Each phantom is a dark, noisy field holding an elliptical "brain" of
mildly textured tissue with two darker ventricles. Tumor phantoms add one
bright ellipse placed clear of the ventricles and the brain edge; its mask
is returned as ground truth.
"""
from pathlib import Path

import numpy as np

from .imageprep import write_pgm


def _ellipse(yy, xx, cy, cx, ay, ax):
    return ((yy - cy) / ay) ** 2 + ((xx - cx) / ax) ** 2 <= 1


def phantom(rng, tumor, size=256):
    """Return ``(image, truth_mask)``; the mask is empty for a clean phantom."""
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = 6 + rng.normal(0, 2.0, (h, w))

    cy, cx = h / 2 + rng.uniform(-6, 6) * size / 256, w / 2 + rng.uniform(-6, 6) * size / 256
    ay, ax = rng.uniform(0.36, 0.42) * h, rng.uniform(0.31, 0.37) * w
    brain = _ellipse(yy, xx, cy, cx, ay, ax)
    tissue = np.full((h, w), rng.uniform(95, 110))
    fy, fx = rng.uniform(0.5, 1.5, 2) * 2 * np.pi / size
    tissue += rng.uniform(2, 5) * np.sin(fy * yy + fx * xx + rng.uniform(0, 2 * np.pi))
    tissue += rng.normal(0, 3, (h, w))
    img[brain] = tissue[brain]

    level = rng.uniform(40, 55)
    for side in (-1, 1):
        v = _ellipse(yy, xx, cy + rng.uniform(-4, 4), cx + side * rng.uniform(0.10, 0.14) * w,
                     rng.uniform(0.10, 0.14) * h, rng.uniform(0.035, 0.05) * w)
        img[v] = level + rng.normal(0, 3, int(v.sum()))

    truth = np.zeros((h, w), dtype=bool)
    if tumor:
        ry, rx = rng.uniform(0.04, 0.08, 2) * size
        for _ in range(200):
            ang = rng.uniform(0, 2 * np.pi)
            frac = rng.uniform(0.3, 0.6)
            ty, tx = cy + frac * ay * np.sin(ang), cx + frac * ax * np.cos(ang)
            truth = _ellipse(yy, xx, ty, tx, ry, rx)
            grown = _ellipse(yy, xx, ty, tx, ry + 3, rx + 3)
            if not (grown & (img < 80)).any() and not (grown & ~brain).any():
                break
        img[truth] = rng.uniform(205, 230) + rng.normal(0, 4, int(truth.sum()))

    img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    return img, truth


def generate_corpus(out, n_tumor, n_clean, seed, size=256):
    """Write ``yes/``, ``no/`` and ``masks/`` under ``out``; return the written paths."""
    out = Path(out)
    for sub in ("yes", "no", "masks"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_tumor):
        img, truth = phantom(rng, True, size)
        p = out / "yes" / f"tumor_{i:03d}.pgm"
        write_pgm(p, img, binary=True)
        write_pgm(out / "masks" / p.name, truth, binary=True)
        paths.append(p)
    for i in range(n_clean):
        img, _ = phantom(rng, False, size)
        p = out / "no" / f"clean_{i:03d}.pgm"
        write_pgm(p, img, binary=True)
        paths.append(p)
    return paths
