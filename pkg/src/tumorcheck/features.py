"""Texture/pattern features of a region and the nearest-row classifier.

Feature vector layout (9 values)::

    0 contrast     GLCM, averaged over 4 offsets
    1 correlation
    2 energy       angular second moment, sum p^2
    3 homogeneity  sum p / (1 + (i - j)^2)
    4 entropy      -sum p log2 p
    5 mean         region intensity statistics
    6 std          (population)
    7 skewness
    8 area         region pixels / image pixels
"""
import csv
import io
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import (BadHeader, BadLabel, DimensionMismatch, EmptyRegion, EmptyTrainingSet,
                     LengthMismatch, RaggedRow)

N_FEATURES = 9
GLCM_LEVELS = 8
GLCM_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))
FEATURE_NAMES = ("contrast", "correlation", "energy", "homogeneity", "entropy",
                 "mean", "std", "skewness", "area")
HEADER = [f"f{i}" for i in range(1, N_FEATURES + 1)] + ["label"]
NORMAL, ABNORMAL = 1, 2
MESSAGES = {NORMAL: "Normal", ABNORMAL: "Abnormal"}


def quantize(img, levels=GLCM_LEVELS):
    return (np.asarray(img, dtype=np.int64) * levels) // 256


def glcm(img, region, offset, levels=GLCM_LEVELS):
    """Symmetric, normalized co-occurrence matrix over pairs inside ``region``.

    Returns None when the offset yields no pair inside the region.
    """
    q = quantize(img, levels)
    h, w = q.shape
    dr, dc = offset
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    a = q[r0:r1, c0:c1]
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    both = region[r0:r1, c0:c1] & region[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    if not both.any():
        return None
    counts = np.bincount(a[both] * levels + b[both], minlength=levels * levels)
    p = counts.reshape(levels, levels).astype(np.float64)
    p = p + p.T
    return p / p.sum()


def glcm_stats(p):
    levels = p.shape[0]
    i, j = np.indices((levels, levels), dtype=np.float64)
    contrast = float(np.sum(p * (i - j) ** 2))
    mu_i, mu_j = np.sum(i * p), np.sum(j * p)
    sd_i = np.sqrt(np.sum(p * (i - mu_i) ** 2))
    sd_j = np.sqrt(np.sum(p * (j - mu_j) ** 2))
    if sd_i < 1e-15 or sd_j < 1e-15:
        correlation = 1.0
    else:
        correlation = float(np.sum(p * (i - mu_i) * (j - mu_j)) / (sd_i * sd_j))
    energy = float(np.sum(p * p))
    homogeneity = float(np.sum(p / (1.0 + (i - j) ** 2)))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log2(nz))) + 0.0
    return np.array([contrast, correlation, energy, homogeneity, entropy])


def extract_features(img, region):
    """Nine-value feature vector of ``img`` restricted to ``region``.

    A region with no adjacent pair (e.g. isolated pixels) falls back to a
    diagonal GLCM built from its own quantized histogram.
    """
    img = np.asarray(img)
    region = np.asarray(region, dtype=bool)
    if region.shape != img.shape:
        raise DimensionMismatch(f"region {region.shape} vs image {img.shape}")
    if not region.any():
        raise EmptyRegion("cannot extract features from an empty region")

    stats = [glcm_stats(p) for p in (glcm(img, region, o) for o in GLCM_OFFSETS) if p is not None]
    if not stats:
        hist = np.bincount(quantize(img)[region], minlength=GLCM_LEVELS).astype(np.float64)
        stats = [glcm_stats(np.diag(hist / hist.sum()))]
    texture = np.mean(stats, axis=0)

    vals = img[region].astype(np.float64)
    mean = vals.mean()
    std = vals.std()
    skew = float(np.mean((vals - mean) ** 3) / std ** 3) if std > 1e-12 else 0.0
    area = region.sum() / region.size
    return np.concatenate([texture, [mean, std, skew, area]])


@dataclass
class TrainingSet:
    features: np.ndarray  # (rows, 9)
    labels: List[int]

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        if len(self.labels) == 0:
            raise EmptyTrainingSet("training set has no rows")
        if self.features.shape[0] != len(self.labels):
            raise LengthMismatch("feature rows and labels differ in count")
        for lab in self.labels:
            if lab not in (NORMAL, ABNORMAL):
                raise BadLabel(f"label must be 1 or 2, got {lab!r}")

    def __len__(self):
        return len(self.labels)


def distances(test, train, signed=False):
    """Per-row distance: mean absolute difference, or ``|mean(row - test)|`` if ``signed``."""
    diff = train.features - test[None, :]
    if signed:
        return np.abs(diff.mean(axis=1))
    return np.abs(diff).mean(axis=1)


def classify(test, train, signed=False):
    """Label of the nearest training row (first row wins ties) and its message."""
    if train is None or len(train) == 0:
        raise EmptyTrainingSet("no training rows")
    test = np.asarray(test, dtype=np.float64)
    if test.shape != (train.features.shape[1],):
        raise LengthMismatch(f"test vector length {test.size} vs {train.features.shape[1]}")
    label = train.labels[int(np.argmin(distances(test, train, signed)))]
    return label, MESSAGES[label]


def _fmt(x):
    return np.format_float_positional(float(x), unique=True, trim="0")


def save_training(ts):
    buf = io.StringIO()
    buf.write(",".join(HEADER) + "\n")
    for row, lab in zip(ts.features, ts.labels):
        buf.write(",".join(_fmt(v) for v in row) + f",{lab}\n")
    return buf.getvalue()


def load_training(data):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(data)))
    rows = [r for r in rows if r]
    if not rows or [c.strip() for c in rows[0]] != HEADER:
        raise BadHeader(f"expected header {','.join(HEADER)}")
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(HEADER):
            raise RaggedRow(f"line {lineno}: {len(row)} fields, expected {len(HEADER)}")
        try:
            label = int(row[-1])
        except ValueError:
            raise BadLabel(f"line {lineno}: label {row[-1]!r}") from None
        if label not in (NORMAL, ABNORMAL):
            raise BadLabel(f"line {lineno}: label {label} not in {{1, 2}}")
        try:
            feats.append([float(v) for v in row[:-1]])
        except ValueError:
            raise RaggedRow(f"line {lineno}: non-numeric feature") from None
        labels.append(label)
    if not labels:
        raise EmptyTrainingSet("training CSV has a header but no rows")
    return TrainingSet(np.array(feats), labels)
