"""Tumor-detection validation against the spatial model, and classification metrics."""
import json
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import formula as F
from . import kernels
from .errors import EmptyInput, LengthMismatch, UndefinedMetric
from .spatial import evaluate

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
BACKGROUND_THRESHOLD = 0.9

VIOLATIONS = {
    "V1": "candidate is empty (no tumor)",
    "V2": "candidate overlaps the background",
    "V3": "candidate is not contained in the brain",
    "V4": "candidate is not a single 4-connected component",
}

# static reference rows (accuracy, precision, recall, in percent)
BASELINES = [
    {"technique": "CNN", "accuracy": 96.17, "precision": 96.17, "recall": 96.12},
    {"technique": "Markov model (DTMC)", "accuracy": 97.65, "precision": 71.65, "recall": 99.87},
    {"technique": "Cellular Automata", "accuracy": 93.0, "precision": 95.0, "recall": 90.0},
    {"technique": "Model Checking (reported)", "accuracy": 98.0, "precision": 96.15, "recall": 100.0},
]


@dataclass
class Verdict:
    background_mask: np.ndarray
    brain_mask: np.ndarray
    final_tumor_mask: np.ndarray
    violations: List[str] = field(default_factory=list)

    @property
    def satisfied(self):
        return not self.violations


def is_connected(mask):
    """True when ``mask`` is one non-empty 4-connected component."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return False
    seed = np.zeros_like(mask)
    seed.flat[np.argmax(mask)] = True
    return bool((kernels.flood_fill(mask, seed) == mask).all())


def validate_tumor(m, phi1, phi2, candidate, threshold=BACKGROUND_THRESHOLD):
    """Check a candidate tumor mask against background/brain formulas.

    background = connect(phi1, threshold, border)
    brain      = !background & phi2

    Conditions, each reported by name when violated:
    V1 candidate non-empty; V2 disjoint from background; V3 inside brain;
    V4 4-connected. V2-V4 are only checked for a non-empty candidate.
    """
    candidate = m.check(candidate, "candidate")
    bg = evaluate(m, F.Connect(phi1, threshold, F.Border()))
    log.info("reference re-binarized: phi1 neighborhood field thresholded at %.2f", threshold)
    brain = ~bg & evaluate(m, phi2)
    violations = []
    if not candidate.any():
        violations.append("V1")
    else:
        if (candidate & bg).any():
            violations.append("V2")
        if (candidate & ~brain).any():
            violations.append("V3")
        if not is_connected(candidate):
            violations.append("V4")
    return Verdict(bg, brain, candidate & brain, violations)


def dice(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    total = a.sum() + b.sum()
    if total == 0:
        return 1.0
    return float(2.0 * (a & b).sum() / total)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(pred, truth, positive=2):
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} truths")
    if len(pred) == 0:
        raise EmptyInput("no predictions")
    for lab in list(pred) + list(truth):
        if lab not in (1, 2):
            raise ValueError(f"labels must be 1 or 2, got {lab!r}")
    p = np.asarray(pred) == positive
    t = np.asarray(truth) == positive
    return ConfusionMatrix(int((p & t).sum()), int((p & ~t).sum()),
                           int((~p & ~t).sum()), int((~p & t).sum()))


def _ratio(num, den, name):
    if den == 0:
        raise UndefinedMetric(f"{name} undefined: zero denominator")
    return num / den


def precision(c):
    return _ratio(c.tp, c.tp + c.fp, "precision")


def recall(c):
    return _ratio(c.tp, c.tp + c.fn, "recall")


sensitivity = recall


def specificity(c):
    return _ratio(c.tn, c.tn + c.fp, "specificity")


def accuracy(c):
    return _ratio(c.tp + c.tn, c.total, "accuracy")


def f1(c):
    p, r = precision(c), recall(c)
    return _ratio(2 * p * r, p + r, "f1")


METRICS = {"precision": precision, "recall": recall, "accuracy": accuracy, "f1": f1,
           "sensitivity": sensitivity, "specificity": specificity}


def metrics_block(c):
    """All metrics rounded to 6 places; undefined ones are ``None``."""
    out = {}
    for name, fn in METRICS.items():
        try:
            out[name] = round(fn(c), 6)
        except UndefinedMetric:
            out[name] = None
    return out


def image_entry(image_id, predicted, truth, verdict=None, **extra):
    entry = {
        "id": image_id,
        "predicted": predicted,
        "truth": truth,
        "verdict": None if verdict is None else ("satisfied" if verdict.satisfied else "violated"),
        "violations": [] if verdict is None else list(verdict.violations),
    }
    entry.update(extra)
    return entry


def report(per_image, cm, **summary):
    """Assemble the report document (a plain dict; see :func:`emit_report`)."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "per_image": list(per_image),
        "confusion": cm.as_dict(),
        "metrics": metrics_block(cm),
    }
    doc.update(summary)
    doc["comparison"] = [dict(row) for row in BASELINES]
    return doc


def emit_report(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


REQUIRED_KEYS = ("schema_version", "per_image", "confusion", "metrics", "comparison")


def parse_report(text):
    doc = json.loads(text)
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise ValueError(f"report missing keys {missing}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc['schema_version']}")
    return doc
