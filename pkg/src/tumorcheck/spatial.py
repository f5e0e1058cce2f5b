"""Pixel-adjacency model and the spatial/CTL operators evaluated over it.

Satisfaction sets are boolean numpy arrays shaped like the image; scalar
fields are float arrays. Transitions are the symmetric 4-adjacency of the
grid (8-adjacency on request), so "some path reaches" and "connected to"
coincide.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import formula as F
from . import kernels
from .errors import DimensionMismatch, MalformedFormula, UnboundAtom

ACTIONS = {"North": (-1, 0), "South": (1, 0), "East": (0, 1), "West": (0, -1)}
_DIAGONALS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True, eq=False)
class PixelModel:
    """States are pixel coordinates, valued by intensity and optionally by cluster label."""

    intensity: np.ndarray
    labels: Optional[np.ndarray] = None
    conn8: bool = False

    def __post_init__(self):
        if self.intensity.ndim != 2 or self.intensity.size == 0:
            raise ValueError("intensity must be a non-empty 2D array")
        if self.labels is not None and self.labels.shape != self.intensity.shape:
            raise DimensionMismatch(
                f"labels {self.labels.shape} vs image {self.intensity.shape}")

    @property
    def shape(self):
        return self.intensity.shape

    @property
    def height(self):
        return self.intensity.shape[0]

    @property
    def width(self):
        return self.intensity.shape[1]

    @property
    def n_states(self):
        return self.intensity.size

    @property
    def actions(self):
        return tuple(ACTIONS)

    def offsets(self):
        offs = list(ACTIONS.values())
        if self.conn8:
            offs += list(_DIAGONALS)
        return offs

    def successors(self, r, c):
        h, w = self.shape
        return [(r + dr, c + dc) for dr, dc in self.offsets()
                if 0 <= r + dr < h and 0 <= c + dc < w]

    def transitions(self):
        """Yield every directed transition ``((r, c), (r2, c2))``."""
        h, w = self.shape
        for r in range(h):
            for c in range(w):
                for t in self.successors(r, c):
                    yield (r, c), t

    @property
    def n_transitions(self):
        h, w = self.shape
        n = 2 * (2 * h * w - h - w)
        if self.conn8:
            n += 4 * (h - 1) * (w - 1)
        return n

    def check(self, mask, name="mask"):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise DimensionMismatch(f"{name} {mask.shape} vs model {self.shape}")
        return mask


def build_model(img, labels=None, conn8=False):
    img = np.asarray(img)
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != img.shape:
            raise DimensionMismatch(f"labels {labels.shape} vs image {img.shape}")
    return PixelModel(img, labels, conn8)


def _shift_any(mask, offsets):
    """``out[x] = any(mask[x + o] for o in offsets)``, out-of-range ignored."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    for dr, dc in offsets:
        src = mask[max(dr, 0):h + min(dr, 0), max(dc, 0):w + min(dc, 0)]
        out[max(-dr, 0):h + min(-dr, 0), max(-dc, 0):w + min(-dc, 0)] |= src
    return out


def ex(m, phi):
    """States with some successor in ``phi``."""
    return _shift_any(m.check(phi), m.offsets())


def ex_action(m, phi, action):
    """States whose successor under one named action is in ``phi``."""
    return _shift_any(m.check(phi), [ACTIONS[action]])


def ef(m, phi):
    """Least fixpoint of ``Z = phi | EX Z``."""
    phi = m.check(phi)
    return kernels.flood_fill(np.ones_like(phi), phi, m.conn8)


def eg(m, phi):
    """Greatest fixpoint of ``Z = phi & EX Z``."""
    return kernels.eg_fixpoint(m.check(phi), m.conn8)


def border(m):
    out = np.zeros(m.shape, dtype=bool)
    out[0, :] = out[-1, :] = True
    out[:, 0] = out[:, -1] = True
    return out


def normalize_field(field):
    """Min-max normalize onto [0, 1]; a constant field maps to 1 if nonzero else 0."""
    field = np.asarray(field, dtype=np.float64)
    lo, hi = field.min(), field.max()
    if hi == lo:
        return np.full(field.shape, 1.0 if hi != 0 else 0.0)
    return (field - lo) / (hi - lo)


def binarize(field, t):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold {t} outside [0, 1]")
    return normalize_field(field) >= t


def connect(m, phi1, phi2, threshold=None):
    """Points of ``phi1 & !phi2`` joined inside that set to a neighbor of ``phi2``.

    With ``threshold``, ``phi1`` is a scalar field binarized as
    ``normalize(phi1) >= threshold``.
    """
    if threshold is not None:
        phi1 = binarize(phi1, threshold)
    phi1 = m.check(phi1, "phi1")
    phi2 = m.check(phi2, "phi2")
    allowed = phi1 & ~phi2
    seeds = allowed & ex(m, phi2)
    return kernels.flood_fill(allowed, seeds, m.conn8)


def distance_transform(m, phi):
    """Hop distance to the nearest ``phi`` state; ``inf`` where unreachable."""
    d = kernels.bfs_distance(m.check(phi), m.conn8).astype(np.float64)
    d[d < 0] = np.inf
    return d


def str_(m, d, phi2):
    """States strictly closer than ``d`` hops to ``phi2``."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return distance_transform(m, phi2) < d


def increase(m, phi1, phi2):
    """Components of ``phi1`` that contain a ``phi2`` state."""
    phi1 = m.check(phi1, "phi1")
    phi2 = m.check(phi2, "phi2")
    return kernels.flood_fill(phi1, phi1 & phi2, m.conn8)


def neighborhood_density(m, phi):
    """Fraction of each pixel's in-image 3x3 neighborhood lying in ``phi``."""
    phi = m.check(phi).astype(np.float64)
    h, w = phi.shape
    total = np.zeros((h, w))
    count = np.zeros((h, w))
    pad = np.pad(phi, 1)
    ones = np.pad(np.ones((h, w)), 1)
    for dr in range(3):
        for dc in range(3):
            total += pad[dr:dr + h, dc:dc + w]
            count += ones[dr:dr + h, dc:dc + w]
    return total / count


def background(m, phi1, threshold=None):
    return connect(m, phi1, border(m), threshold)


def brain(m, phi1, phi2, threshold=None):
    return ~background(m, phi1, threshold) & m.check(phi2)


_CMP = {
    "<": np.less, "<=": np.less_equal, ">": np.greater,
    ">=": np.greater_equal, "==": np.equal,
}


def evaluate(m, f):
    """Satisfaction set of formula ``f`` over model ``m``."""
    if isinstance(f, F.IntensityCmp):
        if f.op not in _CMP or not 0 <= f.value <= 255:
            raise MalformedFormula(f"bad intensity atom {f!r}")
        return _CMP[f.op](m.intensity.astype(np.int64), f.value)
    if isinstance(f, F.ClusterEq):
        if m.labels is None:
            raise UnboundAtom(f"'cluster == {f.level}' needs a labeled model")
        return m.labels == f.level
    if isinstance(f, F.Border):
        return border(m)
    if isinstance(f, F.Not):
        return ~evaluate(m, f.arg)
    if isinstance(f, F.And):
        return evaluate(m, f.left) & evaluate(m, f.right)
    if isinstance(f, F.Or):
        return evaluate(m, f.left) | evaluate(m, f.right)
    if isinstance(f, F.EX):
        return ex(m, evaluate(m, f.arg))
    if isinstance(f, F.EF):
        return ef(m, evaluate(m, f.arg))
    if isinstance(f, F.EG):
        return eg(m, evaluate(m, f.arg))
    if isinstance(f, F.Connect):
        left = evaluate(m, f.left)
        if f.threshold is not None:
            if not 0.0 <= f.threshold <= 1.0:
                raise MalformedFormula(f"threshold {f.threshold} outside [0, 1]")
            left = neighborhood_density(m, left)
        return connect(m, left, evaluate(m, f.right), f.threshold)
    if isinstance(f, F.Str):
        if not f.distance > 0:
            raise MalformedFormula(f"distance {f.distance} must be positive")
        return str_(m, f.distance, evaluate(m, f.arg))
    if isinstance(f, F.Increase):
        return increase(m, evaluate(m, f.left), evaluate(m, f.right))
    if isinstance(f, F.Background):
        return background(m, evaluate(m, f.arg))
    if isinstance(f, F.Brain):
        return brain(m, evaluate(m, f.left), evaluate(m, f.right))
    raise MalformedFormula(f"not a formula node: {f!r}")
