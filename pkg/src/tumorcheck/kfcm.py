"""Kernel fuzzy c-means segmentation and tumor-candidate region selection.

The clustering runs on intensities only, with a Gaussian kernel
``K(x, v) = exp(-(x - v)^2 / sigma^2)`` and objective

    J = sum_i sum_j u_ij^m * 2 * (1 - K(x_j, v_i)).

Memberships depend on a pixel only through its intensity, so after the
seeded per-pixel initialization the iterations run on the intensity
histogram and are expanded back to pixels at the end.
"""
import sys
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, IndexOutOfRange
from .imageprep import check_gray

GRAY_LEVELS = (25, 50, 100, 150)

DEFAULT_K = 4
DEFAULT_M = 2.0
DEFAULT_SIGMA = 150.0
DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITER = 100


@dataclass
class FuzzyPartition:
    """Result of :func:`kfcm`.

    Attributes
    ----------
    memberships : ndarray, shape (k, n)
        Per-pixel memberships, each column summing to 1.
    centers : ndarray, shape (k,)
    objective_trace : list of float
        Objective value after every iteration.
    shape : tuple
        Image shape, so ``memberships`` can be reshaped.
    converged : bool
        False when ``max_iter`` ran out first.
    """

    memberships: np.ndarray
    centers: np.ndarray
    objective_trace: List[float]
    shape: tuple
    converged: bool = True

    @property
    def k(self):
        return len(self.centers)


def _memberships(dist, m):
    """FCM membership update from kernel distances ``dist`` of shape (k, n)."""
    k, n = dist.shape
    zero = dist <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(zero, 0.0, dist) ** (-1.0 / (m - 1.0))
        inv[zero] = 0.0
        u = inv / inv.sum(axis=0, keepdims=True)
    hit = zero.any(axis=0)
    if hit.any():
        # singularity: a pixel sitting exactly on a center belongs to it alone
        first = np.argmax(zero, axis=0)
        u[:, hit] = 0.0
        u[first[hit], np.nonzero(hit)[0]] = 1.0
    return u


def _objective(u, dist, m, weights):
    return float(np.sum((u ** m) * 2.0 * dist * weights))


def _kmeanspp_centers(vals, counts, k, rng):
    """D^2-weighted seeding over the intensity histogram."""
    w = counts.astype(np.float64)
    centers = [vals[rng.choice(len(vals), p=w / w.sum())]]
    for _ in range(1, k):
        d2 = np.min((vals[None, :] - np.array(centers)[:, None]) ** 2, axis=0) * w
        if d2.sum() == 0:
            centers.append(centers[-1])
            continue
        centers.append(vals[rng.choice(len(vals), p=d2 / d2.sum())])
    return np.array(centers, dtype=np.float64)


INITS = ("memberships", "kmeans++")


def kfcm(img, k=DEFAULT_K, m=DEFAULT_M, kernel_sigma=DEFAULT_SIGMA, tol=DEFAULT_TOL,
         max_iter=DEFAULT_MAX_ITER, seed=0, callback=None, n_init=1, init="memberships"):
    """Cluster pixel intensities into ``k`` fuzzy clusters.

    ``init="memberships"`` draws seeded uniform-random memberships per pixel,
    normalizes them, and starts from their weighted-mean centers. On large
    images these centers all land near the global mean, so
    ``init="kmeans++"`` (seeded D^2 sampling of starting centers) is offered
    for data with small, well-separated populations.

    With ``n_init > 1`` the clustering is restarted from independent seeded
    initializations (children of ``seed``) and the run with the lowest final
    objective is kept; ``n_init=1`` uses ``seed`` directly.

    Stops when the objective changes by less than ``tol`` times the first
    objective value, or after ``max_iter`` iterations. (Relative to the
    previous value would never trigger on data the clusters fit exactly,
    where the objective decays geometrically to zero.) Not converging is not
    an error; the last partition is returned with its trace.

    ``callback(iteration, memberships, centers, objective)`` is invoked after
    every iteration with the full ``(k, n)`` membership matrix.
    """
    img = check_gray(img)
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}, got {init!r}")
    if n_init > 1:
        best = None
        for child in np.random.SeedSequence(seed).spawn(n_init):
            run = kfcm(img, k, m, kernel_sigma, tol, max_iter, child, callback, init=init)
            if best is None or run.objective_trace[-1] < best.objective_trace[-1]:
                best = run
        return best
    if k < 1:
        raise ValueError("k must be at least 1")
    if m <= 1:
        raise ValueError("fuzzifier m must exceed 1")
    if kernel_sigma <= 0 or tol <= 0 or max_iter < 1:
        raise ValueError("kernel_sigma, tol and max_iter must be positive")

    values, inverse, counts = np.unique(img.reshape(-1), return_inverse=True, return_counts=True)
    if k > 1 and k > len(values):
        raise DegenerateInput(f"k={k} clusters but only {len(values)} distinct intensities")
    vals = values.astype(np.float64)
    weights = counts.astype(np.float64)[None, :]
    s2 = kernel_sigma * kernel_sigma

    def kernel(centers):
        return np.exp(-((vals[None, :] - centers[:, None]) ** 2) / s2)

    def expand(u_hist):
        return u_hist[:, inverse]

    rng = np.random.default_rng(seed)
    if init == "memberships":
        x = img.reshape(-1).astype(np.float64)
        u0 = rng.random((k, x.size))
        u0 /= u0.sum(axis=0, keepdims=True)
        w0 = u0 ** m
        centers = (w0 @ x) / w0.sum(axis=1)
        # initial memberships are per pixel, not per intensity
        first_obj = float(np.sum((u0 ** m) * 2.0 * (1.0 - kernel(centers)[:, inverse])))
    else:
        centers = _kmeanspp_centers(vals, counts, k, rng)
        dist0 = 1.0 - kernel(centers)
        first_obj = _objective(_memberships(dist0, m), dist0, m, weights)

    trace = []
    converged = False
    for it in range(1, max_iter + 1):
        kern = kernel(centers)
        dist = 1.0 - kern
        obj = first_obj if it == 1 else _objective(u, dist, m, weights)
        trace.append(obj)

        u = _memberships(dist, m)
        wk = (u ** m) * kern * weights
        denom = wk.sum(axis=1)
        # an emptied cluster keeps its center
        safe = denom > 0
        centers = np.where(safe, (wk @ vals) / np.where(safe, denom, 1.0), centers)
        if callback is not None:
            callback(it, expand(u), centers.copy(), obj)
        if it > 1 and abs(trace[-2] - obj) <= tol * abs(trace[0]):
            converged = True
            break

    return FuzzyPartition(expand(u), centers, trace, img.shape, converged)


def print_trace(part, stream=None):
    stream = stream or sys.stdout
    for i, v in enumerate(part.objective_trace, 1):
        print(f"Iteration count = {i}, obj. fcn = {v:.6f}", file=stream)


@dataclass
class SegmentImage:
    labels: np.ndarray  # (h, w) gray-levels
    k: int

    @property
    def levels(self):
        return GRAY_LEVELS[:self.k]


def label_segments(part):
    """Hard labels by argmax membership, clusters ranked by ascending center."""
    if part.k > len(GRAY_LEVELS):
        raise ValueError(f"at most {len(GRAY_LEVELS)} clusters can be labeled, got {part.k}")
    hard = np.argmax(part.memberships, axis=0)  # ties go to the lowest index
    order = np.argsort(part.centers, kind="stable")
    rank = np.empty(part.k, dtype=np.intp)
    rank[order] = np.arange(part.k)
    levels = np.array(GRAY_LEVELS[:part.k], dtype=np.uint8)
    return SegmentImage(levels[rank[hard]].reshape(part.shape), part.k)


@dataclass
class RegionSet:
    regions: List[np.ndarray]
    masked_images: List[np.ndarray]

    @property
    def k(self):
        return len(self.regions)

    def labels(self):
        """Rebuild the segment labels from the regions."""
        out = np.zeros(self.regions[0].shape, dtype=np.uint8)
        for level, region in zip(GRAY_LEVELS, self.regions):
            out[region] = level
        return out


def split_regions(seg, img):
    img = check_gray(img)
    if seg.labels.shape != img.shape:
        raise DimensionMismatch(f"segment {seg.labels.shape} vs image {img.shape}")
    regions, masked = [], []
    for level in seg.levels:
        region = seg.labels == level
        regions.append(region)
        masked.append(np.where(region, img, 0).astype(np.uint8))
    return RegionSet(regions, masked)


AUTO = "auto"


def _touches_border(mask):
    return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())


def auto_index(rs):
    """1-based index of the brightest non-empty region not touching the image edge.

    Falls back to the brightest region overall when every region touches
    the edge. Ties go to the lowest index.
    """
    means = []
    for region, masked in zip(rs.regions, rs.masked_images):
        means.append(float(masked[region].mean()) if region.any() else -np.inf)
    inner = [i for i, r in enumerate(rs.regions) if r.any() and not _touches_border(r)]
    pool = inner or [i for i, r in enumerate(rs.regions) if r.any()]
    best = max(pool, key=lambda i: (means[i], -i))
    return best + 1


def select_region(rs, selector=AUTO):
    """Return a region mask by 1-based index, or by the :func:`auto_index` rule."""
    if selector == AUTO:
        selector = auto_index(rs)
    if isinstance(selector, bool) or not isinstance(selector, (int, np.integer)):
        raise TypeError(f"selector must be an int or 'auto', got {selector!r}")
    if not 1 <= selector <= rs.k:
        raise IndexOutOfRange(f"index {selector} outside 1..{rs.k}")
    return rs.regions[selector - 1]
