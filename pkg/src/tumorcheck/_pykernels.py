"""Pure-Python graph kernels over the pixel grid.

Reference fallback for ``_ckernels``; both modules expose the same three
functions with identical semantics. Inputs are C-contiguous ``uint8``
arrays of shape ``(h, w)``; outputs are numpy arrays of the same shape.
"""
from collections import deque
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _neighbor_table(h, w, conn8):
    offsets = [(-1, 0), (1, 0), (0, 1), (0, -1)]
    if conn8:
        offsets += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    table = []
    for r in range(h):
        for c in range(w):
            nbrs = []
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    nbrs.append(rr * w + cc)
            table.append(nbrs)
    return table


def bfs_distance(seeds, conn8=False):
    """Hop distance to the nearest seed; -1 where no seed is reachable."""
    h, w = seeds.shape
    nbrs = _neighbor_table(h, w, conn8)
    dist = [-1] * (h * w)
    queue = deque()
    for i, s in enumerate(seeds.reshape(-1).tolist()):
        if s:
            dist[i] = 0
            queue.append(i)
    while queue:
        i = queue.popleft()
        d = dist[i] + 1
        for j in nbrs[i]:
            if dist[j] < 0:
                dist[j] = d
                queue.append(j)
    return np.array(dist, dtype=np.int32).reshape(h, w)


def flood_fill(allowed, seeds, conn8=False):
    """States of ``allowed`` reachable from ``seeds & allowed`` inside ``allowed``."""
    h, w = allowed.shape
    nbrs = _neighbor_table(h, w, conn8)
    ok = allowed.reshape(-1).tolist()
    out = [False] * (h * w)
    stack = []
    for i, s in enumerate(seeds.reshape(-1).tolist()):
        if s and ok[i]:
            out[i] = True
            stack.append(i)
    while stack:
        i = stack.pop()
        for j in nbrs[i]:
            if ok[j] and not out[j]:
                out[j] = True
                stack.append(j)
    return np.array(out, dtype=bool).reshape(h, w)


def eg_fixpoint(phi, conn8=False):
    """Greatest fixpoint of ``Z = phi & EX Z`` by successor counting."""
    h, w = phi.shape
    nbrs = _neighbor_table(h, w, conn8)
    inset = [bool(v) for v in phi.reshape(-1).tolist()]
    count = [0] * (h * w)
    queue = []
    for i in range(h * w):
        if inset[i]:
            count[i] = sum(1 for j in nbrs[i] if inset[j])
            if count[i] == 0:
                queue.append(i)
    dead = set(queue)
    while queue:
        i = queue.pop()
        inset[i] = False
        for j in nbrs[i]:
            if inset[j] and j not in dead:
                count[j] -= 1
                if count[j] == 0:
                    dead.add(j)
                    queue.append(j)
    return np.array(inset, dtype=bool).reshape(h, w)
