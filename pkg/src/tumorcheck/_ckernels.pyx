# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels over the pixel grid.

Same contract as ``tumorcheck._pykernels``: C-contiguous ``uint8`` input of
shape ``(h, w)``, flat-index work queues, each pixel enqueued at most once.
"""
import numpy as np

cdef int DR[8]
cdef int DC[8]
DR[:] = [-1, 1, 0, 0, -1, -1, 1, 1]
DC[:] = [0, 0, 1, -1, -1, 1, -1, 1]


def bfs_distance(const unsigned char[:, ::1] seeds, bint conn8=False):
    cdef Py_ssize_t h = seeds.shape[0], w = seeds.shape[1]
    cdef Py_ssize_t n = h * w
    out = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] dist = out
    cdef int[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t head = 0, tail = 0, r, c, rr, cc, k
    cdef int nk = 8 if conn8 else 4
    cdef int i, d
    with nogil:
        for r in range(h):
            for c in range(w):
                if seeds[r, c]:
                    dist[r, c] = 0
                    queue[tail] = <int>(r * w + c)
                    tail += 1
        while head < tail:
            i = queue[head]
            head += 1
            r = i // w
            c = i % w
            d = dist[r, c] + 1
            for k in range(nk):
                rr = r + DR[k]
                cc = c + DC[k]
                if rr < 0 or rr >= h or cc < 0 or cc >= w:
                    continue
                if dist[rr, cc] < 0:
                    dist[rr, cc] = d
                    queue[tail] = <int>(rr * w + cc)
                    tail += 1
    return out


def flood_fill(const unsigned char[:, ::1] allowed,
               const unsigned char[:, ::1] seeds, bint conn8=False):
    cdef Py_ssize_t h = allowed.shape[0], w = allowed.shape[1]
    cdef Py_ssize_t n = h * w
    out = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] res = out
    cdef int[::1] stack = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t top = 0, r, c, rr, cc, k
    cdef int nk = 8 if conn8 else 4
    cdef int i
    with nogil:
        for r in range(h):
            for c in range(w):
                if seeds[r, c] and allowed[r, c]:
                    res[r, c] = 1
                    stack[top] = <int>(r * w + c)
                    top += 1
        while top > 0:
            top -= 1
            i = stack[top]
            r = i // w
            c = i % w
            for k in range(nk):
                rr = r + DR[k]
                cc = c + DC[k]
                if rr < 0 or rr >= h or cc < 0 or cc >= w:
                    continue
                if allowed[rr, cc] and not res[rr, cc]:
                    res[rr, cc] = 1
                    stack[top] = <int>(rr * w + cc)
                    top += 1
    return out.view(bool)


def eg_fixpoint(const unsigned char[:, ::1] phi, bint conn8=False):
    cdef Py_ssize_t h = phi.shape[0], w = phi.shape[1]
    cdef Py_ssize_t n = h * w
    out = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] inset = out
    cdef unsigned char[:, ::1] dead = np.zeros((h, w), dtype=np.uint8)
    cdef int[:, ::1] count = np.zeros((h, w), dtype=np.int32)
    cdef int[::1] stack = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t top = 0, r, c, rr, cc, k
    cdef int nk = 8 if conn8 else 4
    cdef int i
    with nogil:
        for r in range(h):
            for c in range(w):
                inset[r, c] = 1 if phi[r, c] else 0
        for r in range(h):
            for c in range(w):
                if not inset[r, c]:
                    continue
                for k in range(nk):
                    rr = r + DR[k]
                    cc = c + DC[k]
                    if 0 <= rr < h and 0 <= cc < w and inset[rr, cc]:
                        count[r, c] += 1
                if count[r, c] == 0:
                    dead[r, c] = 1
                    stack[top] = <int>(r * w + c)
                    top += 1
        while top > 0:
            top -= 1
            i = stack[top]
            r = i // w
            c = i % w
            inset[r, c] = 0
            for k in range(nk):
                rr = r + DR[k]
                cc = c + DC[k]
                if rr < 0 or rr >= h or cc < 0 or cc >= w:
                    continue
                if inset[rr, cc] and not dead[rr, cc]:
                    count[rr, cc] -= 1
                    if count[rr, cc] == 0:
                        dead[rr, cc] = 1
                        stack[top] = <int>(rr * w + cc)
                        top += 1
    return out.view(bool)
