# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fast marching kernel.

Indexed binary min-heap keyed on (value, flat index); the acceptance order is
therefore identical to the heapq fallback in ``_fmm_py.py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline bint _less(double va, Py_ssize_t ia, double vb, Py_ssize_t ib) noexcept nogil:
    return va < vb or (va == vb and ia < ib)


cdef struct Heap:
    Py_ssize_t *items
    Py_ssize_t *pos
    double *key
    Py_ssize_t size


cdef inline void _swap(Heap *h, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef Py_ssize_t ta = h.items[a]
    h.items[a] = h.items[b]
    h.items[b] = ta
    h.pos[h.items[a]] = a
    h.pos[h.items[b]] = b


cdef void _sift_up(Heap *h, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t parent
    while k > 0:
        parent = (k - 1) >> 1
        if _less(h.key[h.items[k]], h.items[k], h.key[h.items[parent]], h.items[parent]):
            _swap(h, k, parent)
            k = parent
        else:
            break


cdef void _sift_down(Heap *h, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t child, best
    while True:
        child = 2 * k + 1
        if child >= h.size:
            break
        best = child
        if child + 1 < h.size and _less(h.key[h.items[child + 1]], h.items[child + 1],
                                        h.key[h.items[child]], h.items[child]):
            best = child + 1
        if _less(h.key[h.items[best]], h.items[best], h.key[h.items[k]], h.items[k]):
            _swap(h, k, best)
            k = best
        else:
            break


cdef void _push_or_decrease(Heap *h, Py_ssize_t s) noexcept nogil:
    if h.pos[s] < 0:
        h.items[h.size] = s
        h.pos[s] = h.size
        h.size += 1
    _sift_up(h, h.pos[s])


cdef Py_ssize_t _pop(Heap *h) noexcept nogil:
    cdef Py_ssize_t top = h.items[0]
    h.size -= 1
    if h.size > 0:
        h.items[0] = h.items[h.size]
        h.pos[h.items[0]] = 0
        _sift_down(h, 0)
    h.pos[top] = -2
    return top


cdef inline double _update(double *d, char *known, double *f, Py_ssize_t i, Py_ssize_t j,
                           Py_ssize_t ny, Py_ssize_t nx, double hx, double hy) noexcept nogil:
    cdef double a = INFINITY, b = INFINITY, fij, t1, t2, t, ix2, iy2, qa, qb, qc, disc, tq
    cdef Py_ssize_t s = i * nx + j
    if j > 0 and known[s - 1]:
        a = d[s - 1]
    if j < nx - 1 and known[s + 1] and d[s + 1] < a:
        a = d[s + 1]
    if i > 0 and known[s - nx]:
        b = d[s - nx]
    if i < ny - 1 and known[s + nx] and d[s + nx] < b:
        b = d[s + nx]
    fij = f[s]
    t1 = a + hx * fij
    t2 = b + hy * fij
    t = t1 if t1 < t2 else t2
    if a < INFINITY and b < INFINITY:
        ix2 = 1.0 / (hx * hx)
        iy2 = 1.0 / (hy * hy)
        qa = ix2 + iy2
        qb = -2.0 * (a * ix2 + b * iy2)
        qc = a * a * ix2 + b * b * iy2 - fij * fij
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            tq = (-qb + sqrt(disc)) / (2.0 * qa)
            if tq >= a and tq >= b and tq < t:
                t = tq
    return t


def march(f, seeds, seed_values, double hx, double hy):
    """Return ``(d, order)``: distance array and flat indices in acceptance order."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] fa = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t ny = fa.shape[0], nx = fa.shape[1], n = ny * nx
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d = np.full(n, np.inf)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] known = np.zeros(n, dtype=np.int8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] items = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pos = np.full(n, -1, dtype=np.int64)
    cdef double *dp = <double *> d.data
    cdef char *kp = <char *> known.data
    cdef double *fp = <double *> fa.data
    cdef Heap h
    cdef Py_ssize_t s, i, j, ii, jj, k, nb, n_acc = 0
    cdef double t
    cdef int[4] di = [0, -1, 0, 1]
    cdef int[4] dj = [1, 0, -1, 0]

    h.items = <Py_ssize_t *> items.data
    h.pos = <Py_ssize_t *> pos.data
    h.key = dp
    h.size = 0

    for s_obj, v_obj in zip(seeds, seed_values):
        s = s_obj
        if v_obj < dp[s]:
            dp[s] = v_obj
            _push_or_decrease(&h, s)

    with nogil:
        while h.size > 0:
            s = _pop(&h)
            kp[s] = 1
            order[n_acc] = s
            n_acc += 1
            i = s // nx
            j = s - i * nx
            for k in range(4):
                ii = i + di[k]
                jj = j + dj[k]
                if ii < 0 or ii >= ny or jj < 0 or jj >= nx:
                    continue
                nb = ii * nx + jj
                if kp[nb]:
                    continue
                t = _update(dp, kp, fp, ii, jj, ny, nx, hx, hy)
                if t < dp[nb]:
                    dp[nb] = t
                    _push_or_decrease(&h, nb)
    return d.reshape(ny, nx), order[:n_acc].copy()
