"""Pure-Python fast marching kernel (fallback when the extension is missing).

Must stay arithmetically identical to ``_fmm_core.pyx``: same update formula,
same operation order, same (value, flat index) acceptance order.
"""

import heapq
import math

import numpy as np

INF = math.inf


def _update(d, known, f, i, j, ny, nx, hx, hy):
    a = INF
    if j > 0 and known[i, j - 1]:
        a = d[i, j - 1]
    if j < nx - 1 and known[i, j + 1] and d[i, j + 1] < a:
        a = d[i, j + 1]
    b = INF
    if i > 0 and known[i - 1, j]:
        b = d[i - 1, j]
    if i < ny - 1 and known[i + 1, j] and d[i + 1, j] < b:
        b = d[i + 1, j]
    fij = f[i, j]
    t1 = a + hx * fij
    t2 = b + hy * fij
    t = t1 if t1 < t2 else t2
    if a < INF and b < INF:
        ix2 = 1.0 / (hx * hx)
        iy2 = 1.0 / (hy * hy)
        qa = ix2 + iy2
        qb = -2.0 * (a * ix2 + b * iy2)
        qc = a * a * ix2 + b * b * iy2 - fij * fij
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            tq = (-qb + math.sqrt(disc)) / (2.0 * qa)
            if tq >= a and tq >= b and tq < t:
                t = tq
    return t


def march(f, seeds, seed_values, hx, hy):
    """Return ``(d, order)``: distance array and flat indices in acceptance order."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    ny, nx = f.shape
    d = np.full((ny, nx), INF)
    known = np.zeros((ny, nx), dtype=bool)
    heap = []
    for s, v in zip(seeds, seed_values):
        s = int(s)
        if v < d.flat[s]:
            d.flat[s] = float(v)
            heapq.heappush(heap, (float(v), s))
    order = np.empty(ny * nx, dtype=np.int64)
    n_acc = 0
    while heap:
        v, s = heapq.heappop(heap)
        i, j = divmod(s, nx)
        if known[i, j] or v > d[i, j]:
            continue
        known[i, j] = True
        order[n_acc] = s
        n_acc += 1
        for di, dj in ((0, 1), (-1, 0), (0, -1), (1, 0)):
            ii, jj = i + di, j + dj
            if 0 <= ii < ny and 0 <= jj < nx and not known[ii, jj]:
                t = _update(d, known, f, ii, jj, ny, nx, hx, hy)
                if t < d[ii, jj]:
                    d[ii, jj] = t
                    heapq.heappush(heap, (t, ii * nx + jj))
    return d, order[:n_acc]
