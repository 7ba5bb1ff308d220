"""Eikonal inversion: slowness from brightness, fast marching, path backtracing.

The distance ``D(a, x) = min over paths of  integral |grad u| ds`` is the
altitude difference between ``a`` and ``x`` whenever a monotone path joins
them, which is what the singular-point graph needs as edge weight.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import BadInputError, PathTraceError
from .grid import GridSpec, IrradianceImage

if os.environ.get("SFSBC_PURE_PYTHON"):
    from . import _fmm_py as _kernel
else:
    try:
        from . import _fmm_core as _kernel
    except ImportError:  # extension not built
        from . import _fmm_py as _kernel

BACKEND = "cython" if _kernel.__name__.endswith("_fmm_core") else "python"

DEFAULT_EPS_SING = 0.02
DEFAULT_INIT_RADIUS = 8.0

# Backtracing scan order: E, N, W, S, NE, NW, SW, SE (row index grows southwards).
NEIGHBORS_8 = ((0, 1), (-1, 0), (0, -1), (1, 0), (-1, 1), (-1, -1), (1, -1), (1, 1))


def kernels():
    """Available marching kernels by name, for benchmarking and cross-checks."""
    from . import _fmm_py

    out = {"python": _fmm_py.march}
    try:
        from . import _fmm_core

        out["cython"] = _fmm_core.march
    except ImportError:
        pass
    return out


@dataclass(frozen=True)
class SlownessField:
    grid: GridSpec
    f: np.ndarray

    def __post_init__(self):
        if self.f.shape != self.grid.shape or not np.all(np.isfinite(self.f)) or self.f.min() < 0:
            raise BadInputError("slowness must be finite, non-negative and match the grid")


@dataclass(frozen=True)
class DistanceField:
    grid: GridSpec
    source: tuple[int, int] | None  # None when marched from a seed region
    d: np.ndarray
    order: np.ndarray  # flat pixel indices in acceptance order

    def at(self, pixel) -> float:
        return float(self.d[pixel[0], pixel[1]])


@dataclass(frozen=True)
class GridPath:
    pixels: tuple[tuple[int, int], ...]  # source first, target last
    cumulative: tuple[float, ...]

    @property
    def source(self):
        return self.pixels[0]

    @property
    def target(self):
        return self.pixels[-1]

    @property
    def length(self) -> float:
        return self.cumulative[-1]

    def interior(self):
        return self.pixels[1:-1]

    def integral(self, s: SlownessField) -> float:
        """Trapezoidal integral of slowness along the pixel chain, in world units."""
        g = s.grid
        total = 0.0
        for (i0, j0), (i1, j1) in zip(self.pixels[:-1], self.pixels[1:]):
            step = np.hypot((j1 - j0) * g.hx, (i1 - i0) * g.hy)
            total += 0.5 * (s.f[i0, j0] + s.f[i1, j1]) * step
        return float(total)


def bright_mask(img: IrradianceImage, eps_sing: float = DEFAULT_EPS_SING) -> np.ndarray:
    return img.e >= (1.0 - eps_sing) * img.e_max


def slowness_from_image(
    img: IrradianceImage,
    eps_sing: float = DEFAULT_EPS_SING,
    literal: bool = False,
    clamp: bool = False,
) -> SlownessField:
    """Slope magnitude ``sqrt(e_max^2/e^2 - 1)`` implied by the Eikonal image model.

    Pixels at or above ``e_max`` get zero slowness. With ``clamp=True`` every
    pixel within ``eps_sing`` of ``e_max`` is zeroed as well; this discards
    up to ``eps_sing``-level slope over each plateau and biases edge weights
    low, so it is off by default. ``literal=True`` uses ``1/e`` instead
    (unit-normalized variant, for comparison only).
    """
    if not 0.0 < eps_sing < 1.0:
        raise BadInputError(f"eps_sing must lie in (0, 1), got {eps_sing}")
    if np.any(img.e <= 0.0):
        raise BadInputError("image has non-positive pixels (shadow); the Eikonal model needs e > 0")
    if literal:
        f = 1.0 / img.e
    else:
        f = np.sqrt(np.maximum((img.e_max / img.e) ** 2 - 1.0, 0.0))
    if clamp:
        f = np.where(bright_mask(img, eps_sing), 0.0, f)
    return SlownessField(img.grid, f)


def _init_ball(s: SlownessField, source, radius: float):
    """Seed pixels within ``radius`` px of the source with straight-segment costs."""
    g = s.grid
    i0, j0 = source
    r = int(np.floor(radius))
    ii, jj = np.mgrid[max(i0 - r, 0) : min(i0 + r, g.height - 1) + 1, max(j0 - r, 0) : min(j0 + r, g.width - 1) + 1]
    inside = (ii - i0) ** 2 + (jj - j0) ** 2 <= radius * radius
    ii, jj = ii[inside], jj[inside]
    length = np.hypot((jj - j0) * g.hx, (ii - i0) * g.hy)
    n_samples = int(np.ceil(radius)) * 2 + 2
    t = np.linspace(0.0, 1.0, n_samples)[:, None]
    si = np.rint(i0 + t * (ii - i0)).astype(int)
    sj = np.rint(j0 + t * (jj - j0)).astype(int)
    samples = s.f[si, sj]
    mean_f = (samples[1:] + samples[:-1]).sum(axis=0) / (2.0 * (n_samples - 1))
    return ii * g.width + jj, length * mean_f


def fmm_distance(
    s: SlownessField, source, init_radius: float = DEFAULT_INIT_RADIUS, march=None
) -> DistanceField:
    """First-order fast marching from ``source`` (4-neighbour upwind stencil).

    Pixels within ``init_radius`` pixels of the source are seeded with the
    straight-segment integral of the slowness, which removes most of the
    point-source error of the first-order scheme. ``init_radius=0`` gives a
    plain point source.
    """
    g = s.grid
    source = (int(source[0]), int(source[1]))
    if not g.contains(source):
        raise BadInputError(f"source {source} outside the {g.width}x{g.height} grid")
    if init_radius > 0:
        seeds, values = _init_ball(s, source, init_radius)
    else:
        seeds, values = [source[0] * g.width + source[1]], [0.0]
    march = march or _kernel.march
    d, order = march(s.f, seeds, values, g.hx, g.hy)
    return DistanceField(g, source, d, order)


def fmm_from_region(s: SlownessField, mask: np.ndarray, march=None) -> DistanceField:
    """Distance to the nearest pixel of ``mask`` (all seeded at zero)."""
    if mask.shape != s.grid.shape:
        raise BadInputError("mask does not match the grid")
    seeds = np.flatnonzero(mask)
    if seeds.size == 0:
        raise BadInputError("empty seed region")
    march = march or _kernel.march
    d, order = march(s.f, seeds, np.zeros(seeds.size), s.grid.hx, s.grid.hy)
    return DistanceField(s.grid, None, d, order)


def _plateau_escape(d, start, source, h, w):
    """BFS through equal-distance pixels to the nearest strictly lower pixel (or the source)."""
    level = d[start]
    prev = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for di, dj in NEIGHBORS_8:
            nb = (cur[0] + di, cur[1] + dj)
            if not (0 <= nb[0] < h and 0 <= nb[1] < w) or nb in prev:
                continue
            if d[nb] > level:
                continue
            prev[nb] = cur
            if d[nb] < level or nb == source:
                chain = [nb]
                while prev[chain[-1]] != start:
                    chain.append(prev[chain[-1]])
                return chain[::-1]
            queue.append(nb)
    return None


def trace_path(dist: DistanceField, target) -> GridPath:
    """Steepest descent on the distance field from ``target`` back to the source.

    For a field marched from a region the descent stops at the first pixel of distance zero.
    """
    d = dist.d
    h, w = d.shape
    target = (int(target[0]), int(target[1]))
    if not dist.grid.contains(target):
        raise BadInputError(f"target {target} outside grid")
    if not np.isfinite(d[target]):
        raise PathTraceError(f"target {target} is unreachable from {dist.source}")
    g = dist.grid
    steps = [np.hypot(dj * g.hx, di * g.hy) for di, dj in NEIGHBORS_8]
    path = [target]
    cur = target
    limit = h * w

    def arrived(p):
        return d[p] <= 0.0 if dist.source is None else p == dist.source

    while not arrived(cur):
        # Steepest descent: largest drop per unit world length.
        best, best_slope = None, 0.0
        for (di, dj), step in zip(NEIGHBORS_8, steps):
            nb = (cur[0] + di, cur[1] + dj)
            if 0 <= nb[0] < h and 0 <= nb[1] < w and d[nb] < d[cur]:
                slope = (d[nb] - d[cur]) / step
                if best is None or slope < best_slope:
                    best, best_slope = nb, slope
        if best is not None:
            path.append(best)
            cur = best
        else:
            chain = _plateau_escape(d, cur, dist.source, h, w)
            if chain is None:
                raise PathTraceError(f"descent stalled at {cur}, d={d[cur]:.6g}, before reaching the source")
            path.extend(chain)
            cur = chain[-1]
        if len(path) > limit:
            raise PathTraceError("backtrace did not terminate; malformed distance field")
    path.reverse()
    cumulative = tuple(float(d[p]) for p in path)
    return GridPath(tuple(path), cumulative)


def is_monotone(path: GridPath, img: IrradianceImage, singulars=(), eps_sing: float = DEFAULT_EPS_SING) -> bool:
    """True when no interior path pixel is a critical point of depth.

    ``singulars`` is a sequence of pixel regions (one per singular point). Bright
    pixels are tolerated only inside the regions that own the path's endpoints.
    """
    if len(path.pixels) <= 2:
        return True
    regions = [frozenset(r) for r in singulars]
    own = set()
    for r in regions:
        if path.source in r or path.target in r:
            own |= r
    others = set().union(*regions) - own if regions else set()
    thresh = (1.0 - eps_sing) * img.e_max
    for p in path.interior():
        if p in own:
            continue
        if p in others or img.e[p] >= thresh:
            return False
    return True


def dump_distance_csv(dist: DistanceField, path) -> None:
    from .fileio import write_height_csv
    from .grid import HeightField

    d = np.where(np.isfinite(dist.d), dist.d, -1.0)
    write_height_csv(HeightField(dist.grid, d), path)
