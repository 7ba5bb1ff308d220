"""Dense surface from vertex heights: max over per-peak viscosity solutions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eikonal import DistanceField, fmm_distance, slowness_from_image
from .errors import BadInputError
from .forward import render_lambertian
from .graph import ConfigGraph, Configuration, HeightAssignment
from .grid import HeightField, IrradianceImage

BORDER = 3


@dataclass
class ReconstructionResult:
    surface: HeightField
    sources: list  # vertex ids used as peaks
    distances: dict = field(default_factory=dict, repr=False)  # vertex -> DistanceField
    image_residual: float = float("nan")
    depth_error: float | None = None
    unreached: int = 0
    negated: bool = False
    background_level: float | None = None


def _peaks(g: ConfigGraph, z: dict) -> list[int]:
    out = []
    for v in sorted(z):
        # Anchors compete with their graph neighbours; graph vertices only with each other.
        if g.is_anchor(v):
            nbrs = [u for u in g.neighbors(v) if u in z]
            if not nbrs:
                continue
        else:
            nbrs = [u for u in g.neighbors(v) if u in z and not g.is_anchor(u)]
        if all(z[v] >= z[u] for u in nbrs):
            out.append(v)
    return out


def reconstruct_surface(
    img: IrradianceImage,
    g: ConfigGraph,
    cfg: Configuration | None,
    heights: HeightAssignment | dict,
    slowness=None,
    truth: HeightField | None = None,
    background: tuple[np.ndarray, float] | None = None,
) -> ReconstructionResult:
    """``u(x) = max_i (z_i - D_i(x))`` over vertices that are peaks among their neighbours.

    ``cfg`` is carried for bookkeeping; the vertex heights already encode it.
    If no vertex is a peak (an all-concave configuration) the construction
    runs on negated heights and the result is negated back.

    ``background=(dist, level)`` adds one more source: a flat plateau at depth
    ``level`` whose marched distance map is ``dist``. It supplies the walls
    rising out of pits and trenches back to the surroundings.
    """
    z = dict(heights.z if isinstance(heights, HeightAssignment) else heights)
    if not z:
        raise BadInputError("no vertex heights to reconstruct from")
    s = slowness if slowness is not None else slowness_from_image(img)
    negated = False
    peaks = _peaks(g, z)
    if not peaks:
        z = {v: -h for v, h in z.items()}
        peaks = _peaks(g, z)
        negated = True
    u = np.full(img.grid.shape, -np.inf)
    dists: dict[int, DistanceField] = {}
    for v in peaks:
        d = fmm_distance(s, g.vertices[v].pixel)
        dists[v] = d
        np.maximum(u, z[v] - d.d, out=u)
    if background is not None:
        bdist, level = background
        np.maximum(u, (-level if negated else level) - bdist, out=u)
    unreached = int(np.sum(~np.isfinite(u)))
    if unreached:
        # Not reachable from any peak: copy the nearest reached value.
        from scipy import ndimage

        bad = ~np.isfinite(u)
        idx = ndimage.distance_transform_edt(bad, return_distances=False, return_indices=True)
        u = u[tuple(idx)]
    if negated:
        u = -u
    surface = HeightField(img.grid, u)
    result = ReconstructionResult(surface, peaks, dists, unreached=unreached, negated=negated)
    result.background_level = None if background is None else float(background[1])
    result.image_residual = render_residual(result, img)
    if truth is not None:
        result.depth_error = depth_rmse(surface, truth)
    return result


def _interior(a: np.ndarray, border: int = BORDER) -> np.ndarray:
    return a[border:-border, border:-border]


def render_residual(result: ReconstructionResult | HeightField, img: IrradianceImage) -> float:
    """RMS brightness error of the re-rendered surface, 3-pixel border excluded."""
    surface = result.surface if isinstance(result, ReconstructionResult) else result
    if surface.grid.shape != img.grid.shape:
        raise BadInputError("surface and image dimensions differ")
    again = render_lambertian(HeightField(img.grid, surface.z), img.e_max)
    return float(np.sqrt(np.mean(_interior(again.e - img.e) ** 2)))


def depth_rmse(a: HeightField, b: HeightField) -> float:
    """RMS of ``a - b`` after removing the mean offset."""
    if a.z.shape != b.z.shape:
        raise BadInputError(f"shape mismatch {a.z.shape} vs {b.z.shape}")
    diff = a.z - b.z
    return float(np.sqrt(np.mean((diff - diff.mean()) ** 2)))
