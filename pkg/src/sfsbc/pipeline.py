"""End-to-end orchestration: image -> points -> graph -> signs -> heights -> surface."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .anchors import BCAnchor, Resolution, _fit_offset, augment_graph, resolve_details
from .eikonal import (
    DEFAULT_EPS_SING,
    DistanceField,
    SlownessField,
    fmm_from_region,
    is_monotone,
    slowness_from_image,
    trace_path,
)
from .errors import BadInputError
from .forward import DEFAULT_GRID, make_surface, render_lambertian
from .graph import ConfigGraph, Configuration, Decomposition, build_graph, decompose, propagate
from .grid import GridSpec, HeightField, IrradianceImage
from .maxcut import SolverReport, enumerate_candidates, solve_configuration
from .reconstruct import ReconstructionResult, reconstruct_surface
from .singular import DEFAULT_MIN_SEP, SingularPoint, background_mask, detect_singular_points


@dataclass(frozen=True)
class Scene:
    kind: str
    grid: GridSpec = DEFAULT_GRID
    scale: float = 1.0
    eps_sing: float = DEFAULT_EPS_SING

    def surface(self) -> HeightField:
        return make_surface(self.kind, [self.scale], self.grid)

    def image(self) -> IrradianceImage:
        return render_lambertian(self.surface())


SCENES = {
    "bump": Scene("bump"),
    "silt_like": Scene("silt_like"),
    "two_bump": Scene("two_bump"),
    "face_like": Scene("face_like"),
    "chain": Scene("chain"),
}


def get_scene(name: str) -> Scene:
    try:
        return SCENES[name]
    except KeyError:
        raise BadInputError(f"unknown scene {name!r}; valid scenes: {', '.join(SCENES)}") from None


@dataclass
class Analysis:
    img: IrradianceImage
    slowness: SlownessField
    points: list[SingularPoint]
    graph: ConfigGraph
    dec: Decomposition
    report: SolverReport
    eps_sing: float = DEFAULT_EPS_SING
    _background: object = field(default=False, repr=False)

    def background(self) -> DistanceField | None:
        """Marched distance to the flat border-connected background, or ``None`` if there is none."""
        if self._background is False:
            mask = background_mask(self.img, self.eps_sing)
            self._background = fmm_from_region(self.slowness, mask) if mask.any() else None
        return self._background

    def levels(self) -> dict[int, float]:
        """Depth gap to the background for vertices joined to it by a monotone path."""
        dist = self.background()
        if dist is None:
            return {}
        regions = [p.region or frozenset([p.pixel]) for p in self.points]
        out = {}
        for v, p in enumerate(self.points):
            if not np.isfinite(dist.at(p.pixel)):
                continue
            path = trace_path(dist, p.pixel)
            if is_monotone(path, self.img, regions, self.eps_sing):
                out[v] = dist.at(p.pixel)
        return out


def analyze(
    img: IrradianceImage,
    eps_sing: float = DEFAULT_EPS_SING,
    min_sep: float = DEFAULT_MIN_SEP,
    cycle_tol: float | None = None,
) -> Analysis:
    points = detect_singular_points(img, eps_sing, min_sep)
    s = slowness_from_image(img, eps_sing)
    g = build_graph(img, points, eps_sing, slowness=s)
    dec = decompose(g)
    report = solve_configuration(g, dec, cycle_tol)
    return Analysis(img, s, points, g, dec, report, eps_sing)


def component_heights(g: ConfigGraph, cfg: Configuration, levels: dict | None = None) -> dict[int, float]:
    """Heights of every connected component under ``cfg``.

    Each component is rooted at its lowest id at depth 0. With ``levels``
    (distance to a flat background) the component is shifted so that the
    background sits at depth 0, which keeps separate objects mutually
    consistent; the signs are untouched.
    """
    z: dict[int, float] = {}
    edges = g.core_edges()
    for comp in g.components():
        if g.is_anchor(comp[0]) and len(comp) == 1:
            continue
        members = set(comp)
        cz, _, _ = propagate([e for e in edges if e.i in members], cfg, comp[0], 0.0)
        links = [(v, levels[v]) for v in comp if levels and v in levels]
        if links:
            shift = _fit_offset(cz, links, 0.0)
            cz = {v: h + shift for v, h in cz.items()}
        z.update(cz)
    return z


def candidate(report: SolverReport, index: int) -> Configuration:
    """Configuration number ``index`` (bit k flips class k relative to the solver's pick)."""
    if index < 0 or index >= 2 ** len(report.classes):
        raise BadInputError(f"candidate index {index} out of range for {len(report.classes)} classes")
    return enumerate_candidates(report, limit=index + 1)[index]


@dataclass
class Outcome:
    analysis: Analysis
    config: Configuration
    heights: dict
    result: ReconstructionResult
    resolution: Resolution | None = None
    graph: ConfigGraph | None = field(default=None, repr=False)  # augmented when anchored


def run(
    img: IrradianceImage,
    anchors: list[BCAnchor] | None = None,
    eps_sing: float = DEFAULT_EPS_SING,
    min_sep: float = DEFAULT_MIN_SEP,
    cycle_tol: float | None = None,
    accept_tol: float | None = None,
    candidate_index: int = 0,
    truth: HeightField | None = None,
    analysis: Analysis | None = None,
    level: bool = True,
) -> Outcome:
    """Whole pipeline. With anchors the classes are resolved; otherwise ``candidate_index`` picks one.

    Without anchors, ``level`` places separate components on a common flat background.
    """
    an = analysis or analyze(img, eps_sing, min_sep, cycle_tol)
    if anchors:
        g_aug = augment_graph(an.graph, an.dec, anchors, img, an.eps_sing, an.slowness)
        res = resolve_details(g_aug, an.report, anchors, accept_tol)
        heights = component_heights(an.graph, res.config)
        # Shift each component onto the absolute depths found during resolution.
        for comp in an.graph.components():
            known = [v for v in comp if v in res.heights]
            if known:
                shift = float(np.mean([res.heights[v] - heights[v] for v in known]))
                for v in comp:
                    heights[v] += shift
        for a in g_aug.anchor_depth:
            heights[a] = g_aug.anchor_depth[a]
        result = reconstruct_surface(img, g_aug, res.config, heights, an.slowness, truth)
        return Outcome(an, res.config, heights, result, res, g_aug)
    cfg = candidate(an.report, candidate_index)
    levels = an.levels() if level else None
    heights = component_heights(an.graph, cfg, levels)
    result = reconstruct_surface(img, an.graph, cfg, heights, an.slowness, truth)
    return Outcome(an, cfg, heights, result, None, an.graph)


def anchors_from_truth(truth: HeightField, an: Analysis, fractions=(1 / 3, 2 / 3)) -> list[BCAnchor]:
    """Two anchors per ambiguity class, sampled from ``truth`` along one of its edge paths.

    For a free part the lowest edge is used, for a free edge the edge itself.
    """
    out, seen = [], set()
    for c, cls in enumerate(an.report.classes):
        path = an.graph.edge(*cls.edges[0]).path
        if path is None or len(path.pixels) < 3:
            raise BadInputError(f"class {c} has no usable path for anchor sampling")
        for k, frac in enumerate(fractions):
            idx = min(max(1, round(frac * (len(path.pixels) - 1))), len(path.pixels) - 2)
            px = path.pixels[idx]
            if px in seen:
                continue
            seen.add(px)
            out.append(BCAnchor(px, float(truth.at(px)), f"c{c}.{k}"))
    return out
