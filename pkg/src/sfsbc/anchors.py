"""Sparse Dirichlet anchors that fix the sign of every ambiguity class.

Each anchor is a pixel of known depth. It is joined to the graph by extra
edges whose weight is the marched distance from the anchor; those edges are
not required to be monotone. For a class, one reference (an anchor, or a
vertex already fixed by a resolved neighbour) pins the absolute offset, and
every other attached anchor's depth is predicted under both candidate signs.
The candidate whose predictions land closer wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .eikonal import DEFAULT_EPS_SING, fmm_distance, slowness_from_image, trace_path
from .errors import BadInputError, InconsistentAnchorsError, UnresolvedAmbiguityError
from .fileio import load_json
from .graph import ConfigGraph, Configuration, Decomposition, Edge, propagate
from .grid import GridSpec
from .maxcut import SolverReport
from .singular import SingularPoint


@dataclass(frozen=True)
class BCAnchor:
    pixel: tuple[int, int]
    depth: float
    label: str = ""

    def to_json(self) -> dict:
        out = {"row": self.pixel[0], "col": self.pixel[1], "depth": self.depth}
        if self.label:
            out["label"] = self.label
        return out


def parse_anchors(data, grid: GridSpec | None = None) -> list[BCAnchor]:
    if not isinstance(data, list):
        raise BadInputError("anchors JSON must be a list of objects")
    if not data:
        raise BadInputError("anchor list is empty; at least one anchor is required")
    out, seen = [], set()
    for k, item in enumerate(data):
        try:
            row, col = item["row"], item["col"]
            depth = float(item["depth"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInputError(f"anchor #{k}: needs integer 'row', 'col' and real 'depth'") from exc
        if not (isinstance(row, int) and isinstance(col, int)) or isinstance(row, bool):
            raise BadInputError(f"anchor #{k}: row/col must be integers")
        if not np.isfinite(depth):
            raise BadInputError(f"anchor #{k}: depth must be finite")
        pixel = (row, col)
        if row < 0 or col < 0 or (grid is not None and not grid.contains(pixel)):
            raise BadInputError(f"anchor #{k}: pixel {pixel} lies outside the grid")
        if pixel in seen:
            raise BadInputError(f"anchor #{k}: duplicate pixel {pixel}")
        seen.add(pixel)
        out.append(BCAnchor(pixel, depth, str(item.get("label", ""))))
    return out


def load_anchors(path, grid: GridSpec | None = None) -> list[BCAnchor]:
    return parse_anchors(load_json(path), grid)


def attachment_vertices(g: ConfigGraph, dec: Decomposition) -> list[int]:
    """Bridge endpoints, the lowest edge of each free part, and isolated vertices."""
    att = set()
    for key in dec.free_edges:
        att.update(key)
    for part in dec.part_edges:
        att.update(part[0])
    touched = {v for e in g.core_edges() for v in e.key}
    att.update(v for v in range(g.n) if v not in touched and not g.is_anchor(v))
    return sorted(att)


def augment_graph(
    g: ConfigGraph,
    dec: Decomposition,
    anchors: list[BCAnchor],
    img,
    eps_sing: float = DEFAULT_EPS_SING,
    slowness=None,
) -> ConfigGraph:
    """Append anchors as vertices and join each to every attachment vertex."""
    if not anchors:
        raise BadInputError("at least one anchor is required")
    s = slowness if slowness is not None else slowness_from_image(img, eps_sing)
    vertices = list(g.vertices)
    edges = list(g.edges)
    depth = dict(g.anchor_depth)
    targets = attachment_vertices(g, dec)
    for a in anchors:
        if not img.grid.contains(a.pixel):
            raise BadInputError(f"anchor {a.pixel} outside the image")
        vid = len(vertices)
        vertices.append(SingularPoint(vid, a.pixel, img.brightness(a.pixel), "anchor", frozenset([a.pixel])))
        depth[vid] = a.depth
        dist = fmm_distance(s, a.pixel)
        for t in targets:
            w = dist.at(g.vertices[t].pixel)
            if not np.isfinite(w):
                raise BadInputError(f"anchor {a.pixel} cannot reach vertex {t}")
            edges.append(Edge(t, vid, w, trace_path(dist, g.vertices[t].pixel), anchor=True))
    return ConfigGraph(vertices, edges, depth)


# -- resolution -------------------------------------------------------------------


@dataclass
class Resolution:
    config: Configuration
    heights: dict  # absolute vertex depths (core vertices and anchors)
    choices: list  # chosen candidate index per class
    discrepancies: list  # (d0, d1) per class
    order: list  # class indices in resolution order
    notes: list = field(default_factory=list)


def _agreeing_signs(values, links):
    """Sign pattern on the links that makes ``values[k] + s_k * w_k`` agree best."""
    best = None
    for signs in product((-1, 1), repeat=len(links)):
        vals = [x + s * w for x, s, (_, w) in zip(values, signs, links)]
        spread = max(vals) - min(vals)
        if best is None or spread < best[0]:
            best = (spread, vals)
    return best[1]


def _fit_offset(rel, links, depth):
    """Offset that places a class relative to one anchor.

    Anchor edges skip the monotone test, so long ones overestimate the depth
    gap; the shortest link under the best-agreeing sign pattern is trusted.
    """
    vals = _agreeing_signs([depth - rel[v] for v, _ in links], links)
    k = min(range(len(links)), key=lambda i: (links[i][1], i))
    return vals[k]


def _predict(heights, links):
    """Anchor depth implied by absolute vertex heights and its edge weights."""
    vals = _agreeing_signs([heights[v] for v, _ in links], [(v, -w) for v, w in links])
    k = min(range(len(links)), key=lambda i: (links[i][1], i))
    return vals[k]


def _links(g_aug: ConfigGraph, anchor_vid: int, vertices) -> list:
    vs = set(vertices)
    return [(u, e.w) for u, e in g_aug.adj[anchor_vid] if u in vs]


def resolve_details(
    g_aug: ConfigGraph,
    report: SolverReport,
    anchors=None,
    accept_tol: float | None = None,
) -> Resolution:
    """Resolve every ambiguity class of ``report`` using the anchor edges of ``g_aug``.

    ``anchors`` is accepted for interface symmetry; depths are read from the
    augmented graph. ``accept_tol`` is a fraction of each class's mean edge
    weight (default 0.25); if even the better candidate misses the second
    reference anchor by more than that, the anchors are declared inconsistent.
    """
    frac = 0.25 if accept_tol is None else accept_tol
    anchor_ids = sorted(g_aug.anchor_depth, key=lambda v: (g_aug.vertices[v].pixel, v))
    known: dict[int, float] = {}
    n_cls = len(report.classes)
    rel = []
    for cls in report.classes:
        edges = [g_aug.edge(*k) for k in cls.edges]
        root = min(cls.vertices)
        rel.append([propagate(edges, cand, root, 0.0)[0] for cand in cls.candidates])
    choices = [None] * n_cls
    disc = [None] * n_cls
    order = []
    notes = []

    def reach(a, cls):
        links = _links(g_aug, a, cls.vertices)
        return (sum(w for _, w in links), g_aug.vertices[a].pixel)

    def attempt(c):
        """Scores of both candidates, or a reason why the class cannot be decided yet."""
        cls = report.classes[c]
        attached = sorted((a for a in anchor_ids if _links(g_aug, a, cls.vertices)), key=lambda a: reach(a, cls))
        fixed = [v for v in cls.vertices if v in known]
        if fixed:
            base, base_v = None, min(fixed)
            # An anchor seen only through fixed vertices says nothing about this class's sign.
            pool = [a for a in attached if any(u not in known for u, _ in _links(g_aug, a, cls.vertices))]
        elif attached:
            base = attached[0]
            pool = [a for a in attached[1:] if g_aug.anchor_depth[a] != g_aug.anchor_depth[base]]
            if not pool and len(attached) > 1:
                return "its anchors all have the same depth"
        else:
            return "no anchor is attached"
        if not pool:
            if fixed:
                return "a neighbour is resolved but no anchor reaches its other vertices"
            return "only one anchor is attached and no neighbour is resolved"
        second = pool[0]
        score, placed = [], []
        for k in (0, 1):
            r = rel[c][k]
            if base is None:
                off = known[base_v] - r[base_v]
            else:
                off = _fit_offset(r, _links(g_aug, base, cls.vertices), g_aug.anchor_depth[base])
            h = {v: off + r[v] for v in cls.vertices}
            score.append(abs(_predict(h, _links(g_aug, second, cls.vertices)) - g_aug.anchor_depth[second]))
            placed.append(h)
        return score, placed

    pending = list(range(n_cls))
    reasons = {}
    while pending:
        progress = False
        for c in list(pending):
            got = attempt(c)
            if isinstance(got, str):
                reasons[c] = got
                continue
            score, placed = got
            cls = report.classes[c]
            mean_w = float(np.mean([g_aug.edge(*k).w for k in cls.edges]))
            tol = frac * mean_w
            if abs(score[0] - score[1]) <= 1e-9 * max(tol, 1e-300):
                raise UnresolvedAmbiguityError(
                    f"class {c} ({cls.unit} {list(cls.edges)}): anchors cannot tell the two candidates apart"
                )
            k = 0 if score[0] <= score[1] else 1
            if score[k] > tol:
                raise InconsistentAnchorsError(
                    f"class {c}: best candidate misses anchor depths by {score[k]:.4g} (> {tol:.4g})"
                )
            choices[c] = k
            disc[c] = tuple(score)
            for v, z in placed[k].items():
                known.setdefault(v, z)
            order.append(c)
            pending.remove(c)
            progress = True
            break
        if not progress:
            detail = "; ".join(
                f"class {c} ({report.classes[c].unit} {list(report.classes[c].edges)}): {reasons[c]}" for c in pending
            )
            raise UnresolvedAmbiguityError(
                "unresolved ambiguity: " + detail
                + ". Each class needs two anchors of different depth, or one anchor plus a resolved neighbour"
            )

    signs = dict(report.chosen.signs)
    for c, cls in enumerate(report.classes):
        signs.update(cls.candidates[choices[c]].signs)

    # Vertices outside every class (isolated singular points): treat as peaks above their anchors.
    for v in range(g_aug.n):
        if v in known or g_aug.is_anchor(v):
            continue
        links = [(a, e.w) for a, e in g_aug.adj[v] if g_aug.is_anchor(a)]
        if links:
            known[v] = float(np.mean([g_aug.anchor_depth[a] + w for a, w in links]))
            notes.append(f"vertex {v} has no class; placed above its anchors")
    for a in anchor_ids:
        known[a] = g_aug.anchor_depth[a]
    return Resolution(Configuration(signs), known, choices, disc, order, notes)


def resolve_ambiguity(g_aug, report, anchors=None, accept_tol=None) -> Configuration:
    return resolve_details(g_aug, report, anchors, accept_tol).config
