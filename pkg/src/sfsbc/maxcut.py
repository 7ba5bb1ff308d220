"""Exact sign selection per free part, and the residual ambiguity classes.

Objective for a part: the total absolute cycle residual over the fundamental
cycles of a fixed BFS spanning tree (rooted at the part's lowest vertex).
The tree-edge signs fix every vertex height; each non-tree edge then takes
the sign that best closes its cycle, leaving ``| |z_j - z_i| - w_ij |``.
Search is depth-first over tree-edge signs with the partial residual as a
lower bound.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .errors import InfeasibleConfigurationError
from .graph import ConfigGraph, Configuration, Decomposition, default_cycle_tol, propagate, reverse


@dataclass(frozen=True)
class AmbiguityClass:
    unit: str  # "free_edge", "free_part" or "global"
    edges: tuple  # edge keys of the unit
    vertices: tuple
    candidates: tuple  # (best, reverse of best), each restricted to ``edges``

    def to_json(self) -> dict:
        return {
            "unit": self.unit,
            "edges": [list(e) for e in self.edges],
            "vertices": list(self.vertices),
            "candidates": [[c[e] for e in self.edges] for c in self.candidates],
        }


@dataclass
class SolverReport:
    chosen: Configuration
    classes: list
    objectives: list  # one per class
    nodes: int = 0
    wall_time: float = 0.0
    max_residuals: list = field(default_factory=list)

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "chosen": self.chosen.to_json(),
            "classes": [c.to_json() for c in self.classes],
            "objectives": list(self.objectives),
            "max_residuals": list(self.max_residuals),
            "nodes": self.nodes,
        }
        if timing:  # off by default so reports are reproducible byte for byte
            out["wall_time"] = self.wall_time
        return out

    @classmethod
    def from_json(cls, data: dict) -> SolverReport:
        def key(s):
            a, b = s.split("-")
            return (int(a), int(b))

        chosen = Configuration({key(k): int(v) for k, v in data["chosen"].items()})
        classes = []
        for c in data["classes"]:
            edges = tuple(tuple(e) for e in c["edges"])
            cands = tuple(Configuration(dict(zip(edges, signs))) for signs in c["candidates"])
            classes.append(AmbiguityClass(c["unit"], edges, tuple(c["vertices"]), cands))
        return cls(
            chosen,
            classes,
            list(data["objectives"]),
            data.get("nodes", 0),
            data.get("wall_time", 0.0),
            list(data.get("max_residuals", [])),
        )


def _bfs_tree(vertices, edges):
    """Tree edges in discovery order and the non-tree edges, rooted at min(vertices)."""
    adj = {v: [] for v in vertices}
    for e in edges:
        adj[e.i].append((e.j, e))
        adj[e.j].append((e.i, e))
    for v in adj:
        adj[v].sort(key=lambda t: t[0])
    root = min(vertices)
    seen = {root}
    tree = []  # (parent, child, edge)
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u, e in adj[v]:
            if u not in seen:
                seen.add(u)
                tree.append((v, u, e))
                queue.append(u)
    tree_keys = {e.key for _, _, e in tree}
    return root, tree, [e for e in edges if e.key not in tree_keys]


def part_objective(edges, cfg: Configuration) -> tuple[float, float]:
    """(total, max) cycle residual of ``cfg`` on one part, using the canonical BFS tree."""
    vertices = sorted({v for e in edges for v in (e.i, e.j)})
    root = min(vertices)
    z, tree, _ = propagate(edges, cfg, root, 0.0)
    tree = set(tree)
    res = [abs(z[e.j] - z[e.i] - cfg[e.key] * e.w) for e in edges if e.key not in tree]
    return (float(sum(res)), float(max(res, default=0.0)))


def solve_part(edges, tie_tol: float = 1e-9):
    """Branch and bound over one part. Returns (best config, objective, nodes)."""
    edges = sorted(edges, key=lambda e: e.key)
    vertices = sorted({v for e in edges for v in (e.i, e.j)})
    root, tree, nontree = _bfs_tree(vertices, edges)
    order = {child: k for k, (_, child, _) in enumerate(tree)}
    order[root] = -1
    # Each non-tree edge closes once both endpoints have heights.
    closes_at = [[] for _ in tree]
    for e in nontree:
        closes_at[max(order[e.i], order[e.j])].append(e)
    scale = sum(e.w for e in edges) or 1.0
    tol = tie_tol * scale

    z = {root: 0.0}
    signs = {}
    best = [float("inf")]
    optima = []
    nodes = 0

    def dfs(k: int, acc: float):
        nonlocal nodes
        nodes += 1
        if acc > best[0] + tol:
            return
        if k == len(tree):
            if acc < best[0] - tol:
                best[0] = acc
                optima.clear()
            optima.append(dict(signs))
            return
        parent, child, e = tree[k]
        for s in (-1, 1):
            signs[e.key] = s
            step = s * e.w
            z[child] = z[parent] + step if parent == e.i else z[parent] - step
            add = 0.0
            for c in closes_at[k]:
                add += abs(abs(z[c.j] - z[c.i]) - c.w)
            dfs(k + 1, acc + add)
        del signs[e.key], z[child]

    dfs(0, 0.0)
    full = []
    keys = [e.key for e in edges]
    for tree_signs in optima:
        zz, _, _ = propagate([e for _, _, e in tree], Configuration(tree_signs), root, 0.0)
        sg = dict(tree_signs)
        for e in nontree:
            sg[e.key] = 1 if zz[e.j] - zz[e.i] > 0 else -1
        full.append(Configuration(sg))
    chosen = min(full, key=lambda c: c.vector(keys))
    return chosen, best[0], nodes


def solve_configuration(g: ConfigGraph, dec: Decomposition, cycle_tol: float | None = None) -> SolverReport:
    """Best configuration per free part; bridges default to ``+1``."""
    if g.n == 0:
        raise ValueError("empty graph")
    t0 = time.perf_counter()
    if cycle_tol is None:
        cycle_tol = default_cycle_tol(g)
    chosen = {}
    classes, objectives, maxres = [], [], []
    nodes = 0
    n_core = len(g.core_edges())
    for part_keys, verts in zip(dec.part_edges, dec.free_parts):
        edges = [g.edge(*k) for k in part_keys]
        cfg, obj, n_nodes = solve_part(edges)
        nodes += n_nodes
        _, worst = part_objective(edges, cfg)
        if worst > cycle_tol:
            raise InfeasibleConfigurationError(
                f"free part {verts}: best configuration leaves cycle residual {worst:.4g} > {cycle_tol:.4g}"
            )
        chosen.update(cfg.signs)
        unit = "global" if len(part_keys) == n_core else "free_part"
        classes.append(AmbiguityClass(unit, tuple(part_keys), tuple(verts), (cfg, reverse(cfg))))
        objectives.append(obj)
        maxres.append(worst)
    for key in dec.free_edges:
        plus = Configuration({key: 1})
        chosen[key] = 1
        classes.append(AmbiguityClass("free_edge", (key,), key, (plus, reverse(plus))))
        objectives.append(0.0)
        maxres.append(0.0)
    return SolverReport(
        Configuration(chosen), classes, objectives, nodes, time.perf_counter() - t0, maxres
    )


def enumerate_candidates(report: SolverReport, limit: int = 1024) -> list[Configuration]:
    """Every way of resolving the classes; bit ``k`` of the index picks class ``k``'s candidate."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    k = len(report.classes)
    out = []
    for idx in range(min(2**k, limit)):
        signs = {}
        for c, cls in enumerate(report.classes):
            signs.update(cls.candidates[(idx >> c) & 1].signs)
        out.append(Configuration(signs))
    return out
