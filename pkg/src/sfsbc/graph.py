"""Singular-point configuration graph, its decomposition, and height integration.

Edges join singular points whose shortest Eikonal path is monotone in depth;
the weight is the altitude difference. A configuration assigns each edge a
sign: ``+1`` means depth increases from the lower-id vertex to the higher-id one.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .eikonal import (
    DEFAULT_EPS_SING,
    GridPath,
    fmm_distance,
    is_monotone,
    slowness_from_image,
    trace_path,
)
from .errors import InfeasibleConfigurationError
from .fileio import fmt
from .grid import IrradianceImage
from .singular import SingularPoint


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    w: float
    path: GridPath | None = field(default=None, repr=False, compare=False)
    anchor: bool = False

    def __post_init__(self):
        if not self.i < self.j:
            raise ValueError(f"edge endpoints must be ordered, got ({self.i}, {self.j})")
        if self.w < 0:
            raise ValueError("edge weight must be non-negative")

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)


@dataclass
class ConfigGraph:
    vertices: list[SingularPoint]
    edges: list[Edge]
    anchor_depth: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        self.edges = sorted(self.edges, key=lambda e: e.key)
        keys = [e.key for e in self.edges]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate edge")
        n = len(self.vertices)
        self.adj: dict[int, list[tuple[int, Edge]]] = {v: [] for v in range(n)}
        for e in self.edges:
            if e.j >= n:
                raise ValueError(f"edge {e.key} references a missing vertex")
            self.adj[e.i].append((e.j, e))
            self.adj[e.j].append((e.i, e))
        for v in self.adj:
            self.adj[v].sort(key=lambda t: t[0])
        self._by_key = {e.key: e for e in self.edges}

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge(self, a: int, b: int) -> Edge:
        return self._by_key[(min(a, b), max(a, b))]

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self._by_key

    def neighbors(self, v: int) -> list[int]:
        return [u for u, _ in self.adj[v]]

    def is_anchor(self, v: int) -> bool:
        return v in self.anchor_depth

    def core_edges(self) -> list[Edge]:
        return [e for e in self.edges if not e.anchor]

    def components(self) -> list[list[int]]:
        seen, out = set(), []
        for v in range(self.n):
            if v in seen:
                continue
            comp, queue = [], deque([v])
            seen.add(v)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for x in self.neighbors(u):
                    if x not in seen:
                        seen.add(x)
                        queue.append(x)
            out.append(sorted(comp))
        return out

    @classmethod
    def from_weights(cls, n: int, weighted_edges) -> ConfigGraph:
        """Abstract graph (no image) from ``(i, j, w)`` triples; used by tests and tools."""
        verts = [SingularPoint(k, (0, k), 1.0, "unknown") for k in range(n)]
        edges = [Edge(min(i, j), max(i, j), float(w)) for i, j, w in weighted_edges]
        return cls(verts, edges)


@dataclass(frozen=True)
class Configuration:
    signs: dict  # (i, j) -> +1 / -1

    def __post_init__(self):
        for k, s in self.signs.items():
            if s not in (1, -1):
                raise ValueError(f"edge {k} has sign {s}; signs are +1 or -1")

    def __getitem__(self, key) -> int:
        return self.signs[key]

    def __len__(self):
        return len(self.signs)

    def __eq__(self, other):
        return isinstance(other, Configuration) and self.signs == other.signs

    def __hash__(self):
        return hash(tuple(sorted(self.signs.items())))

    def vector(self, keys=None) -> tuple[int, ...]:
        keys = sorted(self.signs) if keys is None else keys
        return tuple(self.signs[k] for k in keys)

    def restricted(self, keys) -> Configuration:
        return Configuration({k: self.signs[k] for k in keys})

    def merged(self, other: Configuration) -> Configuration:
        return Configuration({**self.signs, **other.signs})

    def to_json(self) -> dict:
        return {f"{i}-{j}": s for (i, j), s in sorted(self.signs.items())}


def reverse(cfg: Configuration) -> Configuration:
    return Configuration({k: -s for k, s in cfg.signs.items()})


# -- construction --------------------------------------------------------------


def build_graph(
    img: IrradianceImage,
    points: list[SingularPoint],
    eps_sing: float = DEFAULT_EPS_SING,
    swap: bool = False,
    workers: int = 1,
    slowness=None,
) -> ConfigGraph:
    """Connect every pair of singular points whose shortest path is monotone.

    One fast-marching run per source vertex; by default the lower id is the
    source (``swap=True`` marches from the higher id instead). An edge is kept
    when the backtraced path is monotone; its weight is the marched distance.
    """
    if not points:
        raise ValueError("need at least one singular point")
    s = slowness if slowness is not None else slowness_from_image(img, eps_sing)
    regions = [p.region or frozenset([p.pixel]) for p in points]
    n = len(points)

    def edges_from(src: int) -> list[Edge]:
        targets = [t for t in range(n) if (t < src if swap else t > src)]
        if not targets:
            return []
        dist = fmm_distance(s, points[src].pixel)
        out = []
        for t in targets:
            w = dist.at(points[t].pixel)
            if not np.isfinite(w):
                continue
            path = trace_path(dist, points[t].pixel)
            if not is_monotone(path, img, regions, eps_sing):
                continue
            out.append(Edge(min(src, t), max(src, t), w, path))
        return out

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(edges_from, range(n)))
    else:
        chunks = [edges_from(v) for v in range(n)]
    return ConfigGraph(list(points), [e for c in chunks for e in c])


# -- decomposition --------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    free_edges: list[tuple[int, int]]
    free_parts: list[tuple[int, ...]]  # vertex sets
    part_edges: list[tuple[tuple[int, int], ...]]
    adjacency: list[tuple[int, int]]  # unit pairs sharing a vertex; units = parts then bridges

    def units(self) -> list[tuple[str, tuple[tuple[int, int], ...]]]:
        return [("free_part", es) for es in self.part_edges] + [("free_edge", (e,)) for e in self.free_edges]


def _blocks(g: ConfigGraph, edge_list):
    """Biconnected components (as edge lists) via Hopcroft-Tarjan, iterative DFS."""
    adj = {v: [] for v in range(g.n)}
    for a, b in edge_list:
        adj[a].append(b)
        adj[b].append(a)
    for v in adj:
        adj[v].sort()
    disc, low = {}, {}
    blocks, stack = [], []
    counter = 0
    for root in range(g.n):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        work = [(root, -1, iter(adj[root]))]
        while work:
            v, parent, it = work[-1]
            advanced = False
            for u in it:
                if u not in disc:
                    disc[u] = low[u] = counter
                    counter += 1
                    stack.append((min(v, u), max(v, u)))
                    work.append((u, v, iter(adj[u])))
                    advanced = True
                    break
                if u != parent and disc[u] < disc[v]:
                    stack.append((min(v, u), max(v, u)))
                    low[v] = min(low[v], disc[u])
            if advanced:
                continue
            work.pop()
            if parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    key = (min(parent, v), max(parent, v))
                    block = []
                    while True:
                        e = stack.pop()
                        block.append(e)
                        if e == key:
                            break
                    blocks.append(sorted(block))
    return blocks


def decompose(g: ConfigGraph, include_anchor_edges: bool = False) -> Decomposition:
    """Split the graph into free edges (bridges) and free parts (blocks with a cycle)."""
    edge_list = [e.key for e in g.edges if include_anchor_edges or not e.anchor]
    blocks = _blocks(g, edge_list)
    bridges = sorted(b[0] for b in blocks if len(b) == 1)
    parts = sorted((tuple(b) for b in blocks if len(b) > 1), key=lambda b: b[0])
    part_vertices = [tuple(sorted({v for e in b for v in e})) for b in parts]
    unit_vertices = [set(pv) for pv in part_vertices] + [set(e) for e in bridges]
    adjacency = [
        (a, b) for a, b in combinations(range(len(unit_vertices)), 2) if unit_vertices[a] & unit_vertices[b]
    ]
    return Decomposition(bridges, part_vertices, parts, adjacency)


# -- heights ----------------------------------------------------------------------


@dataclass(frozen=True)
class HeightAssignment:
    z: dict  # vertex -> depth
    residual: float
    tree_edges: tuple = ()

    def __getitem__(self, v):
        return self.z[v]


def propagate(edges, cfg: Configuration, root: int, z_root: float = 0.0):
    """BFS spanning tree over ``edges`` from ``root``; returns heights, tree keys, residual.

    Neighbours are visited in increasing id order, so the tree is deterministic.
    """
    adj: dict[int, list[tuple[int, tuple[int, int], float]]] = {}
    for e in edges:
        adj.setdefault(e.i, []).append((e.j, e.key, e.w))
        adj.setdefault(e.j, []).append((e.i, e.key, e.w))
    for v in adj:
        adj[v].sort()
    z = {root: z_root}
    tree = []
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u, key, w in adj.get(v, ()):
            if u in z:
                continue
            step = cfg[key] * w
            z[u] = z[v] + step if v == key[0] else z[v] - step
            tree.append(key)
            queue.append(u)
    tree_set = set(tree)
    residual = 0.0
    for e in edges:
        if e.key in tree_set or e.i not in z:
            continue
        residual = max(residual, abs(z[e.j] - z[e.i] - cfg[e.key] * e.w))
    return z, tuple(tree), residual


def default_cycle_tol(g: ConfigGraph) -> float:
    ws = [e.w for e in g.edges]
    return 0.1 * float(np.mean(ws)) if ws else 0.0


def integrate_heights(
    g: ConfigGraph, cfg: Configuration, root: int = 0, z_root: float = 0.0, cycle_tol: float | None = None
) -> HeightAssignment:
    """Propagate ``z_j = z_i + d_ij * w_ij`` along a BFS tree of the root's component."""
    missing = [e.key for e in g.edges if e.key not in cfg.signs]
    if missing:
        raise ValueError(f"configuration does not cover edges {missing}")
    if cycle_tol is None:
        cycle_tol = default_cycle_tol(g)
    z, tree, residual = propagate(g.edges, cfg, root, z_root)
    if residual > cycle_tol:
        raise InfeasibleConfigurationError(
            f"cycle residual {residual:.4g} exceeds tolerance {cycle_tol:.4g}"
        )
    return HeightAssignment(z, residual, tree)


# -- DOT ----------------------------------------------------------------------------


def to_dot(g: ConfigGraph, cfg: Configuration | None = None) -> str:
    lines = ["graph G {", "  node [shape=ellipse];"]
    for v, p in enumerate(g.vertices):
        label = f"p{v} ({p.pixel[0]},{p.pixel[1]})"
        if g.is_anchor(v):
            lines.append(f'  {v} [label="a{v} ({p.pixel[0]},{p.pixel[1]}) z={fmt(g.anchor_depth[v])}", shape=box];')
        else:
            lines.append(f'  {v} [label="{label}"];')
    for e in g.edges:
        label = f"{e.w:.3f}"
        if cfg is not None and e.key in cfg.signs:
            label += " " + ("+" if cfg[e.key] > 0 else "-")
        style = ", style=dashed" if e.anchor else ""
        lines.append(f'  {e.i} -- {e.j} [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
