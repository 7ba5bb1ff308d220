import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_optima, feasible_weighted_graph, true_config
from sfsbc.errors import InfeasibleConfigurationError
from sfsbc.graph import ConfigGraph, Configuration, decompose, reverse
from sfsbc.maxcut import SolverReport, enumerate_candidates, part_objective, solve_configuration, solve_part


def _solve(g):
    return solve_configuration(g, decompose(g))


def test_bump_report_has_one_free_edge_class(bump):
    report = bump[2].report
    assert len(report.classes) == 1
    cls = report.classes[0]
    assert cls.unit == "free_edge" and cls.edges == ((0, 1),)
    assert [c[(0, 1)] for c in cls.candidates] == [1, -1]
    assert report.objectives == [0.0]


def test_consistent_triangle():
    g = ConfigGraph.from_weights(3, [(0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0)])
    report = _solve(g)
    truth = Configuration({(0, 1): 1, (0, 2): 1, (1, 2): -1})
    assert report.chosen in (truth, reverse(truth))
    assert len(report.classes) == 1 and report.classes[0].unit == "global"
    assert report.max_residuals == [0.0]


def test_two_triangles_and_a_bridge_give_eight_candidates():
    z = [0.0, 1.0, 3.0, 3.5, 5.5, 4.0]
    keys = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    g = ConfigGraph.from_weights(6, [(i, j, abs(z[j] - z[i])) for i, j in keys])
    report = _solve(g)
    assert [c.unit for c in report.classes] == ["free_part", "free_part", "free_edge"]
    cands = enumerate_candidates(report, limit=100)
    assert len(cands) == len(set(cands)) == 8
    assert true_config(g, z) in cands


def test_candidate_counts():
    g = ConfigGraph.from_weights(2, [(0, 1, 1.0)])
    assert len(enumerate_candidates(_solve(g))) == 2
    lone = ConfigGraph.from_weights(1, [])
    cands = enumerate_candidates(_solve(lone))
    assert cands == [Configuration({})]
    with pytest.raises(ValueError):
        enumerate_candidates(_solve(g), limit=0)


def test_candidate_zero_is_the_solver_pick(scenes):
    report = scenes("two_bump")[2].report
    first = enumerate_candidates(report, limit=1)[0]
    assert first == report.chosen


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_branch_and_bound_matches_exhaustive_search(seed):
    g, z = feasible_weighted_graph(np.random.default_rng(seed))
    dec = decompose(g)
    for part in dec.part_edges:
        edges = [g.edge(*k) for k in part]
        cfg, obj, _ = solve_part(edges)
        best, optima = exhaustive_optima(edges)
        assert obj == best == 0.0
        assert len(optima) == 2 and optima[1] == reverse(optima[0])
        assert cfg in optima


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_branch_and_bound_on_noisy_weights(seed):
    g, _ = feasible_weighted_graph(np.random.default_rng(seed), noise=0.2)
    for part in decompose(g).part_edges:
        edges = [g.edge(*k) for k in part]
        _, obj, _ = solve_part(edges)
        best, optima = exhaustive_optima(edges)
        assert obj == pytest.approx(best, abs=1e-12)


def test_infeasible_part_is_reported():
    g = ConfigGraph.from_weights(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.2)])
    with pytest.raises(InfeasibleConfigurationError, match="residual"):
        solve_configuration(g, decompose(g), cycle_tol=0.1)
    assert len(solve_configuration(g, decompose(g), cycle_tol=1.0).classes) == 1


def test_ten_vertex_graph_solves_quickly(rng):
    n = 10
    z = rng.uniform(-1, 1, n)
    pairs = [(i, (i + 1) % n) for i in range(n)] + [(0, 5), (2, 7)]
    g = ConfigGraph.from_weights(n, [(min(i, j), max(i, j), abs(z[j] - z[i])) for i, j in pairs])
    t0 = time.perf_counter()
    report = _solve(g)
    assert time.perf_counter() - t0 < 1.0
    assert report.chosen in (true_config(g, z), reverse(true_config(g, z)))


def test_report_json_round_trip(scenes):
    report = scenes("two_bump")[2].report
    data = report.to_json()
    assert "wall_time" not in data and "wall_time" in report.to_json(timing=True)
    back = SolverReport.from_json(data)
    assert back.chosen == report.chosen
    assert [c.candidates for c in back.classes] == [c.candidates for c in report.classes]
    assert back.to_json() == data


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_objective_is_symmetric_under_reversal(seed):
    rng = np.random.default_rng(seed)
    g, _ = feasible_weighted_graph(rng, noise=0.3)
    cfg = Configuration({e.key: int(rng.choice([-1, 1])) for e in g.edges})
    assert part_objective(g.edges, cfg) == part_objective(g.edges, reverse(cfg))
