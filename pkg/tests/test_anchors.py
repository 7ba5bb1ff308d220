import json
import random

import numpy as np
import pytest

from conftest import border_anchors, true_signs
from sfsbc import pipeline
from sfsbc.anchors import (
    BCAnchor,
    augment_graph,
    load_anchors,
    parse_anchors,
    resolve_ambiguity,
    resolve_details,
)
from sfsbc.errors import BadInputError, InconsistentAnchorsError, UnresolvedAmbiguityError
from sfsbc.graph import ConfigGraph, Edge, build_graph, decompose
from sfsbc.grid import GridSpec
from sfsbc.maxcut import solve_configuration
from sfsbc.singular import SingularPoint


def abstract(core_n, core_edges, anchors):
    """Augmented graph with hand-made anchor links: ``anchors`` is [(depth, {vertex: weight})]."""
    core = ConfigGraph.from_weights(core_n, core_edges)
    report = solve_configuration(core, decompose(core))
    verts = list(core.vertices)
    edges = list(core.edges)
    depth = {}
    for depth_a, links in anchors:
        vid = len(verts)
        verts.append(SingularPoint(vid, (1, vid), 1.0, "anchor"))
        depth[vid] = depth_a
        edges += [Edge(v, vid, w, anchor=True) for v, w in links.items()]
    return ConfigGraph(verts, edges, depth), report


# -- parsing ------------------------------------------------------------------------


def test_load_one_anchor(tmp_path):
    f = tmp_path / "a.json"
    f.write_text('[{"row":5,"col":5,"depth":0.0}]')
    assert load_anchors(f) == [BCAnchor((5, 5), 0.0)]


def test_equal_depths_are_accepted_by_the_parser():
    assert len(parse_anchors([{"row": 1, "col": 1, "depth": 0.0}, {"row": 2, "col": 2, "depth": 0.0}])) == 2


@pytest.mark.parametrize(
    "data, match",
    [
        ([], "empty"),
        ({"row": 1}, "list"),
        ([{"row": 1, "depth": 0.0}], "row"),
        ([{"row": 1.5, "col": 1, "depth": 0.0}], "integers"),
        ([{"row": True, "col": 1, "depth": 0.0}], "integers"),
        ([{"row": 1, "col": 1, "depth": "deep"}], "depth"),
        ([{"row": 1, "col": 1, "depth": float("nan")}], "finite"),
        ([{"row": 1, "col": 1, "depth": 0}, {"row": 1, "col": 1, "depth": 1}], "duplicate"),
        ([{"row": -1, "col": 1, "depth": 0}], "outside"),
        ([{"row": 9, "col": 1, "depth": 0}], "outside"),
    ],
)
def test_parse_errors(data, match):
    with pytest.raises(BadInputError, match=match):
        parse_anchors(data, GridSpec(9, 9))


def test_anchor_json_round_trip():
    a = BCAnchor((3, 4), -1.25, "rim")
    assert parse_anchors(json.loads(json.dumps([a.to_json()]))) == [a]


# -- augmentation ---------------------------------------------------------------------


def test_bump_with_two_anchors(bump):
    img, truth, an = bump
    g = augment_graph(an.graph, an.dec, border_anchors(truth, [0, 200]), img)
    assert g.n == 4
    assert len(g.core_edges()) == 1 and len(g.edges) == 5
    assert sorted(g.anchor_depth) == [2, 3]


def test_single_vertex_gets_one_anchor_edge(bump):
    img, truth, an = bump
    g = build_graph(img, an.points[:1])
    aug = augment_graph(g, decompose(g), [BCAnchor((10, 10), 0.0)], img)
    assert aug.n == 2 and [(e.key, e.anchor) for e in aug.edges] == [((0, 1), True)]


def test_augment_needs_anchors(bump):
    img, _, an = bump
    with pytest.raises(BadInputError):
        augment_graph(an.graph, an.dec, [], img)
    with pytest.raises(BadInputError, match="outside"):
        augment_graph(an.graph, an.dec, [BCAnchor((500, 0), 0.0)], img)


# -- resolution -----------------------------------------------------------------------


def test_anchors_matching_candidate_zero_exactly():
    # candidate 0 of a lone edge is +: z0 = 0, z1 = 1
    g, report = abstract(2, [(0, 1, 1.0)], [(-0.5, {0: 0.5, 1: 1.5}), (2.0, {0: 2.0, 1: 1.0})])
    res = resolve_details(g, report)
    assert res.choices == [0]
    assert res.discrepancies[0][0] == 0.0 and res.discrepancies[0][1] > 0.5


def test_anchors_matching_the_reverse():
    g, report = abstract(2, [(0, 1, 1.0)], [(0.5, {0: 0.5, 1: 1.5}), (-2.0, {0: 2.0, 1: 1.0})])
    assert resolve_ambiguity(g, report)[(0, 1)] == -1


def test_one_anchor_suffices_next_to_a_resolved_neighbour():
    # path 0 - 1 - 2 with heights 0, 1, 3; anchors 4 and 5 only see the first edge, anchor 6 only the second
    anchors = [(-1.0, {0: 1.0, 1: 2.0}), (1.5, {0: 1.5, 1: 0.5}), (4.0, {1: 3.0, 2: 1.0})]
    g, report = abstract(3, [(0, 1, 1.0), (1, 2, 2.0)], anchors)
    res = resolve_details(g, report)
    assert res.order == [0, 1]
    assert res.config.signs == {(0, 1): 1, (1, 2): 1}
    assert res.heights[2] == pytest.approx(3.0)


def test_single_anchor_without_a_neighbour_is_unresolved():
    g, report = abstract(2, [(0, 1, 1.0)], [(0.0, {0: 1.0, 1: 2.0})])
    with pytest.raises(UnresolvedAmbiguityError, match="unresolved ambiguity.*only one anchor"):
        resolve_details(g, report)


def test_class_without_anchor_is_unresolved():
    g, report = abstract(4, [(0, 1, 1.0), (2, 3, 1.0)], [(0.0, {0: 1.0, 1: 2.0}), (1.0, {0: 2.0, 1: 3.0})])
    with pytest.raises(UnresolvedAmbiguityError, match=r"class 1 .*no anchor is attached"):
        resolve_details(g, report)


def test_equal_depth_anchors_are_rejected(bump):
    img, truth, an = bump
    anchors = [BCAnchor((0, 0), 0.0), BCAnchor((127, 127), 0.0)]
    with pytest.raises(UnresolvedAmbiguityError, match="same depth"):
        pipeline.run(img, anchors, analysis=an)


def test_inconsistent_anchors():
    g, report = abstract(2, [(0, 1, 1.0)], [(0.0, {0: 0.1, 1: 1.1}), (5.0, {0: 0.2, 1: 1.2})])
    with pytest.raises(InconsistentAnchorsError, match="misses"):
        resolve_details(g, report)
    assert resolve_details(g, report, accept_tol=100.0).choices in ([0], [1])


def test_bump_resolves_to_the_true_sign(bump):
    img, truth, an = bump
    anchors = pipeline.anchors_from_truth(truth, an)
    out = pipeline.run(img, anchors, analysis=an)
    assert out.config.signs == true_signs(an.graph, truth)
    assert out.resolution.order == [0]


def test_anchor_order_does_not_matter(scenes):
    img, truth, an = scenes("face_like")
    anchors = pipeline.anchors_from_truth(truth, an)
    ref = pipeline.run(img, anchors, analysis=an).config
    shuffled = list(anchors)
    random.Random(7).shuffle(shuffled)
    assert pipeline.run(img, shuffled, analysis=an).config == ref
    assert ref.signs == true_signs(an.graph, truth)


def test_negated_truth_flips_every_class(scenes):
    img, truth, an = scenes("face_like")
    anchors = pipeline.anchors_from_truth(truth, an)
    mirrored = [BCAnchor(a.pixel, -a.depth, a.label) for a in anchors]
    a = pipeline.run(img, anchors, analysis=an).config
    b = pipeline.run(img, mirrored, analysis=an).config
    assert all(b[k] == -s for k, s in a.signs.items())


def _chain_anchors(truth, an):
    six = pipeline.anchors_from_truth(truth, an)  # two per class, in class order
    return six[0:2] + [six[2], six[4]]


def test_chain_resolves_with_four_anchors(scenes):
    img, truth, an = scenes("chain")
    assert len(an.report.classes) == 3
    out = pipeline.run(img, _chain_anchors(truth, an), analysis=an)
    assert out.config.signs == true_signs(an.graph, truth)
    assert sorted(out.resolution.order) == [0, 1, 2]


def test_chain_with_one_anchor_fails_clearly(scenes):
    img, truth, an = scenes("chain")
    with pytest.raises(UnresolvedAmbiguityError, match="unresolved ambiguity") as err:
        pipeline.run(img, _chain_anchors(truth, an)[:1], analysis=an)
    assert "two anchors of different depth" in str(err.value)


def test_resolved_neighbour_without_a_reaching_anchor():
    anchors = [(-1.0, {0: 1.0, 1: 2.0}), (1.5, {0: 1.5, 1: 0.5})]
    g, report = abstract(3, [(0, 1, 1.0), (1, 2, 2.0)], anchors)
    with pytest.raises(UnresolvedAmbiguityError, match="no anchor reaches its other vertices"):
        resolve_details(g, report)
