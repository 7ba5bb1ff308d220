import numpy as np
import pytest

from sfsbc import pipeline
from sfsbc.anchors import BCAnchor


def true_signs(graph, truth):
    """Sign of every core edge as read off the true surface."""
    out = {}
    for e in graph.core_edges():
        dz = truth.at(graph.vertices[e.j].pixel) - truth.at(graph.vertices[e.i].pixel)
        out[e.key] = 1 if dz > 0 else -1
    return out


@pytest.fixture(scope="session")
def scenes():
    """Rendered image, truth and analysis per named scene, computed once."""
    cache = {}

    def get(name):
        if name not in cache:
            scene = pipeline.get_scene(name)
            img, truth = scene.image(), scene.surface()
            cache[name] = (img, truth, pipeline.analyze(img))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def bump(scenes):
    return scenes("bump")


def border_anchors(truth, picks):
    border = truth.grid.border_pixels()
    return [BCAnchor(border[k], truth.at(border[k])) for k in picks]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
