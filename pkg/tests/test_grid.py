import numpy as np
import pytest

from sfsbc.errors import BadInputError
from sfsbc.grid import GridSpec, HeightField, IrradianceImage


def test_spacing_and_world_coordinates():
    g = GridSpec(5, 3, 0.0, 4.0, -1.0, 1.0)
    assert (g.hx, g.hy) == (1.0, 1.0)
    assert g.shape == (3, 5)
    assert g.world((2, 4)) == (4.0, 1.0)
    assert g.nearest_pixel(2.4, 0.1) == (1, 2)
    assert g.nearest_pixel(99.0, -99.0) == (0, 4)


def test_border_pixels_visit_each_border_pixel_once():
    g = GridSpec(6, 4)
    border = g.border_pixels()
    assert len(border) == len(set(border)) == 2 * (6 + 4) - 4
    assert all(i in (0, 3) or j in (0, 5) for i, j in border)


@pytest.mark.parametrize("args", [(1, 5), (5, 1), (4, 4, 1.0, 1.0), (4, 4, 0.0, 1.0, 2.0, 1.0)])
def test_bad_grids(args):
    with pytest.raises(BadInputError):
        GridSpec(*args)


def test_field_validation():
    g = GridSpec(3, 3)
    with pytest.raises(BadInputError, match="shape"):
        HeightField(g, np.zeros((2, 3)))
    with pytest.raises(BadInputError, match="non-finite"):
        HeightField(g, np.full((3, 3), np.nan))
    with pytest.raises(BadInputError, match="e_max"):
        IrradianceImage(g, np.ones((3, 3)), 1.5)
    with pytest.raises(BadInputError, match="outside"):
        IrradianceImage(g, np.full((3, 3), -0.1))


def test_height_field_helpers():
    h = HeightField(GridSpec(3, 3), np.arange(9.0).reshape(3, 3))
    assert h.depth_range() == 8.0
    assert (-h).at((1, 1)) == -4.0
    assert h.shifted(2.0).at((0, 0)) == 2.0
