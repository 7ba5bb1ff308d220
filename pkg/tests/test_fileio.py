import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sfsbc.errors import BadInputError
from sfsbc.fileio import (
    dequantize_top,
    dump_json,
    export_obj,
    load_json,
    read_height_csv,
    read_pgm,
    write_height_csv,
    write_pgm,
)
from sfsbc.grid import GridSpec, HeightField, IrradianceImage


def test_p2_levels_map_linearly(tmp_path):
    f = tmp_path / "a.pgm"
    f.write_text("P2\n# comment\n2 2\n255\n0 255\n128 64\n")
    img = read_pgm(f)
    np.testing.assert_array_equal(img.e, [[0, 1.0], [128 / 255, 64 / 255]])
    assert img.e_max == 1.0


def test_p2_reader_on_3x3(tmp_path):
    f = tmp_path / "a.pgm"
    f.write_text("P2\n3 3\n# inline comment\n255\n0 255 128\n64 1 2\n3 4 5\n")
    img = read_pgm(f)
    assert img.e.shape == (3, 3)
    assert img.e[0, 1] == 1.0 and img.e[0, 2] == 128 / 255 and img.e[1, 0] == 64 / 255


def _image(rng, h=5, w=7):
    e = rng.uniform(0.05, 1.0, size=(h, w))
    e[0, 0] = 1.0
    return IrradianceImage(GridSpec(w, h), e, 1.0)


def test_p5_and_p2_agree(tmp_path, rng):
    img = _image(rng)
    write_pgm(img, tmp_path / "b.pgm", binary=True)
    write_pgm(img, tmp_path / "t.pgm", binary=False)
    assert (tmp_path / "b.pgm").read_bytes().startswith(b"P5")
    assert (tmp_path / "t.pgm").read_bytes().startswith(b"P2")
    np.testing.assert_array_equal(read_pgm(tmp_path / "b.pgm").e, read_pgm(tmp_path / "t.pgm").e)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 6), elements=st.floats(0.0, 1.0)))
def test_pgm_round_trip_within_half_step(tmp_path_factory, e):
    e = e.copy()
    e[0, 0] = 1.0
    img = IrradianceImage(GridSpec(6, 4), e, 1.0)
    path = tmp_path_factory.mktemp("pgm") / "x.pgm"
    write_pgm(img, path)
    back = read_pgm(path)
    assert np.max(np.abs(back.e - e)) <= 1 / 510 + 1e-12


@pytest.mark.parametrize(
    "content, match",
    [
        (b"P6\n3 3\n255\n" + bytes(27), "magic"),
        (b"P5\n3 3\n65535\n" + bytes(18), "max-val"),
        (b"P5\n3 3\n255\n" + bytes(4), "truncated"),
        (b"P2\n3 3\n255\n1 2 3\n", "truncated"),
        (b"P2\n3 x\n255\n", "header"),
        (b"P5\n3 3\n255\n" + bytes(9), "black"),
    ],
)
def test_pgm_errors(tmp_path, content, match):
    f = tmp_path / "bad.pgm"
    f.write_bytes(content)
    with pytest.raises(BadInputError, match=match):
        read_pgm(f)


def test_dequantize_top_only_touches_top_level(rng):
    img = _image(rng)
    out = dequantize_top(img)
    top = img.e >= img.e_max
    assert np.all(out.e[top] == img.e_max - 0.25 / 255)
    np.testing.assert_array_equal(out.e[~top], img.e[~top])


def test_height_csv_round_trip(tmp_path, rng):
    grid = GridSpec(6, 4, -1.0, 2.0, 0.5, 3.0)
    z = rng.normal(size=grid.shape)
    write_height_csv(HeightField(grid, z), tmp_path / "h.csv")
    back = read_height_csv(tmp_path / "h.csv")
    assert back.grid == grid
    np.testing.assert_allclose(back.z, z, rtol=1e-5, atol=1e-12)


def test_height_csv_errors(tmp_path):
    f = tmp_path / "h.csv"
    f.write_text("1,2,3\n")
    with pytest.raises(BadInputError, match="header"):
        read_height_csv(f)
    f.write_text("# 3 3 -1 1 -1 1\n1,2,3\n4,5,6\n")
    with pytest.raises(BadInputError, match="3x3"):
        read_height_csv(f)
    f.write_text("# 3 3 -1 1 -1 1\n1,2,3\n4,a,6\n7,8,9\n")
    with pytest.raises(BadInputError, match="non-numeric"):
        read_height_csv(f)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_obj_counts_and_orientation(tmp_path, n):
    grid = GridSpec(n, n, 0.0, 1.0, 0.0, 1.0)
    export_obj(HeightField(grid, np.zeros(grid.shape)), tmp_path / "m.obj")
    lines = (tmp_path / "m.obj").read_text().splitlines()
    verts = [list(map(float, ln.split()[1:])) for ln in lines if ln.startswith("v ")]
    faces = [list(map(int, ln.split()[1:])) for ln in lines if ln.startswith("f ")]
    assert len(verts) == n * n and len(faces) == 2 * (n - 1) ** 2
    v = np.array(verts)
    area = 0.0
    for a, b, c in faces:
        cross = np.cross(v[b - 1] - v[a - 1], v[c - 1] - v[a - 1])
        assert cross[2] > 0  # every triangle faces +z on a flat field
        area += 0.5 * cross[2]
    assert area == pytest.approx(1.0)


def test_json_is_deterministic(tmp_path):
    obj = {"b": [1.0 / 3.0, 2], "a": {"y": 0.1 + 0.2, "x": None}}
    dump_json(obj, tmp_path / "one.json")
    dump_json(dict(reversed(list(obj.items()))), tmp_path / "two.json")
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
    assert load_json(tmp_path / "one.json")["b"][0] == 0.333333


def test_load_json_errors(tmp_path):
    with pytest.raises(BadInputError, match="no such file"):
        load_json(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(BadInputError, match="malformed"):
        load_json(tmp_path / "bad.json")
    assert json.loads("[]") == []
