"""PGM, height-field CSV, OBJ and JSON helpers."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import BadInputError
from .grid import GridSpec, HeightField, IrradianceImage

FLOAT_FMT = "%.6g"


def fmt(x: float) -> str:
    return FLOAT_FMT % x


# -- PGM ---------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, pos = [], 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise BadInputError("malformed PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    return tokens, pos


def read_pgm(path, grid: GridSpec | None = None) -> IrradianceImage:
    """Read an 8-bit P2 or P5 file. Gray levels map linearly onto [0, 1]."""
    data = Path(path).read_bytes()
    try:
        (magic, w, h, maxval), pos = _header_tokens(data, 4)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise BadInputError(f"malformed PGM header in {path}") from exc
    if magic not in (b"P2", b"P5"):
        raise BadInputError(f"unsupported magic {magic!r}; expected P2 or P5")
    if maxval != 255:
        raise BadInputError(f"unsupported max-val {maxval}; only 8-bit (255) files are accepted")
    n = width * height
    if magic == b"P5":
        raw = data[pos + 1 : pos + 1 + n]  # exactly one whitespace byte after maxval
        if len(raw) < n:
            raise BadInputError(f"truncated PGM payload: {len(raw)} of {n} bytes")
        levels = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    else:
        try:
            values = [int(t) for t in data[pos:].split()]
        except ValueError as exc:
            raise BadInputError("non-integer sample in P2 payload") from exc
        if len(values) < n:
            raise BadInputError(f"truncated PGM payload: {len(values)} of {n} samples")
        levels = np.asarray(values[:n], dtype=np.float64)
        if levels.max() > maxval or levels.min() < 0:
            raise BadInputError("P2 sample outside [0, maxval]")
    e = levels.reshape(height, width) / maxval
    if grid is None:
        grid = GridSpec(width, height)
    elif grid.shape != e.shape:
        raise BadInputError(f"PGM is {width}x{height}, grid expects {grid.width}x{grid.height}")
    e_max = float(e.max())
    if e_max <= 0.0:
        raise BadInputError("image is entirely black")
    return IrradianceImage(grid, e, e_max)


def dequantize_top(img: IrradianceImage, levels: int = 255) -> IrradianceImage:
    """Move the brightest gray level to the centre of its half-width bin.

    A pixel at the top level stands for slopes in ``[0, ~0.063]``, not exactly
    zero. Leaving it at ``e_max`` makes flat surroundings free to cross, and
    the shortest path between two extrema then detours through them.
    """
    top = img.e >= img.e_max
    e = np.where(top, img.e_max - 0.25 / levels, img.e)
    return IrradianceImage(img.grid, e, img.e_max)


def quantize(img: IrradianceImage) -> np.ndarray:
    return np.clip(np.rint(img.e * 255.0), 0, 255).astype(np.uint8)


def write_pgm(img: IrradianceImage, path, binary: bool = True) -> None:
    levels = quantize(img)
    h, w = levels.shape
    if binary:
        Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + levels.tobytes())
    else:
        lines = [" ".join(str(v) for v in row) for row in levels]
        Path(path).write_text(f"P2\n{w} {h}\n255\n" + "\n".join(lines) + "\n")


# -- height-field CSV ---------------------------------------------------------


def write_height_csv(field: HeightField, path) -> None:
    g = field.grid
    header = "# %d %d %s %s %s %s" % (
        g.width, g.height, fmt(g.x_min), fmt(g.x_max), fmt(g.y_min), fmt(g.y_max)
    )
    rows = [",".join(fmt(v) for v in row) for row in field.z]
    Path(path).write_text(header + "\n" + "\n".join(rows) + "\n")


def read_height_csv(path, grid: GridSpec | None = None) -> HeightField:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise BadInputError(f"{path}: missing '# width height x_min x_max y_min y_max' header")
    parts = lines[0][1:].split()
    try:
        width, height = int(parts[0]), int(parts[1])
        extents = [float(v) for v in parts[2:6]]
    except (ValueError, IndexError) as exc:
        raise BadInputError(f"{path}: malformed header") from exc
    if len(extents) != 4:
        raise BadInputError(f"{path}: header needs six fields")
    try:
        z = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln.strip()])
    except ValueError as exc:
        raise BadInputError(f"{path}: non-numeric entry") from exc
    if z.shape != (height, width):
        raise BadInputError(f"{path}: header says {width}x{height}, data is {z.shape[1] if z.ndim == 2 else '?'}x{len(z)}")
    file_grid = GridSpec(width, height, *extents)
    if grid is not None and grid.shape != file_grid.shape:
        raise BadInputError(f"{path}: dimensions {width}x{height} do not match requested grid")
    return HeightField(file_grid, z)


# -- OBJ ----------------------------------------------------------------------


def export_obj(field: HeightField, path) -> None:
    """Write an ASCII OBJ mesh: one vertex per node, two triangles per cell."""
    g = field.grid
    X, Y = g.mesh()
    h, w = g.shape
    out = [f"# {w}x{h} height field"]
    for x, y, z in zip(X.ravel(), Y.ravel(), field.z.ravel()):
        out.append(f"v {fmt(x)} {fmt(y)} {fmt(z)}")
    for i in range(h - 1):
        for j in range(w - 1):
            a = i * w + j + 1
            b, c, d = a + 1, a + w, a + w + 1
            out.append(f"f {a} {b} {d}")
            out.append(f"f {a} {d} {c}")
    try:
        Path(path).write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise BadInputError(f"cannot write {path}: {exc}") from exc


# -- JSON ---------------------------------------------------------------------


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dump_json(obj, path) -> None:
    """Deterministic JSON: sorted keys, floats rounded to 6 significant digits."""
    Path(path).write_text(json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n")


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise BadInputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise BadInputError(f"{path}: malformed JSON ({exc})") from exc
