"""Synthetic surfaces and the Lambertian (Eikonal) forward model.

Orthographic camera, light along the viewing axis, so a pixel's brightness
depends only on the slope magnitude: ``e = e_max / sqrt(1 + p^2 + q^2)``.
"""

from __future__ import annotations

import numpy as np

from .errors import BadInputError
from .fileio import read_height_csv
from .grid import GradientField, GridSpec, HeightField, IrradianceImage

DEFAULT_GRID = GridSpec(128, 128, -2.5, 2.5, -2.5, 2.5)


def _bump(X, Y, s=1.0):
    return s * X * np.exp(-(X**2) - Y**2)


def _crater(X, Y, x0, y0, amp, radius, width, tilt, phi=0.0):
    """Flat-topped ring whose crest height varies as ``1 + tilt*cos(theta - phi)``.

    The rim has one maximum and one saddle; the enclosed floor is a flat minimum.
    """
    dx, dy = X - x0, Y - y0
    r = np.maximum(np.hypot(dx, dy), 1e-12)
    ring = np.exp(-(((r - radius) / width) ** 4))
    return amp * ring * (1.0 + tilt * (np.cos(phi) * dx + np.sin(phi) * dy) / r)


def _dipole(X, Y, x0, y0, amp, rho, phi=0.0):
    """A rotated, shifted copy of the bump: one maximum and one minimum."""
    dx, dy = X - x0, Y - y0
    along = np.cos(phi) * dx + np.sin(phi) * dy
    return amp * along / rho * np.exp(-(dx * dx + dy * dy) / rho**2)


def _wave(X, Y, amp, k, half_length, width):
    """A ridge of alternating extrema along x: ``sin(k x)`` under a flat-topped envelope."""
    return amp * np.sin(k * X) * np.exp(-((X / half_length) ** 8) - (Y / width) ** 2)


# Feature lists in world coordinates (the default grid spans [-2.5, 2.5]^2).
# Craters give a free part (rim max, rim saddle, floor); dipoles give a free edge.
SILT_FEATURES = (
    ("dipole", -1.2, 0.9, 0.6, 0.65, 0.3),
    ("dipole", 1.2, -1.0, 0.45, 0.6, 2.0),
)
TWO_BUMP_FEATURES = (
    ("crater", -1.15, -1.15, 0.4, 0.7, 0.45, 0.7, 0.0),
    ("crater", 1.15, 1.15, 0.45, 0.7, 0.45, 0.6, np.pi / 2),
    ("dipole", 1.5, -1.5, 0.4, 0.5, np.pi / 4),
)
FACE_FEATURES = (
    ("crater", 0.0, 0.0, 0.4, 0.7, 0.45, 0.7, -np.pi / 2),
    ("dipole", -1.75, -1.75, 0.35, 0.5, 0.0),
    ("dipole", 1.75, -1.75, 0.35, 0.5, np.pi),
    ("dipole", 1.75, 1.75, 0.35, 0.5, np.pi / 2),
)


def _compose(X, Y, features, s=1.0):
    z = np.zeros_like(X)
    for kind, *args in features:
        z += _crater(X, Y, *args) if kind == "crater" else _dipole(X, Y, *args)
    return s * z


# Four extrema in a row: three free edges chained through shared vertices.
CHAIN_PARAMS = (0.3, 3.0, 2.0, np.sqrt(0.5))

SURFACE_KINDS = ("bump", "silt_like", "two_bump", "face_like", "chain", "csv")


def make_surface(kind: str, params=(), grid: GridSpec = DEFAULT_GRID) -> HeightField:
    """Sample an analytic test surface on ``grid``.

    ``params[0]`` is a depth scale for the analytic kinds; for ``csv`` it is
    the path of a height-field file whose dimensions must match ``grid``.
    """
    if kind == "csv":
        if not params:
            raise BadInputError("kind=csv needs a file path parameter")
        field = read_height_csv(params[0], grid)
        return field
    scale = float(params[0]) if params else 1.0
    X, Y = grid.mesh()
    if kind == "bump":
        z = _bump(X, Y, scale)
    elif kind == "silt_like":
        z = _compose(X, Y, SILT_FEATURES, scale)
    elif kind == "two_bump":
        z = _compose(X, Y, TWO_BUMP_FEATURES, scale)
    elif kind == "face_like":
        z = _compose(X, Y, FACE_FEATURES, scale)
    elif kind == "chain":
        z = scale * _wave(X, Y, *CHAIN_PARAMS)
    else:
        raise BadInputError(f"unknown surface kind {kind!r}; valid kinds: {', '.join(SURFACE_KINDS)}")
    return HeightField(grid, z)


def gradient(h: HeightField) -> GradientField:
    """Central differences inside, one-sided differences on the border."""
    g = h.grid
    q, p = np.gradient(h.z, g.hy, g.hx, edge_order=1)
    return GradientField(g, p, q)


def render_lambertian(h: HeightField, e_max: float = 1.0) -> IrradianceImage:
    if not 0.0 < e_max <= 1.0:
        raise BadInputError(f"e_max must lie in (0, 1], got {e_max}")
    gr = gradient(h)
    e = e_max / np.sqrt(gr.p * gr.p + gr.q * gr.q + 1.0)
    return IrradianceImage(h.grid, e, e_max)
