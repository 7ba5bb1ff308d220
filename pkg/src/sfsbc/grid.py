"""Grid and field containers shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadInputError


@dataclass(frozen=True)
class GridSpec:
    """Regular grid. Row ``i`` sits at ``y_min + i*hy``, column ``j`` at ``x_min + j*hx``."""

    width: int
    height: int
    x_min: float = -2.5
    x_max: float = 2.5
    y_min: float = -2.5
    y_max: float = 2.5

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise BadInputError(f"grid must be at least 2x2, got {self.width}x{self.height}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise BadInputError("grid extents must be increasing")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.width - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.height - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.width)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.height)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """World coordinates ``(X, Y)``, each of shape ``(height, width)``."""
        return np.meshgrid(self.xs(), self.ys())

    def world(self, pixel) -> tuple[float, float]:
        i, j = pixel
        return (self.x_min + j * self.hx, self.y_min + i * self.hy)

    def nearest_pixel(self, x: float, y: float) -> tuple[int, int]:
        j = int(round((x - self.x_min) / self.hx))
        i = int(round((y - self.y_min) / self.hy))
        return (min(max(i, 0), self.height - 1), min(max(j, 0), self.width - 1))

    def contains(self, pixel) -> bool:
        i, j = pixel
        return 0 <= i < self.height and 0 <= j < self.width

    def border_pixels(self) -> list[tuple[int, int]]:
        """Border pixels in clockwise order starting at the origin corner."""
        h, w = self.shape
        out = [(0, j) for j in range(w)]
        out += [(i, w - 1) for i in range(1, h)]
        out += [(h - 1, j) for j in range(w - 2, -1, -1)]
        out += [(i, 0) for i in range(h - 2, 0, -1)]
        return out


def _check_shape(grid: GridSpec, arr: np.ndarray, name: str) -> None:
    if arr.shape != grid.shape:
        raise BadInputError(f"{name} has shape {arr.shape}, grid expects {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise BadInputError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class HeightField:
    grid: GridSpec
    z: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.z, "height field")

    def __neg__(self) -> HeightField:
        return HeightField(self.grid, -self.z)

    def shifted(self, c: float) -> HeightField:
        return HeightField(self.grid, self.z + c)

    def depth_range(self) -> float:
        return float(self.z.max() - self.z.min())

    def at(self, pixel) -> float:
        return float(self.z[pixel[0], pixel[1]])


@dataclass(frozen=True)
class GradientField:
    grid: GridSpec
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.p, "p")
        _check_shape(self.grid, self.q, "q")


@dataclass(frozen=True)
class IrradianceImage:
    grid: GridSpec
    e: np.ndarray
    e_max: float = field(default=1.0)

    def __post_init__(self):
        _check_shape(self.grid, self.e, "image")
        if not 0.0 < self.e_max <= 1.0:
            raise BadInputError(f"e_max must lie in (0, 1], got {self.e_max}")
        if self.e.min() < 0.0 or self.e.max() > self.e_max + 1.0 / 255:
            raise BadInputError("image brightness outside [0, e_max]")

    def brightness(self, pixel) -> float:
        return float(self.e[pixel[0], pixel[1]])
