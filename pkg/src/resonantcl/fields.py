"""Uniform square-cell grids, cell-centred fields and piecewise-constant data."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "Grid2D",
    "ScalarField2D",
    "Block",
    "PiecewiseConstantCoeff",
    "rasterize",
    "total_variation",
    "coarsen",
    "write_snapshot",
    "read_snapshot",
]

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid2D:
    """Cell-centred grid on ``[x_min, x_max] x [y_min, y_max]`` with square cells."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < MIN_CELLS or self.ny < MIN_CELLS:
            raise ValueError(f"grid needs at least {MIN_CELLS} cells per direction")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("empty domain")
        hx = (self.x_max - self.x_min) / self.nx
        hy = (self.y_max - self.y_min) / self.ny
        if abs(hx - hy) > 1e-12 * max(hx, hy):
            raise ValueError(f"cells must be square (hx={hx}, hy={hy})")

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "Grid2D":
        return cls(lo, hi, lo, hi, n, n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.h

    @property
    def y(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def refined(self, factor: int = 2) -> "Grid2D":
        return Grid2D(self.x_min, self.x_max, self.y_min, self.y_max,
                      self.nx * factor, self.ny * factor)

    def same_as(self, other: "Grid2D") -> bool:
        return self == other


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """Cell values on a :class:`Grid2D`; ``values[i, j]`` sits at ``(x[i], y[j])``."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> "ScalarField2D":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "ScalarField2D":
        X, Y = grid.mesh()
        return cls(grid, np.broadcast_to(fn(X, Y), grid.shape).astype(float))

    def with_values(self, values) -> "ScalarField2D":
        return ScalarField2D(self.grid, values)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.h ** 2)

    def l1_distance(self, other: "ScalarField2D") -> float:
        _require_same_grid(self, other)
        return float(np.abs(self.values - other.values).sum() * self.grid.h ** 2)


def _require_same_grid(*fields: ScalarField2D):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields live on different grids")


@dataclass(frozen=True)
class Block:
    """Axis-aligned rectangle ``[x0, x1) x [y0, y1)`` carrying a value."""

    x0: float
    x1: float
    y0: float
    y1: float
    value: float

    def contains(self, x, y):
        return (x >= self.x0) & (x < self.x1) & (y >= self.y0) & (y < self.y1)


@dataclass(frozen=True)
class PiecewiseConstantCoeff:
    """Background value overwritten, in order, by a list of blocks (later blocks win)."""

    background: float
    blocks: tuple[Block, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(
            b if isinstance(b, Block) else Block(*b) for b in self.blocks))

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.full(x.shape, float(self.background))
        for blk in self.blocks:
            out[blk.contains(x, y)] = blk.value
        return out

    @property
    def value_range(self) -> tuple[float, float]:
        vals = [self.background] + [b.value for b in self.blocks]
        return min(vals), max(vals)

    def within(self, lo: float, hi: float) -> bool:
        vmin, vmax = self.value_range
        return lo <= vmin and vmax <= hi


def rasterize(coeff, grid: Grid2D) -> ScalarField2D:
    """Sample ``coeff`` (any callable of ``(x, y)``) at the cell centres."""
    return ScalarField2D.from_function(grid, coeff)


def total_variation(field: ScalarField2D) -> float:
    """Anisotropic discrete TV ``sum |D_x f| h + sum |D_y f| h`` over interior edges."""
    v, h = field.values, field.grid.h
    return float((np.abs(np.diff(v, axis=0)).sum() + np.abs(np.diff(v, axis=1)).sum()) * h)


def coarsen(field: ScalarField2D, factor: int = 2) -> ScalarField2D:
    """Restrict to the nested grid ``factor`` times coarser by exact cell averaging."""
    g = field.grid
    if g.nx % factor or g.ny % factor:
        raise ValueError(f"grid {g.shape} is not divisible by {factor}")
    coarse = Grid2D(g.x_min, g.x_max, g.y_min, g.y_max, g.nx // factor, g.ny // factor)
    v = field.values.reshape(coarse.nx, factor, coarse.ny, factor).mean(axis=(1, 3))
    return ScalarField2D(coarse, v)


def write_snapshot(field: ScalarField2D, path) -> Path:
    """Header ``nx,ny,x_min,x_max,y_min,y_max`` then one row of ``values[i, :]`` per line."""
    path = Path(path)
    g = field.grid
    header = f"{g.nx},{g.ny},{g.x_min!r},{g.x_max!r},{g.y_min!r},{g.y_max!r}"
    np.savetxt(path, field.values, fmt="%.17g", delimiter=",", header=header, comments="")
    return path


def read_snapshot(path) -> ScalarField2D:
    path = Path(path)
    with path.open() as fh:
        head = fh.readline().strip().split(",")
    nx, ny = int(head[0]), int(head[1])
    x0, x1, y0, y1 = (float(s) for s in head[2:6])
    values = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ScalarField2D(Grid2D(x0, x1, y0, y1, nx, ny), values.reshape(nx, ny))


def stack_values(fields: Sequence[ScalarField2D]) -> np.ndarray:
    _require_same_grid(*fields)
    return np.stack([f.values for f in fields])
