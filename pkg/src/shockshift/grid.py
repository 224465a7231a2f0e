"""Uniform 1D grids and cell-average snapshots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfRangeError


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise ConfigError("a grid needs at least 8 cells")
        if not self.x_max > self.x_min:
            raise ConfigError("grid needs x_max > x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def edges(self) -> np.ndarray:
        # (x_max - x_min) k / n keeps symmetric grids exactly symmetric
        return self.x_min + (self.x_max - self.x_min) * np.arange(self.n_cells + 1) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def locate(self, x: float) -> int:
        """Index of the cell containing ``x``; points on an edge belong to the right cell."""
        if not (self.x_min <= x <= self.x_max):
            raise OutOfRangeError(f"x={x} outside [{self.x_min}, {self.x_max}]")
        j = min(int(np.floor((x - self.x_min) / self.dx)), self.n_cells - 1)
        # the division can land one ulp across an edge
        e = self.edges
        if j > 0 and x < e[j]:
            j -= 1
        elif j < self.n_cells - 1 and x >= e[j + 1]:
            j += 1
        return j


@dataclass
class FieldSnapshot:
    """Cell averages ``cells[i]`` (shape ``(n_cells, m)``) at one time."""

    time: float
    grid: Grid1D
    cells: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=float)
        if self.cells.ndim == 1:
            self.cells = self.cells[:, None]
        if self.cells.shape[0] != self.grid.n_cells:
            raise ConfigError("cell count does not match the grid")
        if self.time < 0:
            raise ConfigError("snapshot time must be >= 0")

    def copy(self) -> "FieldSnapshot":
        return FieldSnapshot(self.time, self.grid, self.cells.copy())
