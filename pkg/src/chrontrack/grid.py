"""Geographic grid: map lat/lon to cells, cell distances, neighborhood rings.

Row 0 is the northernmost row (map orientation); cell ids enumerate
row-major, ``cell_id = row * cols + col``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class StudyBox:
    """Rectangular study area in decimal degrees."""

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self) -> None:
        if not self.lon_min < self.lon_max:
            raise ValueError(f"lon_min must be < lon_max, got [{self.lon_min}, {self.lon_max}]")
        if not self.lat_min < self.lat_max:
            raise ValueError(f"lat_min must be < lat_max, got [{self.lat_min}, {self.lat_max}]")

    def contains(self, lat: float, lon: float) -> bool:
        """Closed on all edges; exact max-boundary points count as inside."""
        return self.lon_min <= lon <= self.lon_max and self.lat_min <= lat <= self.lat_max


#: Amazon basin study area used throughout: lon 70W..50W, lat 15S..5N.
DEFAULT_BOX = StudyBox(lon_min=-70.0, lon_max=-50.0, lat_min=-15.0, lat_max=5.0)


@dataclass(frozen=True, order=True)
class CellCoord:
    """Position within a grid, row 0 = north, col 0 = west."""

    row: int
    col: int


@dataclass(frozen=True)
class GridSpec:
    """Partition of a study box into rows x cols equal cells."""

    box: StudyBox = DEFAULT_BOX
    rows: int = 30
    cols: int = 30

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have at least one row and column, got {self.rows}x{self.cols}")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def cell_width(self) -> float:
        return (self.box.lon_max - self.box.lon_min) / self.cols

    @property
    def cell_height(self) -> float:
        return (self.box.lat_max - self.box.lat_min) / self.rows

    def cell_id(self, coord: CellCoord) -> int:
        return coord.row * self.cols + coord.col

    def coord(self, cell_id: int) -> CellCoord:
        if not 0 <= cell_id < self.n_cells:
            raise ValueError(f"cell id {cell_id} outside grid of {self.n_cells} cells")
        return CellCoord(cell_id // self.cols, cell_id % self.cols)

    def locate(self, lat: float, lon: float) -> CellCoord:
        """Cell containing (lat, lon); points on the max boundary clamp to the last row/col."""
        if not self.box.contains(lat, lon):
            raise ValueError(f"point (lat={lat}, lon={lon}) outside study box {self.box}")
        col = int(math.floor((lon - self.box.lon_min) / self.cell_width))
        row = int(math.floor((self.box.lat_max - lat) / self.cell_height))
        return CellCoord(min(row, self.rows - 1), min(col, self.cols - 1))

    def center(self, coord: CellCoord) -> tuple[float, float]:
        """(lat, lon) of the cell center."""
        lat = self.box.lat_max - (coord.row + 0.5) * self.cell_height
        lon = self.box.lon_min + (coord.col + 0.5) * self.cell_width
        return lat, lon


def manhattan_distance(a: CellCoord, b: CellCoord) -> int:
    return abs(a.row - b.row) + abs(a.col - b.col)


def chebyshev_distance(a: CellCoord, b: CellCoord) -> int:
    return max(abs(a.row - b.row), abs(a.col - b.col))


def chebyshev_ring(center: CellCoord, k: int, grid: GridSpec) -> set[CellCoord]:
    """Cells at Chebyshev distance exactly k from center, clipped at grid borders.

    k = 0 returns {center}; interior rings with full clearance have 8k cells.
    """
    if k < 0:
        raise ValueError("ring level k must be non-negative")
    if k == 0:
        return {center}
    ring: set[CellCoord] = set()
    for row in range(max(0, center.row - k), min(grid.rows, center.row + k + 1)):
        if abs(row - center.row) == k:
            cols = range(max(0, center.col - k), min(grid.cols, center.col + k + 1))
        else:
            cols = (c for c in (center.col - k, center.col + k) if 0 <= c < grid.cols)
        for col in cols:
            ring.add(CellCoord(row, col))
    return ring
