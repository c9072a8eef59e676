"""Square-field partitioning and the two sink trajectories.

The field of side ``L`` is split into a ``g x g`` grid. Cell ``(row, col)``
covers ``[col*s, (col+1)*s) x [row*s, (row+1)*s)`` with ``s = L/g``; its
centre is the sojourn location of a sink. The outer ring collects from the
boundary cells, the inner ring from the perimeter of the interior block.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from functools import cached_property

from gsmsim.errors import GeometryError


class TrajectoryKind(enum.Enum):
    INNER = "inner"
    OUTER = "outer"


@dataclass(frozen=True)
class Cell:
    index: int
    row: int
    col: int
    center: tuple[float, float]


@dataclass(frozen=True)
class FieldGeometry:
    field_side: float
    divisions: int

    def __post_init__(self):
        if not (isinstance(self.field_side, (int, float)) and math.isfinite(self.field_side) and self.field_side > 0):
            raise GeometryError(f"field_side must be > 0, got {self.field_side!r}")
        g = self.divisions
        if not isinstance(g, int) or g < 4 or g % 2:
            # g=2 has no interior ring, so the inner sink would have nowhere to go
            raise GeometryError(f"divisions must be an even integer >= 4, got {g!r}")

    @property
    def cell_side(self) -> float:
        return self.field_side / self.divisions

    @property
    def half_side(self) -> float:
        return self.field_side / (2 * self.divisions)

    @cached_property
    def cells(self) -> tuple[Cell, ...]:
        s = self.cell_side
        g = self.divisions
        return tuple(
            Cell(r * g + c, r, c, ((c + 0.5) * s, (r + 0.5) * s)) for r in range(g) for c in range(g)
        )

    def cell_index(self, row: int, col: int) -> int:
        return row * self.divisions + col

    def is_inner(self, index: int) -> bool:
        g = self.divisions
        row, col = divmod(index, g)
        return 1 <= row <= g - 2 and 1 <= col <= g - 2

    @property
    def inner_cells(self) -> list[int]:
        return [c.index for c in self.cells if self.is_inner(c.index)]

    @property
    def outer_cells(self) -> list[int]:
        return [c.index for c in self.cells if not self.is_inner(c.index)]

    def center(self, index: int) -> tuple[float, float]:
        return self.cells[index].center


def partition_field(field_side: float, divisions: int = 4) -> FieldGeometry:
    return FieldGeometry(float(field_side), divisions)


@dataclass(frozen=True)
class Trajectory:
    kind: TrajectoryKind
    stops: tuple[int, ...]
    current: int = 0

    def __len__(self) -> int:
        return len(self.stops)


def _ring(lo: int, hi: int) -> list[tuple[int, int]]:
    """Clockwise (y axis up) perimeter of the square block ``[lo, hi]^2``.

    Starts at ``(lo, lo)``, walks up the left column, right along the top
    row, down the right column and back along the bottom row.
    """
    out = [(r, lo) for r in range(lo, hi + 1)]
    out += [(hi, c) for c in range(lo + 1, hi + 1)]
    out += [(r, hi) for r in range(hi - 1, lo - 1, -1)]
    out += [(lo, c) for c in range(hi - 1, lo, -1)]
    return out


def build_trajectory(geometry: FieldGeometry, kind: TrajectoryKind) -> Trajectory:
    g = geometry.divisions
    lo, hi = (0, g - 1) if kind is TrajectoryKind.OUTER else (1, g - 2)
    stops = tuple(geometry.cell_index(r, c) for r, c in _ring(lo, hi))
    return Trajectory(kind, stops)


def characteristic_distances(geometry: FieldGeometry) -> tuple[float, float, float]:
    """Worst node-to-sink distance, adjacent-stop spacing, and inner/outer stop spacing."""
    x = geometry.half_side
    return math.sqrt(2.0) * x, 2.0 * x, 2.0 * math.sqrt(2.0) * x


def cell_of(point: tuple[float, float], geometry: FieldGeometry) -> int:
    px, py = point
    side = geometry.field_side
    if not (0.0 <= px <= side and 0.0 <= py <= side):
        raise GeometryError(f"point {point} lies outside the {side} m field")
    g = geometry.divisions
    col = min(int(px // geometry.cell_side), g - 1)
    row = min(int(py // geometry.cell_side), g - 1)
    return geometry.cell_index(row, col)


def node_sink_distance(position: tuple[float, float], sojourn: tuple[float, float]) -> float:
    return math.hypot(position[0] - sojourn[0], position[1] - sojourn[1])


def geometry_csv(geometry: FieldGeometry) -> str:
    """Cells and both trajectories as ``kind,order,x,y`` rows for plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "order", "x", "y"])
    for cell in geometry.cells:
        writer.writerow(["cell", cell.index, repr(cell.center[0]), repr(cell.center[1])])
    for kind in (TrajectoryKind.INNER, TrajectoryKind.OUTER):
        for order, idx in enumerate(build_trajectory(geometry, kind).stops):
            cx, cy = geometry.center(idx)
            writer.writerow([kind.value, order, repr(cx), repr(cy)])
    return buf.getvalue()
