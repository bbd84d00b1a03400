"""Uniform axes, grids and the immutable 2D complex field container."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import ContractError


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class UniformAxis:
    """Uniform sample axis with values ``(k - n//2) * spacing``.

    For even ``n`` the axis covers ``[-(n/2) d, (n/2 - 1) d]``; for odd ``n``
    it is symmetric about zero.
    """

    n_points: int
    spacing: float
    unit: str = ""

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise ContractError(f"n_points must be a positive integer, got {self.n_points!r}")
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ContractError(f"spacing must be finite and > 0, got {self.spacing!r}")

    @property
    def values(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    @property
    def span(self) -> float:
        return self.n_points * self.spacing

    @property
    def center_index(self) -> int:
        return self.n_points // 2

    def index_of(self, value: float, atol: float = 1e-9) -> int:
        """Index of the sample equal to ``value``; raises if off-grid."""
        k = int(round(value / self.spacing)) + self.n_points // 2
        if not 0 <= k < self.n_points or abs(self.values[k] - value) > atol * max(1.0, abs(value)):
            raise ContractError(f"value {value} does not lie on the {self.unit or 'axis'} grid")
        return k

    def to_dict(self) -> dict:
        return {"kind": type(self).__name__, "n_points": int(self.n_points),
                "spacing": float(self.spacing), "unit": self.unit}


@dataclass(frozen=True)
class FrequencyGrid(UniformAxis):
    """Relative angular-frequency axis (rad/fs) around a carrier."""

    unit: str = "rad/fs"
    center_angular_frequency: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.n_points < 8 or not is_power_of_two(self.n_points):
            raise ContractError(f"frequency grid size must be a power of two >= 8, got {self.n_points}")

    def conjugate(self) -> "TimeGrid":
        return TimeGrid(self.n_points, 2 * np.pi / (self.n_points * self.spacing))

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["center_angular_frequency"] = float(self.center_angular_frequency)
        return d


@dataclass(frozen=True)
class TimeGrid(UniformAxis):
    """Delay axis (fs) conjugate to a :class:`FrequencyGrid`."""

    unit: str = "fs"

    def __post_init__(self):
        super().__post_init__()
        if not is_power_of_two(self.n_points):
            raise ContractError(f"time grid size must be a power of two, got {self.n_points}")

    def conjugate(self) -> FrequencyGrid:
        return FrequencyGrid(self.n_points, 2 * np.pi / (self.n_points * self.spacing))


@dataclass(frozen=True)
class PositionAxis(UniformAxis):
    unit: str = "mm"


@dataclass(frozen=True)
class SpatialGrid:
    """Origin-centred transverse scan grid (mm)."""

    n_x: int = 7
    n_y: int = 7
    pitch: float = 0.5

    def __post_init__(self):
        if self.pitch <= 0 or not np.isfinite(self.pitch):
            raise ContractError(f"pitch must be > 0, got {self.pitch!r}")
        if self.n_x < 1 or self.n_y < 1:
            raise ContractError("spatial grid needs at least one point per axis")

    @property
    def x_axis(self) -> PositionAxis:
        return PositionAxis(self.n_x, self.pitch)

    @property
    def y_axis(self) -> PositionAxis:
        return PositionAxis(self.n_y, self.pitch)

    @property
    def x(self) -> np.ndarray:
        return self.x_axis.values

    @property
    def y(self) -> np.ndarray:
        return self.y_axis.values

    def mesh(self):
        """Coordinate arrays indexed ``[ix, iy]``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def index_of(self, point) -> tuple[int, int]:
        return self.x_axis.index_of(point[0]), self.y_axis.index_of(point[1])

    def contains(self, point) -> bool:
        try:
            self.index_of(point)
        except ContractError:
            return False
        return True

    def to_dict(self) -> dict:
        return {"n_x": self.n_x, "n_y": self.n_y, "pitch": self.pitch}


Axis = Union[UniformAxis, FrequencyGrid, TimeGrid, PositionAxis]


@dataclass(frozen=True, eq=False)
class ComplexField2D:
    """Complex samples on ``grid_a x grid_b``; index ``[a, b]``.

    The array is copied and frozen on construction.
    """

    grid_a: Axis
    grid_b: Axis
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.shape != (self.grid_a.n_points, self.grid_b.n_points):
            raise ContractError(
                f"values shape {v.shape} does not match grids "
                f"({self.grid_a.n_points}, {self.grid_b.n_points})")
        if not np.all(np.isfinite(v)):
            raise ContractError("field contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @property
    def cell_area(self) -> float:
        return self.grid_a.spacing * self.grid_b.spacing

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_area))

    def normalized(self) -> "ComplexField2D":
        n = self.norm()
        if n == 0:
            raise ContractError("cannot normalise a zero field")
        return self.with_values(self.values / n)

    def with_values(self, values) -> "ComplexField2D":
        return ComplexField2D(self.grid_a, self.grid_b, values)

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def transpose(self) -> "ComplexField2D":
        return ComplexField2D(self.grid_b, self.grid_a, self.values.T)

    def axes(self):
        return self.grid_a.values, self.grid_b.values

    def mesh(self):
        return np.meshgrid(self.grid_a.values, self.grid_b.values, indexing="ij")
