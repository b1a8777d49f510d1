"""Grids and sampled fields."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Grid1D:
    """Uniform closed grid ``x_min, ..., x_max`` with ``n_points`` nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise DomainError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError(f"n_points must be an integer >= 3, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)

    def refined(self) -> "Grid1D":
        """Same interval with the spacing halved."""
        return Grid1D(self.x_min, self.x_max, 2 * self.n_points - 1)


@dataclass
class SampledField:
    """Real field on a uniform 1D or 2D grid.

    ``origin`` and ``spacing`` are tuples with one entry per array axis.
    """

    values: np.ndarray
    origin: tuple = (0.0,)
    spacing: tuple = (1.0,)
    time_stamp: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        self.spacing = tuple(float(s) for s in np.atleast_1d(self.spacing))
        if self.values.ndim not in (1, 2):
            raise DomainError("only 1D and 2D fields are supported")
        if len(self.origin) != self.values.ndim or len(self.spacing) != self.values.ndim:
            raise DomainError("origin/spacing must have one entry per axis")
        if any(not s > 0 for s in self.spacing):
            raise DomainError("spacing must be positive on every axis")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def axis(self, i: int = 0) -> np.ndarray:
        return self.origin[i] + self.spacing[i] * np.arange(self.values.shape[i])

    @classmethod
    def on_grid(cls, values, grid: Grid1D, time_stamp: float = 0.0, **meta) -> "SampledField":
        return cls(values, (grid.x_min,), (grid.spacing,), time_stamp, dict(meta))
