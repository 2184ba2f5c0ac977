"""Uniform rectangular grids, time-stamped scalar fields, and multilinear
interpolation.

Fields store one single-precision slice per horizon stamp; all computations
on them promote to double precision.  Interpolation is multilinear in space
and linear in the horizon stamps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfHullError

__all__ = ["GridAxis", "GridSpec", "ValueField", "interpolate_slice"]

GHOST_WIDTH = 3  # WENO5 stencil half-width


@dataclass(frozen=True)
class GridAxis:
    """One uniformly spaced grid dimension."""

    minimum: float
    maximum: float
    points: int
    periodic: bool = False

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"axis needs at least 2 points, got {self.points}")
        if not self.maximum > self.minimum:
            raise ValueError(f"axis needs maximum > minimum, got [{self.minimum}, {self.maximum}]")

    @property
    def spacing(self) -> float:
        return (self.maximum - self.minimum) / (self.points - 1)

    def coordinates(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.points)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid: a tuple of axes plus the fixed ghost width."""

    axes: tuple[GridAxis, ...]
    ghost_width: int = GHOST_WIDTH

    def __post_init__(self):
        if not self.axes:
            raise ValueError("grid needs at least one axis")
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.points for ax in self.axes)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(ax.spacing for ax in self.axes)

    @property
    def lower(self) -> np.ndarray:
        return np.array([ax.minimum for ax in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([ax.maximum for ax in self.axes])

    def coordinate_vectors(self) -> list[np.ndarray]:
        return [ax.coordinates() for ax in self.axes]

    def broadcast_coordinates(self) -> tuple[np.ndarray, ...]:
        """Axis coordinate arrays shaped for mutual broadcasting."""
        out = []
        for k, ax in enumerate(self.axes):
            shape = [1] * self.ndim
            shape[k] = ax.points
            out.append(ax.coordinates().reshape(shape))
        return tuple(out)

    def validate_for_weno(self):
        for k, ax in enumerate(self.axes):
            if ax.points < 7:
                raise ValueError(f"axis {k} has {ax.points} points; WENO5 needs at least 7")

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Elementwise hull membership for points of shape (..., ndim)."""
        points = np.asarray(points, dtype=float)
        lo, hi = self.lower, self.upper
        return np.all((points >= lo) & (points <= hi), axis=-1)

    def clip(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.clip(points, self.lower, self.upper)


def interpolate_slice(grid: GridSpec, values: np.ndarray, points: np.ndarray, strict: bool = False):
    """Multilinear interpolation of one slice at points of shape (..., ndim).

    Out-of-hull queries are clamped to the hull unless strict, in which case
    OutOfHullError is raised.  Exact at grid nodes.
    """
    points = np.asarray(points, dtype=float)
    scalar_input = points.ndim == 1
    pts = np.atleast_2d(points)
    if pts.shape[-1] != grid.ndim:
        raise ValueError(f"points have dimension {pts.shape[-1]}, grid has {grid.ndim}")
    if strict and not bool(np.all(grid.contains(pts))):
        raise OutOfHullError("interpolation query outside the grid hull")
    pts = grid.clip(pts)
    lo = grid.lower
    dx = np.array(grid.spacings)
    frac = (pts - lo) / dx
    base = np.minimum(frac.astype(np.int64), np.array(grid.shape) - 2)
    base = np.maximum(base, 0)
    w = frac - base  # in [0, 1]
    values = np.asarray(values)
    result = np.zeros(pts.shape[0], dtype=float)
    for corner in range(1 << grid.ndim):
        idx = []
        weight = np.ones(pts.shape[0], dtype=float)
        for k in range(grid.ndim):
            bit = (corner >> k) & 1
            idx.append(base[:, k] + bit)
            weight = weight * (w[:, k] if bit else (1.0 - w[:, k]))
        result += weight * values[tuple(idx)].astype(float)
    return result[0] if scalar_input else result


@dataclass
class ValueField:
    """Time-stamped scalar field on a grid.

    `times` are ascending horizon stamps; `data` holds one float32 slice per
    stamp, shaped (len(times), *grid.shape).  Computations on the field
    promote to float64.
    """

    grid: GridSpec
    times: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.times.size and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.data = np.asarray(self.data)
        if self.data.dtype != np.float32:
            raise ValueError(f"slices must be stored single-precision, got {self.data.dtype}")
        expected = (self.times.size, *self.grid.shape)
        if self.data.shape != expected:
            raise ValueError(f"data shape {self.data.shape} != expected {expected}")

    @property
    def horizon(self) -> float:
        return float(self.times[-1]) if self.times.size else 0.0

    def slice_at(self, stamp_index: int) -> np.ndarray:
        return self.data[stamp_index]

    def time_bracket(self, t: float) -> tuple[int, int, float]:
        """Stamp indices (k0, k1) and blend weight for horizon t (clamped)."""
        if self.times.size == 0:
            raise ValueError("field has no stamps")
        t = float(t)
        if t <= self.times[0]:
            return 0, 0, 0.0
        if t >= self.times[-1]:
            n = self.times.size - 1
            return n, n, 0.0
        k1 = int(np.searchsorted(self.times, t, side="right"))
        k0 = k1 - 1
        w = (t - self.times[k0]) / (self.times[k1] - self.times[k0])
        return k0, k1, float(w)

    def blended_slice(self, t: float) -> np.ndarray:
        """Float64 slice linearly interpolated in time at horizon t."""
        k0, k1, w = self.time_bracket(t)
        if k0 == k1:
            return self.data[k0].astype(float)
        return (1.0 - w) * self.data[k0].astype(float) + w * self.data[k1].astype(float)

    def value(self, points: np.ndarray, t: float, strict: bool = False):
        """Interpolate at spatial points (..., ndim) and scalar horizon t."""
        return interpolate_slice(self.grid, self.blended_slice(t), points, strict=strict)
