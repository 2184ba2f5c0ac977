"""Radial gravity models for the near-asteroid dynamics.

Beyond a few kilometers from an irregular body the angular variation of the
gravitational acceleration is negligible, so the field is reduced to a radial
profile U_rho(rho) with zero tangential component.  Two profiles are provided:
an inverse-square point mass and a tabulated profile loaded from a two-column
text file (rho in meters, signed radial acceleration in m/s^2, negative toward
the body).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["PointMassGravity", "TabulatedRadialGravity", "load_gravity_profile"]


@dataclass(frozen=True)
class PointMassGravity:
    """Inverse-square radial gravity, U_rho(rho) = -GM / rho^2."""

    gm_m3s2: float

    def __post_init__(self):
        if self.gm_m3s2 <= 0:
            raise ValueError(f"gm_m3s2 must be positive, got {self.gm_m3s2}")

    def radial_acceleration(self, rho_m):
        """Signed radial acceleration (m/s^2); negative = toward the body."""
        return -self.gm_m3s2 / np.square(rho_m)

    def slope_bound(self, rho_lo_m: float, rho_hi_m: float) -> float:
        """Upper bound of |d U_rho / d rho| on [rho_lo, rho_hi]."""
        if not 0 < rho_lo_m <= rho_hi_m:
            raise ValueError("need 0 < rho_lo_m <= rho_hi_m")
        return 2.0 * self.gm_m3s2 / rho_lo_m**3

    def magnitude_bound(self, rho_lo_m: float, rho_hi_m: float) -> float:
        """Upper bound of |U_rho| on [rho_lo, rho_hi]."""
        if not 0 < rho_lo_m <= rho_hi_m:
            raise ValueError("need 0 < rho_lo_m <= rho_hi_m")
        return self.gm_m3s2 / rho_lo_m**2


@dataclass(frozen=True)
class TabulatedRadialGravity:
    """Piecewise-linear radial profile from (rho, acceleration) samples.

    Radii must be strictly increasing; accelerations must be attractive
    (non-positive) so that the profile is physically meaningful inside the
    admissible shell.  Queries outside the tabulated range use the end
    values (constant extrapolation).
    """

    rho_m: np.ndarray
    accel_ms2: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho_m, dtype=float)
        acc = np.asarray(self.accel_ms2, dtype=float)
        if rho.ndim != 1 or rho.shape != acc.shape or rho.size < 2:
            raise ValueError("profile needs two same-length 1-d columns with >= 2 rows")
        if not np.all(np.diff(rho) > 0):
            raise ValueError("profile radii must be strictly increasing")
        if np.any(acc > 0):
            raise ValueError("profile accelerations must be attractive (<= 0)")
        object.__setattr__(self, "rho_m", rho)
        object.__setattr__(self, "accel_ms2", acc)

    def radial_acceleration(self, rho_m):
        return np.interp(rho_m, self.rho_m, self.accel_ms2)

    def slope_bound(self, rho_lo_m: float, rho_hi_m: float) -> float:
        slopes = np.diff(self.accel_ms2) / np.diff(self.rho_m)
        return float(np.max(np.abs(slopes))) if slopes.size else 0.0

    def magnitude_bound(self, rho_lo_m: float, rho_hi_m: float) -> float:
        lo = min(rho_lo_m, rho_hi_m)
        hi = max(rho_lo_m, rho_hi_m)
        mask = (self.rho_m >= lo) & (self.rho_m <= hi)
        candidates = np.abs(self.accel_ms2[mask])
        edge = np.abs([self.radial_acceleration(lo), self.radial_acceleration(hi)])
        return float(max(np.max(candidates, initial=0.0), edge.max()))


def load_gravity_profile(path: str | Path) -> TabulatedRadialGravity:
    """Load a two-column (rho meters, acceleration m/s^2) text profile."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    return TabulatedRadialGravity(rho_m=data[:, 0], accel_ms2=data[:, 1])
