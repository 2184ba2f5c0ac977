"""Physical parameters, normalization, and the level-set encodings of the
admissible set K and the target orbit set C.

All solver-facing quantities are expressed in normalized units: lengths by the
configured length scale, velocities by the velocity scale, time by their
ratio, masses by the mass scale (1 kg by default), thrust by the maximum
thrust.  The level-set functions below are 1-Lipschitz in the normalized
max-metric by construction (max of per-coordinate signed margins).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gravity import PointMassGravity

__all__ = [
    "GRAVITATIONAL_CONSTANT",
    "SpacecraftParams",
    "AsteroidParams",
    "Normalization",
    "InitialOrbit",
    "TargetOrbit",
    "Scenario",
    "soi_radius",
    "circular_orbit_tangential_velocity_mps",
]

GRAVITATIONAL_CONSTANT = 6.674e-11  # m^3 / (kg s^2)


def soi_radius(semi_major_axis_m: float, body_mass_kg: float, sun_mass_kg: float) -> float:
    """Sphere-of-influence radius a * (M1 / M2)^(2/5).

    Args:
        semi_major_axis_m: Semi-major axis of the body's heliocentric orbit (m).
        body_mass_kg: Mass of the small body (kg).
        sun_mass_kg: Mass of the central star (kg).

    Raises:
        ValueError: If any input is non-positive.
    """
    if semi_major_axis_m <= 0 or body_mass_kg <= 0 or sun_mass_kg <= 0:
        raise ValueError(
            "soi_radius needs positive inputs, got "
            f"a={semi_major_axis_m}, M1={body_mass_kg}, M2={sun_mass_kg}"
        )
    return semi_major_axis_m * (body_mass_kg / sun_mass_kg) ** 0.4


@dataclass(frozen=True)
class SpacecraftParams:
    """Spacecraft mass and propulsion parameters.

    The burnout mass equals the dry mass, so the propellant state lives in
    [0, max_propellant_kg].
    """

    dry_mass_kg: float
    max_thrust_newton: float
    exhaust_velocity_mps: float
    max_propellant_kg: float
    min_propellant_kg: float = 0.0  # fixed; kept explicit for clarity

    def __post_init__(self):
        for name in ("dry_mass_kg", "max_thrust_newton", "exhaust_velocity_mps", "max_propellant_kg"):
            value = getattr(self, name)
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.min_propellant_kg != 0.0:
            raise ValueError("min_propellant_kg is fixed to 0")


@dataclass(frozen=True)
class AsteroidParams:
    """Asteroid gravity, rotation, and the radial shell of admissible orbits."""

    gravitational_parameter_m3s2: float
    spin_rate_rad_s: float
    semi_major_axis_m: float
    mass_kg: float
    sun_mass_kg: float
    rho_min_m: float
    rho_max_m: float

    def __post_init__(self):
        if self.gravitational_parameter_m3s2 <= 0:
            raise ValueError(f"gravitational_parameter_m3s2 must be positive, got {self.gravitational_parameter_m3s2}")
        if self.spin_rate_rad_s < 0:
            raise ValueError(f"spin_rate_rad_s must be non-negative, got {self.spin_rate_rad_s}")
        if not 0 < self.rho_min_m < self.rho_max_m:
            raise ValueError(f"need 0 < rho_min_m < rho_max_m, got {self.rho_min_m}, {self.rho_max_m}")

    @classmethod
    def from_orbital_data(
        cls,
        mass_kg: float,
        sun_mass_kg: float,
        semi_major_axis_m: float,
        spin_rate_rad_s: float,
        rho_min_m: float,
        gravitational_parameter_m3s2: float | None = None,
        rho_max_m: float | None = None,
    ) -> "AsteroidParams":
        """Build parameters, defaulting GM to G * mass and rho_max to the SOI radius."""
        if gravitational_parameter_m3s2 is None:
            gravitational_parameter_m3s2 = GRAVITATIONAL_CONSTANT * mass_kg
        if rho_max_m is None:
            rho_max_m = soi_radius(semi_major_axis_m, mass_kg, sun_mass_kg)
        return cls(
            gravitational_parameter_m3s2=gravitational_parameter_m3s2,
            spin_rate_rad_s=spin_rate_rad_s,
            semi_major_axis_m=semi_major_axis_m,
            mass_kg=mass_kg,
            sun_mass_kg=sun_mass_kg,
            rho_min_m=rho_min_m,
            rho_max_m=rho_max_m,
        )

    def point_mass_gravity(self) -> PointMassGravity:
        return PointMassGravity(gm_m3s2=self.gravitational_parameter_m3s2)


@dataclass(frozen=True)
class Normalization:
    """Scales mapping SI quantities to the dimensionless solver units.

    thrust_constant is T_max * L / (m_dry * V^2): the normalized thrust
    acceleration of the dry spacecraft at full throttle.
    """

    length_scale_m: float
    velocity_scale_mps: float
    mass_scale_kg: float
    force_scale_newton: float
    thrust_constant: float

    def __post_init__(self):
        for name in ("length_scale_m", "velocity_scale_mps", "mass_scale_kg", "force_scale_newton"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def for_spacecraft(
        cls,
        spacecraft: SpacecraftParams,
        length_scale_m: float,
        velocity_scale_mps: float,
        mass_scale_kg: float = 1.0,
    ) -> "Normalization":
        c = (
            spacecraft.max_thrust_newton
            * length_scale_m
            / (spacecraft.dry_mass_kg * velocity_scale_mps**2)
        )
        return cls(
            length_scale_m=length_scale_m,
            velocity_scale_mps=velocity_scale_mps,
            mass_scale_kg=mass_scale_kg,
            force_scale_newton=spacecraft.max_thrust_newton,
            thrust_constant=c,
        )

    @property
    def time_scale_s(self) -> float:
        return self.length_scale_m / self.velocity_scale_mps

    @property
    def acceleration_scale_ms2(self) -> float:
        return self.velocity_scale_mps**2 / self.length_scale_m

    def length(self, meters):
        return np.asarray(meters, dtype=float) / self.length_scale_m

    def velocity(self, mps):
        return np.asarray(mps, dtype=float) / self.velocity_scale_mps

    def time(self, seconds):
        return np.asarray(seconds, dtype=float) / self.time_scale_s

    def mass(self, kg):
        return np.asarray(kg, dtype=float) / self.mass_scale_kg

    def thrust(self, newtons):
        return np.asarray(newtons, dtype=float) / self.force_scale_newton

    def length_si(self, normalized):
        return np.asarray(normalized, dtype=float) * self.length_scale_m

    def velocity_si(self, normalized):
        return np.asarray(normalized, dtype=float) * self.velocity_scale_mps

    def time_si(self, normalized):
        return np.asarray(normalized, dtype=float) * self.time_scale_s

    def mass_si(self, normalized):
        return np.asarray(normalized, dtype=float) * self.mass_scale_kg

    def thrust_si(self, normalized):
        return np.asarray(normalized, dtype=float) * self.force_scale_newton

    def state(self, rho_m, vrho_mps, vt_mps, dm_kg):
        """Planar SI state -> normalized (rho, v_rho, v_t, dm)."""
        return (self.length(rho_m), self.velocity(vrho_mps), self.velocity(vt_mps), self.mass(dm_kg))

    def state_si(self, rho, vrho, vt, dm):
        """Normalized planar state -> SI (rho_m, vrho_mps, vt_mps, dm_kg)."""
        return (self.length_si(rho), self.velocity_si(vrho), self.velocity_si(vt), self.mass_si(dm))


@dataclass(frozen=True)
class InitialOrbit:
    """Position/velocity of the admissible initial set; propellant is free."""

    radius_m: float
    radial_velocity_mps: float
    tangential_velocity_mps: float

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError(f"radius_m must be positive, got {self.radius_m}")


@dataclass(frozen=True)
class TargetOrbit:
    """Target orbit band; membership ignores the propellant coordinate.

    Tolerance widths may be left unset and resolved later to one grid spacing
    per coordinate (a sub-grid target is invisible to the solver).
    """

    radius_m: float
    radial_velocity_mps: float
    tangential_velocity_mps: float
    radius_tolerance_m: float | None = None
    radial_velocity_tolerance_mps: float | None = None
    tangential_velocity_tolerance_mps: float | None = None

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError(f"radius_m must be positive, got {self.radius_m}")
        for name in (
            "radius_tolerance_m",
            "radial_velocity_tolerance_mps",
            "tangential_velocity_tolerance_mps",
        ):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def resolved(self) -> bool:
        return None not in (
            self.radius_tolerance_m,
            self.radial_velocity_tolerance_mps,
            self.tangential_velocity_tolerance_mps,
        )


@dataclass(frozen=True)
class Scenario:
    """One fully-specified transfer problem instance.

    Level-set conventions: constraint_levelset (g) is <= 0 exactly on the
    admissible set K, target_levelset (nu) is <= 0 exactly on the target band
    C.  Both take normalized planar coordinates and broadcast over arrays.
    """

    spacecraft: SpacecraftParams
    asteroid: AsteroidParams
    initial_orbit: InitialOrbit
    target_orbit: TargetOrbit
    normalization: Normalization
    gravity: object | None = None  # duck-typed radial model; point mass if None

    def __post_init__(self):
        rho_t = self.target_orbit.radius_m
        if not self.asteroid.rho_min_m <= rho_t <= self.asteroid.rho_max_m:
            raise ValueError(
                f"target radius {rho_t} m outside admissible shell "
                f"[{self.asteroid.rho_min_m}, {self.asteroid.rho_max_m}] m"
            )

    @property
    def gravity_model(self):
        return self.gravity if self.gravity is not None else self.asteroid.point_mass_gravity()

    def with_target_tolerances(self, radius_m, vrho_mps, vt_mps) -> "Scenario":
        target = replace(
            self.target_orbit,
            radius_tolerance_m=radius_m,
            radial_velocity_tolerance_mps=vrho_mps,
            tangential_velocity_tolerance_mps=vt_mps,
        )
        return replace(self, target_orbit=target)

    # -- level sets (normalized coordinates) --------------------------------

    def constraint_levelset(self, rho, vrho, vt, dm):
        """Signed margin of the admissible set K (max of per-coordinate margins)."""
        n = self.normalization
        rho = np.asarray(rho, dtype=float)
        dm = np.asarray(dm, dtype=float)
        rho_lo = self.asteroid.rho_min_m / n.length_scale_m
        rho_hi = self.asteroid.rho_max_m / n.length_scale_m
        m_hi = self.spacecraft.max_propellant_kg / n.mass_scale_kg
        margins = np.broadcast_arrays(rho_lo - rho, rho - rho_hi, -dm, dm - m_hi)
        return np.maximum.reduce(margins)

    def target_tolerances_normalized(self) -> np.ndarray:
        """Normalized ellipsoid semi-axes (rho, v_rho, v_t) of the target band."""
        if not self.target_orbit.resolved:
            raise ValueError("target tolerances unresolved; call with_target_tolerances first")
        n = self.normalization
        t = self.target_orbit
        return np.array(
            [
                t.radius_tolerance_m / n.length_scale_m,
                t.radial_velocity_tolerance_mps / n.velocity_scale_mps,
                t.tangential_velocity_tolerance_mps / n.velocity_scale_mps,
            ]
        )

    def target_levelset(self, rho, vrho, vt, dm=None):
        """Signed margin of the ellipsoidal target band C; mass is ignored.

        nu = s * (sqrt(sum_k (delta_k / tol_k)^2) - 1) with s the smallest
        normalized tolerance, so nu <= 0 exactly on the tolerance ellipsoid,
        the deepest value is -s, and every coordinate keeps a nonzero inward
        gradient off the exact center (a flat-bottomed box encoding would
        leave non-binding coordinates unregulated during reconstruction).
        Per-coordinate slopes never exceed 1 in normalized units.
        """
        tol = self.target_tolerances_normalized()
        scale = float(tol.min())
        center = self.target_state_normalized()
        d_rho = (np.asarray(rho, dtype=float) - center[0]) / tol[0]
        d_vr = (np.asarray(vrho, dtype=float) - center[1]) / tol[1]
        d_vt = (np.asarray(vt, dtype=float) - center[2]) / tol[2]
        return scale * (np.sqrt(d_rho**2 + d_vr**2 + d_vt**2) - 1.0)

    @property
    def target_lipschitz_maxnorm(self) -> float:
        """Lipschitz constant of the target level set in the normalized
        max-metric (sum of the per-coordinate slope bounds)."""
        tol = self.target_tolerances_normalized()
        return float(np.sum(tol.min() / tol))

    # -- convenience normalized quantities ----------------------------------

    @property
    def spin_rate_normalized(self) -> float:
        return self.asteroid.spin_rate_rad_s * self.normalization.time_scale_s

    def initial_state_normalized(self, dm_kg: float):
        n = self.normalization
        o = self.initial_orbit
        return np.array(
            [
                o.radius_m / n.length_scale_m,
                o.radial_velocity_mps / n.velocity_scale_mps,
                o.tangential_velocity_mps / n.velocity_scale_mps,
                dm_kg / n.mass_scale_kg,
            ]
        )

    def target_state_normalized(self):
        n = self.normalization
        t = self.target_orbit
        return np.array(
            [
                t.radius_m / n.length_scale_m,
                t.radial_velocity_mps / n.velocity_scale_mps,
                t.tangential_velocity_mps / n.velocity_scale_mps,
            ]
        )


def circular_orbit_tangential_velocity_mps(
    gm_m3s2: float, spin_rate_rad_s: float, radius_m: float, retrograde: bool = True
) -> float:
    """Rotating-frame tangential velocity of a circular inertial orbit.

    Helper for building self-consistent scenario configs: the rotating-frame
    value is the inertial circular speed minus the frame rotation omega*rho,
    with the sign of the inertial motion chosen by `retrograde`.
    """
    v_inertial = math.sqrt(gm_m3s2 / radius_m)
    if retrograde:
        return -v_inertial - spin_rate_rad_s * radius_m
    return v_inertial - spin_rate_rad_s * radius_m
