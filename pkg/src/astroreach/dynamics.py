"""Spacecraft equations of motion around a uniformly rotating body.

Three forms are provided:

* a Cartesian 7-state form in SI units (reference implementation),
* a full spherical 7-state form in SI units, with the drift accelerations
  written in closed form, cross-checked against the Cartesian form by
  `spherical_from_cartesian_consistency`,
* the normalized planar 4/5-state reduction actually used by the PDE solver
  (radial gravity, motion in the equatorial plane).

State layouts:
    cartesian: [x, y, z, vx, vy, vz, dm]                      (m, m/s, kg)
    spherical: [rho, theta, psi, v_rho, v_t, v_perp, dm]      (m, rad, m/s, kg)
    planar:    [rho, v_rho, v_t, dm]                          (normalized)
    planar+theta: [rho, theta, v_rho, v_t, dm]                (normalized)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .model import Scenario

__all__ = [
    "Control",
    "PlanarProblem",
    "cartesian_rhs",
    "spherical_rhs",
    "spherical_from_cartesian_consistency",
    "spherical_to_cartesian",
    "planar_rhs",
    "reconstruct_theta",
]


@dataclass(frozen=True)
class Control:
    """Thrust command: incidence angle, sideslip angle, thrust magnitude (N)."""

    alpha_rad: float
    thrust_newton: float
    delta_rad: float = 0.0

    def __post_init__(self):
        if not -math.pi <= self.alpha_rad <= math.pi:
            raise ValueError(f"alpha_rad must lie in [-pi, pi], got {self.alpha_rad}")
        if not -math.pi / 2 <= self.delta_rad <= math.pi / 2:
            raise ValueError(f"delta_rad must lie in [-pi/2, pi/2], got {self.delta_rad}")
        if self.thrust_newton < 0:
            raise ValueError(f"thrust_newton must be non-negative, got {self.thrust_newton}")


def _spherical_basis(theta, psi):
    """Unit vectors (e_rho, e_theta, e_psi) at the given angles."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    e_rho = np.array([sp * ct, sp * st, cp])
    e_theta = np.array([-st, ct, 0.0])
    e_psi = np.array([cp * ct, cp * st, -sp])
    return e_rho, e_theta, e_psi


def thrust_vector_cartesian(theta, psi, control: Control) -> np.ndarray:
    """Cartesian thrust components of a spherical-frame command at (theta, psi)."""
    e_rho, e_theta, e_psi = _spherical_basis(theta, psi)
    ca, sa = math.cos(control.alpha_rad), math.sin(control.alpha_rad)
    cd, sd = math.cos(control.delta_rad), math.sin(control.delta_rad)
    return control.thrust_newton * (ca * e_rho + sa * sd * e_theta + sa * cd * e_psi)


def cartesian_rhs(state: np.ndarray, u_newton: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Time derivative of the Cartesian 7-state under thrust vector u (N).

    Includes centrifugal and Coriolis terms of the uniformly rotating frame;
    Euler forces vanish for constant spin.  Raises ValueError when the total
    mass is non-positive.
    """
    x, y, z, vx, vy, vz, dm = state
    m_total = scenario.spacecraft.dry_mass_kg + dm
    if m_total <= 0:
        raise ValueError(f"total mass must be positive, got {m_total} kg")
    rho = math.sqrt(x * x + y * y + z * z)
    if rho <= 0:
        raise ValueError("radius must be positive")
    omega = scenario.asteroid.spin_rate_rad_s
    u_rho = scenario.gravity_model.radial_acceleration(rho)
    gx, gy, gz = u_rho * x / rho, u_rho * y / rho, u_rho * z / rho
    ux, uy, uz = np.asarray(u_newton, dtype=float)
    ax = gx + omega**2 * x + 2.0 * omega * vy + ux / m_total
    ay = gy + omega**2 * y - 2.0 * omega * vx + uy / m_total
    az = gz + uz / m_total
    mdot = -math.sqrt(ux * ux + uy * uy + uz * uz) / scenario.spacecraft.exhaust_velocity_mps
    return np.array([vx, vy, vz, ax, ay, az, mdot])


def spherical_rhs(state: np.ndarray, control: Control, scenario: Scenario) -> np.ndarray:
    """Time derivative of the spherical 7-state (SI units), closed form.

    The drift accelerations are the exact spherical decomposition of the
    rotating-frame forces plus the kinematic coupling terms; the thrust enters
    through the incidence/sideslip angles.  Pole states (sin psi = 0) are
    rejected.
    """
    rho, theta, psi, vr, vt, vp, dm = state
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    sp, cp = math.sin(psi), math.cos(psi)
    if abs(sp) < 1e-12:
        raise ValueError("state at coordinate pole (sin psi = 0)")
    m_total = scenario.spacecraft.dry_mass_kg + dm
    if m_total <= 0:
        raise ValueError(f"total mass must be positive, got {m_total} kg")
    omega = scenario.asteroid.spin_rate_rad_s
    u_rho = scenario.gravity_model.radial_acceleration(rho)

    a_rho = u_rho + omega**2 * rho * sp * sp + 2.0 * omega * vt * sp + (vt * vt + vp * vp) / rho
    a_t = -2.0 * omega * (vr * sp + vp * cp) - vr * vt / rho - vt * vp * cp / (rho * sp)
    a_perp = omega**2 * rho * sp * cp + 2.0 * omega * vt * cp - vr * vp / rho + vt * vt * cp / (rho * sp)

    acc = control.thrust_newton / m_total
    ca, sa = math.cos(control.alpha_rad), math.sin(control.alpha_rad)
    cd, sd = math.cos(control.delta_rad), math.sin(control.delta_rad)
    return np.array(
        [
            vr,
            vt / (rho * sp),
            vp / rho,
            a_rho + acc * ca,
            a_t + acc * sa * sd,
            a_perp + acc * sa * cd,
            -control.thrust_newton / scenario.spacecraft.exhaust_velocity_mps,
        ]
    )


def spherical_to_cartesian(state: np.ndarray) -> np.ndarray:
    """Map a spherical 7-state to the Cartesian 7-state."""
    rho, theta, psi, vr, vt, vp, dm = state
    e_rho, e_theta, e_psi = _spherical_basis(theta, psi)
    pos = rho * e_rho
    vel = vr * e_rho + vt * e_theta + vp * e_psi
    return np.concatenate([pos, vel, [dm]])


def spherical_from_cartesian_consistency(state: np.ndarray, control: Control, scenario: Scenario) -> float:
    """Residual between the closed-form spherical derivative and the
    Cartesian-route derivative mapped through the coordinate transform.

    The Cartesian route evaluates `cartesian_rhs` at the transformed state and
    projects the resulting acceleration onto the local spherical basis, adding
    the kinematic transport terms.  Returns the max-abs difference over all
    seven rows.
    """
    rho, theta, psi, vr, vt, vp, dm = state
    sp, cp = math.sin(psi), math.cos(psi)
    if abs(sp) < 1e-12:
        raise ValueError("state at coordinate pole (sin psi = 0)")
    e_rho, e_theta, e_psi = _spherical_basis(theta, psi)
    cart = spherical_to_cartesian(state)
    u_cart = thrust_vector_cartesian(theta, psi, control)
    d_cart = cartesian_rhs(cart, u_cart, scenario)
    a = d_cart[3:6]
    via_cartesian = np.array(
        [
            float(d_cart[:3] @ e_rho),
            float(d_cart[:3] @ e_theta) / (rho * sp),
            float(d_cart[:3] @ e_psi) / rho,
            float(a @ e_rho) + (vt * vt + vp * vp) / rho,
            float(a @ e_theta) - vr * vt / rho - vt * vp * cp / (rho * sp),
            float(a @ e_psi) - vr * vp / rho + vt * vt * cp / (rho * sp),
            d_cart[6],
        ]
    )
    direct = spherical_rhs(state, control, scenario)
    return float(np.max(np.abs(direct - via_cartesian)))


class PlanarProblem:
    """Normalized planar reduction of a scenario: all quantities dimensionless.

    Carries the precomputed coefficients of the planar dynamics
        d rho   = v_rho
        d theta = v_t / rho                      (display form only)
        d v_rho = a_rho(rho, v_t) + A(dm) T cos(alpha)
        d v_t   = a_t(rho, v_rho, v_t) + A(dm) T sin(alpha)
        d dm    = -mass_flow_max * T
    with throttle T in [0, 1], A(dm) the normalized full-thrust acceleration,
    and drift terms from the exact polar transform of the rotating-frame
    Cartesian dynamics (centripetal, centrifugal, Coriolis couplings).
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        n = scenario.normalization
        sc = scenario.spacecraft
        self.spin = scenario.asteroid.spin_rate_rad_s * n.time_scale_s
        self.dry_mass = sc.dry_mass_kg / n.mass_scale_kg
        self.max_propellant = sc.max_propellant_kg / n.mass_scale_kg
        # propellant burn rate at full thrust, normalized mass per unit time
        self.mass_flow_max = (
            sc.max_thrust_newton * n.time_scale_s / (sc.exhaust_velocity_mps * n.mass_scale_kg)
        )
        # A(dm) = _thrust_acc_num / (dry_mass + dm)
        self._thrust_acc_num = (
            sc.max_thrust_newton * n.length_scale_m / (n.velocity_scale_mps**2 * n.mass_scale_kg)
        )
        self._gravity = scenario.gravity_model
        self._acc_scale = n.acceleration_scale_ms2
        self._len_scale = n.length_scale_m

    def gravity_radial(self, rho):
        """Normalized radial gravity at normalized radius (negative = attraction)."""
        return self._gravity.radial_acceleration(np.asarray(rho) * self._len_scale) / self._acc_scale

    def thrust_acc(self, dm):
        """Normalized acceleration at full throttle for propellant load dm."""
        return self._thrust_acc_num / (self.dry_mass + np.asarray(dm, dtype=float))

    def drift(self, rho, vrho, vt):
        """Thrust-free acceleration rows (d v_rho, d v_t)."""
        rho = np.asarray(rho, dtype=float)
        vrho = np.asarray(vrho, dtype=float)
        vt = np.asarray(vt, dtype=float)
        a_rho = vt * vt / rho + self.gravity_radial(rho) + self.spin**2 * rho + 2.0 * self.spin * vt
        a_t = -vrho * vt / rho - 2.0 * self.spin * vrho
        return a_rho, a_t

    def rhs(self, state, alpha, throttle):
        """Normalized planar derivative; state of length 4 or 5 (with theta).

        Broadcasts over trailing state axes when `state` is (4, ...) or
        (5, ...) shaped with matching alpha/throttle arrays.
        """
        state = np.asarray(state, dtype=float)
        with_theta = state.shape[0] == 5
        if with_theta:
            rho, theta, vrho, vt, dm = state
        else:
            rho, vrho, vt, dm = state
        if np.any(rho <= 0):
            raise ValueError("rho must be positive")
        if np.any(self.dry_mass + dm <= 0):
            raise ValueError("total mass must be positive")
        a_rho, a_t = self.drift(rho, vrho, vt)
        acc = self.thrust_acc(dm) * np.asarray(throttle, dtype=float)
        d_vrho = a_rho + acc * np.cos(alpha)
        d_vt = a_t + acc * np.sin(alpha)
        d_dm = -self.mass_flow_max * np.asarray(throttle, dtype=float) * np.ones_like(dm)
        if with_theta:
            return np.stack(np.broadcast_arrays(vrho, vt / rho, d_vrho, d_vt, d_dm))
        return np.stack(np.broadcast_arrays(vrho, d_vrho, d_vt, d_dm))

    def throttle(self, thrust_newton):
        return np.asarray(thrust_newton, dtype=float) / self.scenario.spacecraft.max_thrust_newton

    def jacobian_bound(self, rho_range, vrho_range, vt_range, dm_range) -> float:
        """Frobenius-norm bound of the planar state Jacobian over a box.

        Valid for every admissible control (the thrust terms are bounded by
        their full-throttle values); usable as a Lipschitz constant of the
        dynamics in the Euclidean norm on the box.
        """
        rho_lo = min(rho_range)
        if rho_lo <= 0:
            raise ValueError("rho range must be positive")
        vt_max = max(abs(vt_range[0]), abs(vt_range[1]))
        vr_max = max(abs(vrho_range[0]), abs(vrho_range[1]))
        grav_slope = (
            self._gravity.slope_bound(rho_range[0] * self._len_scale, rho_range[1] * self._len_scale)
            * self._len_scale**2
            / (self._acc_scale * self._len_scale)
        )
        acc_slope = self._thrust_acc_num / (self.dry_mass + min(dm_range)) ** 2
        entries = [
            1.0,  # d f_rho / d v_rho
            vt_max**2 / rho_lo**2 + grav_slope + self.spin**2,  # d f_vrho / d rho
            2.0 * vt_max / rho_lo + 2.0 * self.spin,  # d f_vrho / d v_t
            acc_slope,  # d f_vrho / d dm
            vr_max * vt_max / rho_lo**2,  # d f_vt / d rho
            vt_max / rho_lo + 2.0 * self.spin,  # d f_vt / d v_rho
            vr_max / rho_lo,  # d f_vt / d v_t
            acc_slope,  # d f_vt / d dm
        ]
        return math.sqrt(sum(e * e for e in entries))


def planar_rhs(problem: PlanarProblem, state, control: Control):
    """Normalized planar derivative under an SI thrust command."""
    return problem.rhs(state, control.alpha_rad, problem.throttle(control.thrust_newton))


def reconstruct_theta(times, rho, vt, theta0: float = 0.0) -> np.ndarray:
    """Integrate the angular rate v_t / rho along sampled history.

    Args:
        times: Sample times, strictly increasing (any consistent unit).
        rho: Radius samples (same unit system as vt / angular rate).
        vt: Tangential velocity samples.
        theta0: Angle at the first sample.

    Returns:
        Angle array aligned with `times`.
    """
    times = np.asarray(times, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    rate = np.asarray(vt, dtype=float) / rho
    return theta0 + np.concatenate([[0.0], cumulative_trapezoid(rate, times)])
