"""Closed-form optimal thrust commands and the analytic PDE Hamiltonian.

The reachability PDE needs H(r, q) = -min_u q . f(r, u).  Since the dynamics
are affine in the thrust magnitude and the thrust direction enters through
cos/sin terms only, the inner minimization has a closed form: the thrust
direction is antiparallel to the velocity-costate subvector and the magnitude
is bang-bang in the sign of a switching function (ties resolved to full
thrust).  A lattice-scan oracle over the raw control box is provided to
validate the reduction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import PlanarProblem

__all__ = [
    "optimal_thrust_direction",
    "optimal_thrust_angle_planar",
    "optimal_thrust_magnitude",
    "PlanarHamiltonian",
    "GridHamiltonian",
]


def optimal_thrust_direction(q4: float, q5: float, q6: float) -> tuple[float, float, float]:
    """Angles minimizing q4 cos(a) + sin(a) (q5 sin(d) + q6 cos(d)).

    Returns (alpha, delta, value) with alpha in [-pi, pi], delta in
    [-pi/2, pi/2] and value = -sqrt(q4^2 + q5^2 + q6^2).  A zero costate
    subvector returns (0, 0, 0) by convention.  Two-argument arctangents are
    used throughout; the attained value, not the angle branch, is the
    contractual quantity.
    """
    norm = math.sqrt(q4 * q4 + q5 * q5 + q6 * q6)
    if norm == 0.0:
        return 0.0, 0.0, 0.0
    planar = math.hypot(q5, q6)
    if planar == 0.0:
        delta = 0.0
        b = 0.0
    else:
        phi = math.atan2(q5, q6)
        if abs(phi) <= math.pi / 2:
            delta = phi
            b = planar
        elif phi > 0:
            delta = phi - math.pi
            b = -planar
        else:
            delta = phi + math.pi
            b = -planar
    alpha = math.atan2(-b, -q4)
    return alpha, delta, -norm


def optimal_thrust_angle_planar(q_vrho, q_vt):
    """Planar incidence angle minimizing q_vrho cos(a) + q_vt sin(a).

    Broadcasts over arrays; the zero-costate convention alpha = 0 applies
    elementwise.  Returns (alpha, value) with value = -hypot(q_vrho, q_vt).
    """
    q_vrho = np.asarray(q_vrho, dtype=float)
    q_vt = np.asarray(q_vt, dtype=float)
    norm = np.hypot(q_vrho, q_vt)
    alpha = np.where(norm > 0.0, np.arctan2(-q_vt, -q_vrho), 0.0)
    return alpha, -norm


def optimal_thrust_magnitude(problem: PlanarProblem, q_velocity_norm, q_mass, dm):
    """Bang-bang thrust magnitude in newtons, full thrust on the tie.

    The switching function is the full-throttle Hamiltonian gain
    thrust_acc(dm) * |q_v| + mass_flow_max * q_mass; thrust is maximal
    exactly when it is >= 0.
    """
    sigma = problem.thrust_acc(dm) * np.asarray(q_velocity_norm) + problem.mass_flow_max * np.asarray(q_mass)
    t_max = problem.scenario.spacecraft.max_thrust_newton
    return np.where(sigma >= 0.0, t_max, 0.0)


class PlanarHamiltonian:
    """Analytic H(r, q) for the planar problem and its control extraction."""

    def __init__(self, problem: PlanarProblem):
        self.problem = problem

    def switching(self, q_vrho, q_vt, q_m, dm):
        """Full-throttle gain; thrust is on where this is >= 0."""
        return (
            self.problem.thrust_acc(dm) * np.hypot(q_vrho, q_vt)
            + self.problem.mass_flow_max * np.asarray(q_m, dtype=float)
        )

    def optimal_control(self, q_vrho, q_vt, q_m, dm):
        """Minimizing (alpha, throttle) at the given costate; throttle in {0, 1}."""
        alpha, _ = optimal_thrust_angle_planar(q_vrho, q_vt)
        throttle = np.where(self.switching(q_vrho, q_vt, q_m, dm) >= 0.0, 1.0, 0.0)
        return alpha, throttle

    def value(self, rho, vrho, vt, dm, q_rho, q_vrho, q_vt, q_m):
        """H(r, q) = -q . f_drift + max(0, switching)."""
        a_rho, a_t = self.problem.drift(rho, vrho, vt)
        drift_dot = (
            np.asarray(q_rho, dtype=float) * vrho
            + np.asarray(q_vrho, dtype=float) * a_rho
            + np.asarray(q_vt, dtype=float) * a_t
        )
        return -drift_dot + np.maximum(0.0, self.switching(q_vrho, q_vt, q_m, dm))

    def lattice_minimum(self, state, q, n_alpha: int = 400, n_thrust: int = 100) -> float:
        """Exhaustive min of q . f(r, u) over an (alpha, throttle) lattice.

        Oracle for the closed-form reduction: no optimal-angle or switching
        logic, just q . f evaluated at every lattice control (the drift term
        is control independent and added once).
        """
        rho, vrho, vt, dm = (float(v) for v in state)
        q = np.asarray(q, dtype=float)
        a_rho, a_t = self.problem.drift(rho, vrho, vt)
        drift_dot = q[0] * vrho + q[1] * a_rho + q[2] * a_t
        alphas = np.linspace(-math.pi, math.pi, n_alpha)
        throttles = np.linspace(0.0, 1.0, n_thrust)
        gain_per_alpha = self.problem.thrust_acc(dm) * (
            q[1] * np.cos(alphas) + q[2] * np.sin(alphas)
        ) - self.problem.mass_flow_max * q[3]
        control_terms = gain_per_alpha[:, None] * throttles[None, :]
        return float(drift_dot + control_terms.min())

    def dissipation_bounds(self, rho_range, vrho_range, vt_range, dm_range):
        """Per-dimension upper bounds of |dH/dq_k| over a state box.

        Built from term-wise interval bounds of the drift accelerations plus
        the full-throttle thrust acceleration, so each alpha_k is a verified
        upper bound wherever the box is respected.
        """
        for pair in (rho_range, vrho_range, vt_range, dm_range):
            if not all(math.isfinite(v) for v in pair):
                raise ValueError(f"state bounds must be finite, got {pair}")
        p = self.problem
        rho_lo, rho_hi = min(rho_range), max(rho_range)
        if rho_lo <= 0:
            raise ValueError(f"rho range must be positive, got {rho_range}")
        vr_max = max(abs(vrho_range[0]), abs(vrho_range[1]))
        vt_max = max(abs(vt_range[0]), abs(vt_range[1]))
        scen = p.scenario
        grav_max = (
            scen.gravity_model.magnitude_bound(
                rho_lo * scen.normalization.length_scale_m, rho_hi * scen.normalization.length_scale_m
            )
            / scen.normalization.acceleration_scale_ms2
        )
        acc_max = float(p.thrust_acc(min(dm_range)))
        a_rho_max = vt_max**2 / rho_lo + grav_max + p.spin**2 * rho_hi + 2.0 * p.spin * vt_max
        a_t_max = vr_max * vt_max / rho_lo + 2.0 * p.spin * vr_max
        return (
            vr_max,
            a_rho_max + acc_max,
            a_t_max + acc_max,
            p.mass_flow_max,
        )


@dataclass(frozen=True)
class BolzaRunningCost:
    """Running cost affine in throttle, J_r(r, u) = base + slope * throttle.

    Each field is a length-p vector; the affine form keeps the augmented
    Hamiltonian minimization closed-form.
    """

    base: np.ndarray
    slope: np.ndarray

    def __post_init__(self):
        base = np.atleast_1d(np.asarray(self.base, dtype=float))
        slope = np.atleast_1d(np.asarray(self.slope, dtype=float))
        if base.shape != slope.shape or base.ndim != 1:
            raise ValueError("base and slope must be equal-length 1-d vectors")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "slope", slope)

    @property
    def dimension(self) -> int:
        return self.base.size


def bolza_hamiltonian(
    ham: PlanarHamiltonian,
    state,
    q_state,
    q_aux,
    running_cost: BolzaRunningCost,
):
    """min over u of (q_r . f(r, u) - q_z . J_r(r, u)), as in the generalized
    quasi-variational inequality.

    With J_r = 0 this equals -H(r, q_r).  Note the sign convention: the
    marching scheme negates this quantity so that the J_r = 0 case reduces to
    the plain reachability PDE.
    """
    rho, vrho, vt, dm = state
    q_state = np.asarray(q_state, dtype=float)
    q_aux = np.atleast_1d(np.asarray(q_aux, dtype=float))
    a_rho, a_t = ham.problem.drift(rho, vrho, vt)
    drift_dot = q_state[0] * vrho + q_state[1] * a_rho + q_state[2] * a_t
    sigma = (
        ham.switching(q_state[1], q_state[2], q_state[3], dm)
        + float(q_aux @ running_cost.slope)
    )
    return drift_dot - float(q_aux @ running_cost.base) + min(0.0, -sigma)


class GridHamiltonian:
    """Grid-vectorized analytic Hamiltonian with precomputed drift arrays.

    Coordinates are broadcastable axis arrays in the order
    (rho, v_rho, v_t, dm[, z_1..z_p]); auxiliary cost dimensions carry a
    running-cost contribution when `running_cost` is given.  Instances expose
    the solver protocol: __call__(q_arrays) -> H and dissipation().
    """

    def __init__(self, ham: PlanarHamiltonian, coords, bounds, running_cost: BolzaRunningCost | None = None):
        self.ham = ham
        rho, vrho, vt, dm = coords[:4]
        self.n_aux = len(coords) - 4
        if running_cost is not None and running_cost.dimension != self.n_aux:
            raise ValueError(
                f"running cost dimension {running_cost.dimension} != auxiliary dims {self.n_aux}"
            )
        self.running_cost = running_cost
        self.vrho = vrho
        a_rho, a_t = ham.problem.drift(rho, vrho, vt)
        self.a_rho = a_rho
        self.a_t = a_t
        self.acc = ham.problem.thrust_acc(dm)
        self.mass_flow = ham.problem.mass_flow_max
        self._alphas = self._dissipation_from_bounds(bounds)

    def _dissipation_from_bounds(self, bounds):
        alphas = list(self.ham.dissipation_bounds(*bounds[:4]))
        if self.running_cost is not None:
            alphas.extend(np.abs(self.running_cost.base) + np.abs(self.running_cost.slope))
        else:
            alphas.extend([0.0] * self.n_aux)
        return tuple(float(a) for a in alphas)

    def __call__(self, q):
        q_rho, q_vrho, q_vt, q_m = q[:4]
        drift_dot = q_rho * self.vrho + q_vrho * self.a_rho + q_vt * self.a_t
        sigma = self.acc * np.hypot(q_vrho, q_vt) + self.mass_flow * q_m
        if self.running_cost is not None:
            for i in range(self.n_aux):
                sigma = sigma + self.running_cost.slope[i] * q[4 + i]
        h = -drift_dot + np.maximum(0.0, sigma)
        if self.running_cost is not None:
            for i in range(self.n_aux):
                h = h + self.running_cost.base[i] * q[4 + i]
        return h

    def dissipation(self):
        return self._alphas
