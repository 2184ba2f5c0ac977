"""Optimal-policy and trajectory reconstruction from a computed value field.

At each step of the time grid the costate is estimated from central
differences of the interpolated field, the control is the analytic
Hamiltonian minimizer at that costate (exhaustive lattice search is kept as
a test oracle), and the state advances through the true dynamics with an
adaptive integrator.  A vectorized fixed-substep variant reconstructs many
starts at once for bulk feasibility validation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import Control, PlanarProblem
from .errors import InfeasibleStartError
from .grid import ValueField, interpolate_slice
from .hamiltonian import PlanarHamiltonian
from .model import Scenario

__all__ = [
    "Trajectory",
    "interpolate_value",
    "estimate_costate",
    "reconstruct",
    "reconstruct_batch",
    "argmin_control_oracle",
    "smooth_controls",
]


@dataclass
class Trajectory:
    """Reconstructed transfer: sample arrays plus terminal diagnostics.

    `times` are normalized trajectory times in [-t_f, 0]; `states` rows are
    the normalized display form (rho, theta, v_rho, v_t, dm); `controls`
    rows are (alpha_rad, throttle), the last row repeating the final command.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    omega_hat: np.ndarray
    r0: np.ndarray
    t_f: float
    step_count: int
    start_margin: float
    max_constraint_violation: float
    target_margin: float
    terminal_miss: dict
    aborted: bool = False
    abort_reason: str | None = None

    @property
    def throttle(self) -> np.ndarray:
        return self.controls[:, 1]

    @property
    def alpha(self) -> np.ndarray:
        return self.controls[:, 0]


def interpolate_value(field: ValueField, points, t: float, strict: bool = False):
    """Field value, multilinear in space and linear in the horizon stamps."""
    return field.value(points, t, strict=strict)


def feasibility_slack(field: ValueField) -> float:
    """One grid cell in the field's own (level-set) units."""
    return max(field.grid.spacings)


def estimate_costate(field: ValueField, points, t: float, return_flags: bool = False):
    """Spatial gradient of the interpolated field by central differences.

    Points within one spacing of the hull fall back to one-sided differences
    (flagged when `return_flags`).  Accepts a single point (ndim,) or a batch
    (n, ndim); the probe stride is one grid spacing per dimension.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    single = np.asarray(points).ndim == 1
    grid = field.grid
    pts = grid.clip(pts)
    blended = field.blended_slice(t)
    lo, hi = grid.lower, grid.upper
    q = np.empty_like(pts)
    onesided = np.zeros(pts.shape, dtype=bool)
    for k in range(grid.ndim):
        step = grid.axes[k].spacing
        plus = pts.copy()
        minus = pts.copy()
        plus[:, k] = np.minimum(pts[:, k] + step, hi[k])
        minus[:, k] = np.maximum(pts[:, k] - step, lo[k])
        denom = plus[:, k] - minus[:, k]
        q[:, k] = (
            interpolate_slice(grid, blended, plus) - interpolate_slice(grid, blended, minus)
        ) / denom
        onesided[:, k] = denom < 2.0 * step - 1e-15
    if single:
        q, onesided = q[0], onesided[0]
    return (q, onesided) if return_flags else q


def _terminal_diagnostics(scenario: Scenario, state4: np.ndarray) -> tuple[dict, float]:
    n = scenario.normalization
    t = scenario.target_orbit
    rho_m, vrho, vt, _ = n.state_si(*state4)
    miss = {
        "radius_m": abs(float(rho_m) - t.radius_m),
        "radial_velocity_mps": abs(float(vrho) - t.radial_velocity_mps),
        "tangential_velocity_mps": abs(float(vt) - t.tangential_velocity_mps),
    }
    nu = float(scenario.target_levelset(state4[0], state4[1], state4[2], state4[3]))
    return miss, nu


def reconstruct(
    field: ValueField,
    scenario: Scenario,
    r0: np.ndarray,
    t_f: float,
    n_steps: int = 4000,
    theta0: float = 0.0,
    force: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Trajectory:
    """Reconstruct one trajectory from normalized start r0 over horizon t_f.

    Raises InfeasibleStartError when the interpolated start value exceeds the
    one-cell feasibility slack (bypass with `force`).  If the state leaves
    the grid hull the partial trajectory is returned with `aborted` set.
    """
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (4,):
        raise ValueError(f"r0 must be a planar 4-state, got shape {r0.shape}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if t_f < 0 or t_f > field.horizon + 1e-12:
        raise ValueError(f"t_f = {t_f} outside the field horizon [0, {field.horizon}]")
    problem = PlanarProblem(scenario)
    ham = PlanarHamiltonian(problem)
    slack = feasibility_slack(field)
    start_margin = float(field.value(r0, t_f))
    if start_margin > slack and not force:
        raise InfeasibleStartError(
            f"start value {start_margin:.6g} exceeds feasibility slack {slack:.6g}"
        )

    state = np.array([r0[0], theta0, r0[1], r0[2], r0[3]])
    times = [-t_f]
    states = [state.copy()]
    controls = []
    omega = [start_margin]
    g_max = float(scenario.constraint_levelset(r0[0], r0[1], r0[2], r0[3]))
    aborted = False
    reason = None

    if t_f > 0:
        h = t_f / n_steps
        for k in range(n_steps):
            s_k = -t_f + k * h
            tau = -s_k
            point = state[[0, 2, 3, 4]]
            if not bool(field.grid.contains(point)):
                aborted = True
                reason = f"state left the grid hull at step {k} (s = {s_k:.6g})"
                break
            q = estimate_costate(field, point, tau)
            alpha, throttle = ham.optimal_control(q[1], q[2], q[3], point[3])
            alpha, throttle = float(alpha), float(throttle)
            sol = solve_ivp(
                lambda _t, y: problem.rhs(y, alpha, throttle),
                (s_k, s_k + h),
                state,
                method="DOP853",
                rtol=rtol,
                atol=atol,
            )
            if not sol.success:
                aborted = True
                reason = f"integrator failure at step {k}: {sol.message}"
                break
            state = sol.y[:, -1]
            controls.append((alpha, throttle))
            times.append(s_k + h)
            states.append(state.copy())
            g_max = max(g_max, float(scenario.constraint_levelset(state[0], state[2], state[3], state[4])))
            omega.append(float(field.value(field.grid.clip(state[[0, 2, 3, 4]]), max(tau - h, 0.0))))
    if not controls:
        controls.append((0.0, 0.0))
    controls.append(controls[-1])  # repeat final command for the last sample
    controls = np.array(controls[: len(times)]) if len(times) > 1 else np.array([controls[0]])

    final4 = states[-1][[0, 2, 3, 4]]
    miss, nu_final = _terminal_diagnostics(scenario, final4)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        controls=controls,
        omega_hat=np.array(omega),
        r0=r0,
        t_f=float(t_f),
        step_count=n_steps,
        start_margin=start_margin,
        max_constraint_violation=g_max,
        target_margin=nu_final,
        terminal_miss=miss,
        aborted=aborted,
        abort_reason=reason,
    )


@dataclass
class BatchReconstruction:
    """Vectorized reconstruction outcomes for many starts."""

    final_states: np.ndarray  # (n, 4) normalized
    start_margin: np.ndarray
    target_margin: np.ndarray  # nu at the final state
    constraint_max: np.ndarray  # max g along each path
    exited: np.ndarray  # left the grid hull before the horizon


def reconstruct_batch(
    field: ValueField,
    scenario: Scenario,
    starts: np.ndarray,
    t_f: float,
    n_steps: int = 200,
    substeps: int = 4,
) -> BatchReconstruction:
    """Reconstruct many starts in lockstep with fixed-substep RK4.

    Used for bulk feasibility validation; the single-trajectory path with the
    adaptive integrator is `reconstruct`.  States that leave the hull are
    frozen and flagged.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    n = starts.shape[0]
    problem = PlanarProblem(scenario)
    ham = PlanarHamiltonian(problem)
    grid = field.grid
    states = starts.T.copy()  # (4, n)
    active = np.ones(n, dtype=bool)
    exited = np.zeros(n, dtype=bool)
    start_margin = np.asarray(field.value(starts, t_f), dtype=float).reshape(n)
    g_max = np.asarray(
        scenario.constraint_levelset(states[0], states[1], states[2], states[3]), dtype=float
    ).reshape(n)
    h = t_f / n_steps if n_steps else 0.0
    for k in range(n_steps if t_f > 0 else 0):
        tau = t_f - k * h
        inside = grid.contains(states.T)
        newly_out = active & ~inside
        exited |= newly_out
        active &= inside
        if not active.any():
            break
        idx = np.flatnonzero(active)
        pts = states.T[idx]
        q = estimate_costate(field, pts, tau)
        alpha, throttle = ham.optimal_control(q[:, 1], q[:, 2], q[:, 3], pts[:, 3])
        y = states[:, idx]
        dt = h / substeps
        for _ in range(substeps):
            k1 = problem.rhs(y, alpha, throttle)
            k2 = problem.rhs(y + 0.5 * dt * k1, alpha, throttle)
            k3 = problem.rhs(y + 0.5 * dt * k2, alpha, throttle)
            k4 = problem.rhs(y + dt * k3, alpha, throttle)
            y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            g_max[idx] = np.maximum(
                g_max[idx], scenario.constraint_levelset(y[0], y[1], y[2], y[3])
            )
        states[:, idx] = y
    nu_final = np.asarray(
        scenario.target_levelset(states[0], states[1], states[2], states[3]), dtype=float
    ).reshape(n)
    return BatchReconstruction(
        final_states=states.T.copy(),
        start_margin=start_margin,
        target_margin=nu_final,
        constraint_max=g_max,
        exited=exited,
    )


def argmin_control_oracle(
    field: ValueField,
    scenario: Scenario,
    state4: np.ndarray,
    tau: float,
    h: float,
    n_alpha: int = 64,
    n_thrust: int = 5,
) -> tuple[Control, float]:
    """Exhaustive one-step control search over an (alpha, thrust) lattice.

    Evaluates max(field(r + h f(r, u), tau - h), g(r)) for every lattice
    control via an Euler predictor and returns the minimizing command with
    its value.  Test oracle for the analytic-costate control choice.
    """
    problem = PlanarProblem(scenario)
    state4 = np.asarray(state4, dtype=float)
    alphas = np.linspace(-math.pi, math.pi, n_alpha)
    throttles = np.linspace(0.0, 1.0, n_thrust)
    aa, tt = np.meshgrid(alphas, throttles, indexing="ij")
    deriv = problem.rhs(state4[:, None, None], aa, tt)
    candidates = state4[:, None, None] + h * deriv
    pts = candidates.reshape(4, -1).T
    values = field.value(field.grid.clip(pts), max(tau - h, 0.0))
    g_here = float(scenario.constraint_levelset(state4[0], state4[1], state4[2], state4[3]))
    values = np.maximum(values, g_here)
    best = int(np.argmin(values))
    alpha = float(aa.reshape(-1)[best])
    throttle = float(tt.reshape(-1)[best])
    control = Control(
        alpha_rad=alpha,
        thrust_newton=throttle * scenario.spacecraft.max_thrust_newton,
    )
    return control, float(values[best])


def smooth_controls(traj: Trajectory, window: int = 21) -> Trajectory:
    """Centered moving average on throttle and circular mean on alpha.

    Window must be odd; a window of 1 is the identity.  Windows shrink near
    the ends so constants are preserved exactly.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if window == 1:
        return traj
    kernel = np.ones(window)
    counts = np.convolve(np.ones(len(traj.controls)), kernel, mode="same")

    def running_mean(x):
        return np.convolve(x, kernel, mode="same") / counts

    throttle = running_mean(traj.controls[:, 1])
    alpha = np.arctan2(running_mean(np.sin(traj.controls[:, 0])), running_mean(np.cos(traj.controls[:, 0])))
    smoothed = traj.__class__(**{**traj.__dict__, "controls": np.column_stack([alpha, throttle])})
    return smoothed
