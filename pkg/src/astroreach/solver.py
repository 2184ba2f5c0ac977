"""Time marching for the obstacle-form quasi-variational inequality.

The scheme is the standard level-set combination: fifth-order WENO one-sided
derivatives, a global Lax-Friedrichs numerical Hamiltonian with per-dimension
dissipation bounds, third-order TVD Runge-Kutta in (horizon) time, and the
constraint obstacle applied as a pointwise max after every full step:

    V <- max(RK3(V), g)          V(t=0) = max(nu, g)

Ghost cells use linear extrapolation on non-periodic axes and wrap on
periodic ones.  The march aborts with the offending horizon stamp if
non-finite values appear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bolza import BolzaSpec
from .dynamics import PlanarProblem
from .errors import CFLViolation, NumericalAbort
from .grid import GridSpec, ValueField
from .hamiltonian import GridHamiltonian, PlanarHamiltonian
from .model import Scenario

__all__ = [
    "SolverSettings",
    "weno5_derivatives",
    "pad_for_stencil",
    "cfl_timestep",
    "lax_friedrichs_step",
    "march",
    "resolve_target_tolerances",
    "solve_value_function",
    "solve_bolza_value_function",
]

_WENO_EPS = 1e-6

try:  # numba accelerates the WENO sweeps; the numpy path is the fallback
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs of the march."""

    cfl_number: float = 0.5
    max_dt: float = 1e-2  # cap used when all dissipation bounds vanish

    def __post_init__(self):
        if not 0 < self.cfl_number:
            raise ValueError(f"cfl_number must be positive, got {self.cfl_number}")
        if self.max_dt <= 0:
            raise ValueError(f"max_dt must be positive, got {self.max_dt}")


def pad_for_stencil(values: np.ndarray, axis: int, ghost: int, periodic: bool) -> np.ndarray:
    """Extend one axis by `ghost` cells: wrap if periodic, else linear
    extrapolation from the boundary pair."""
    if periodic:
        return np.concatenate(
            [values.take(range(-ghost, 0), axis=axis, mode="wrap"), values,
             values.take(range(0, ghost), axis=axis, mode="wrap")],
            axis=axis,
        )
    first = values.take([0], axis=axis)
    second = values.take([1], axis=axis)
    last = values.take([-1], axis=axis)
    prev = values.take([-2], axis=axis)
    shape = [1] * values.ndim
    shape[axis] = ghost
    down = np.arange(ghost, 0, -1).reshape(shape)  # furthest ghost first
    up = np.arange(1, ghost + 1).reshape(shape)
    left = first + down * (first - second)
    right = last + up * (last - prev)
    return np.concatenate([left, values, right], axis=axis)


def _weno_combine(v1, v2, v3, v4, v5):
    """Jiang-Shu fifth-order WENO combination of divided differences."""
    c1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0
    c2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0
    c3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0
    s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3) ** 2
    s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
    s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5) ** 2 + 0.25 * (3.0 * v3 - 4.0 * v4 + v5) ** 2
    scale = np.maximum.reduce([v1 * v1, v2 * v2, v3 * v3, v4 * v4, v5 * v5])
    eps = _WENO_EPS * scale + 1e-99
    a1 = 0.1 / (s1 + eps) ** 2
    a2 = 0.6 / (s2 + eps) ** 2
    a3 = 0.3 / (s3 + eps) ** 2
    return (a1 * c1 + a2 * c2 + a3 * c3) / (a1 + a2 + a3)


if _HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _weno_combine_scalar(v1, v2, v3, v4, v5):
        c1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0
        c2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0
        c3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0
        s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3) ** 2
        s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
        s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5) ** 2 + 0.25 * (3.0 * v3 - 4.0 * v4 + v5) ** 2
        scale = max(v1 * v1, v2 * v2, v3 * v3, v4 * v4, v5 * v5)
        eps = _WENO_EPS * scale + 1e-99
        a1 = 0.1 / (s1 + eps) ** 2
        a2 = 0.6 / (s2 + eps) ** 2
        a3 = 0.3 / (s3 + eps) ** 2
        return (a1 * c1 + a2 * c2 + a3 * c3) / (a1 + a2 + a3)

    @njit(cache=True, parallel=True)
    def _weno_rows(padded, dx, p_minus, p_plus):
        rows, ncols = padded.shape
        n = ncols - 6
        for r in prange(rows):
            for j in range(n):
                v1 = (padded[r, j + 1] - padded[r, j]) / dx
                v2 = (padded[r, j + 2] - padded[r, j + 1]) / dx
                v3 = (padded[r, j + 3] - padded[r, j + 2]) / dx
                v4 = (padded[r, j + 4] - padded[r, j + 3]) / dx
                v5 = (padded[r, j + 5] - padded[r, j + 4]) / dx
                v6 = (padded[r, j + 6] - padded[r, j + 5]) / dx
                p_minus[r, j] = _weno_combine_scalar(v1, v2, v3, v4, v5)
                p_plus[r, j] = _weno_combine_scalar(v6, v5, v4, v3, v2)


def weno5_derivatives(padded: np.ndarray, axis: int, spacing: float):
    """One-sided fifth-order derivative estimates along one axis.

    `padded` must already carry GHOST_WIDTH = 3 ghost cells on both ends of
    `axis` (other axes unpadded).  Returns (p_minus, p_plus) shaped like the
    interior.
    """
    moved = np.moveaxis(padded, axis, -1)
    n = moved.shape[-1] - 6
    if n < 1:
        raise ValueError("padded array too short for the WENO5 stencil")
    if _HAVE_NUMBA:
        flat = np.ascontiguousarray(moved, dtype=float).reshape(-1, moved.shape[-1])
        p_minus = np.empty((flat.shape[0], n))
        p_plus = np.empty_like(p_minus)
        _weno_rows(flat, float(spacing), p_minus, p_plus)
        shape = moved.shape[:-1] + (n,)
        return (
            np.moveaxis(p_minus.reshape(shape), -1, axis),
            np.moveaxis(p_plus.reshape(shape), -1, axis),
        )
    d = np.diff(moved, axis=-1) / spacing  # length n + 5
    p_minus = _weno_combine(d[..., 0:n], d[..., 1:n + 1], d[..., 2:n + 2], d[..., 3:n + 3], d[..., 4:n + 4])
    p_plus = _weno_combine(d[..., 5:n + 5], d[..., 4:n + 4], d[..., 3:n + 3], d[..., 2:n + 2], d[..., 1:n + 1])
    return np.moveaxis(p_minus, -1, axis), np.moveaxis(p_plus, -1, axis)


def cfl_timestep(grid: GridSpec, alphas, cfl_number: float = 0.5, max_dt: float = 1e-2) -> float:
    """Explicit step bound cfl / sum_k(alpha_k / dx_k); `max_dt` when all
    dissipation coefficients vanish."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (grid.ndim,):
        raise ValueError(f"need one dissipation bound per axis, got {alphas.shape}")
    if np.any(~np.isfinite(alphas)) or np.any(alphas < 0):
        raise ValueError(f"dissipation bounds must be finite and non-negative, got {alphas}")
    rate = float(np.sum(alphas / np.array(grid.spacings)))
    if rate == 0.0:
        return max_dt
    return cfl_number / rate


def _hamiltonian_rate(values: np.ndarray, grid: GridSpec, hamiltonian) -> np.ndarray:
    """dV/dt = -H_hat with the Lax-Friedrichs numerical Hamiltonian."""
    alphas = hamiltonian.dissipation()
    q_avg = []
    dissipation = 0.0
    for k in range(grid.ndim):
        padded = pad_for_stencil(values, k, grid.ghost_width, grid.axes[k].periodic)
        p_minus, p_plus = weno5_derivatives(padded, k, grid.axes[k].spacing)
        q_avg.append(0.5 * (p_minus + p_plus))
        dissipation = dissipation + 0.5 * alphas[k] * (p_plus - p_minus)
    h_hat = hamiltonian(q_avg) - dissipation
    return -h_hat


def lax_friedrichs_step(
    values: np.ndarray,
    grid: GridSpec,
    hamiltonian,
    obstacle: np.ndarray,
    dt: float,
    cfl_number: float = 0.5,
    max_dt: float = 1e-2,
) -> np.ndarray:
    """One TVD-RK3 step of V_t + H = 0 followed by the obstacle max.

    Refuses (CFLViolation) when dt exceeds the stability bound computed from
    the Hamiltonian's dissipation coefficients.
    """
    bound = cfl_timestep(grid, hamiltonian.dissipation(), cfl_number, max_dt)
    if dt > bound * (1.0 + 1e-9):
        raise CFLViolation(
            f"dt = {dt:.6g} exceeds the CFL bound {bound:.6g} "
            f"(cfl_number = {cfl_number}, alphas = {tuple(hamiltonian.dissipation())})"
        )
    v1 = values + dt * _hamiltonian_rate(values, grid, hamiltonian)
    v2 = 0.75 * values + 0.25 * (v1 + dt * _hamiltonian_rate(v1, grid, hamiltonian))
    v3 = values / 3.0 + 2.0 / 3.0 * (v2 + dt * _hamiltonian_rate(v2, grid, hamiltonian))
    return np.maximum(v3, obstacle)


def march(
    grid: GridSpec,
    target_values: np.ndarray,
    constraint_values: np.ndarray,
    hamiltonian,
    stamps,
    settings: SolverSettings = SolverSettings(),
) -> ValueField:
    """March the QVI from the terminal condition and record slices at the
    requested ascending horizon stamps (stamps[0] must be 0)."""
    grid.validate_for_weno()
    stamps = np.asarray(stamps, dtype=float)
    if stamps.size == 0 or stamps[0] != 0.0 or np.any(np.diff(stamps) <= 0):
        raise ValueError("stamps must be ascending and start at 0")
    target_values = np.broadcast_to(np.asarray(target_values, dtype=float), grid.shape)
    obstacle = np.broadcast_to(np.asarray(constraint_values, dtype=float), grid.shape)
    v = np.maximum(target_values, obstacle)
    out = np.empty((stamps.size, *grid.shape), dtype=np.float32)
    out[0] = v.astype(np.float32)
    dt_cfl = cfl_timestep(grid, hamiltonian.dissipation(), settings.cfl_number, settings.max_dt)
    t = 0.0
    for j in range(1, stamps.size):
        stop = stamps[j]
        while t < stop - 1e-13 * max(1.0, stop):
            dt = min(dt_cfl, stop - t)
            v = lax_friedrichs_step(v, grid, hamiltonian, obstacle, dt, settings.cfl_number, settings.max_dt)
            t += dt
            if not np.all(np.isfinite(v)):
                raise NumericalAbort("non-finite value-function entries", horizon=t)
        t = float(stop)
        out[j] = v.astype(np.float32)
    return ValueField(grid=grid, times=stamps, data=out)


# --- scenario-level drivers -------------------------------------------------


def resolve_target_tolerances(scenario: Scenario, grid: GridSpec) -> Scenario:
    """Fill unset target tolerance widths with one grid spacing per
    coordinate (SI units); a sub-grid target would be invisible."""
    t = scenario.target_orbit
    if t.resolved:
        return scenario
    n = scenario.normalization
    dx = grid.spacings
    return scenario.with_target_tolerances(
        radius_m=t.radius_tolerance_m or dx[0] * n.length_scale_m,
        vrho_mps=t.radial_velocity_tolerance_mps or dx[1] * n.velocity_scale_mps,
        vt_mps=t.tangential_velocity_tolerance_mps or dx[2] * n.velocity_scale_mps,
    )


def _state_bounds(grid: GridSpec):
    return tuple((ax.minimum, ax.maximum) for ax in grid.axes)


def build_grid_hamiltonian(scenario: Scenario, grid: GridSpec, running_cost=None) -> GridHamiltonian:
    problem = PlanarProblem(scenario)
    coords = grid.broadcast_coordinates()
    return GridHamiltonian(
        PlanarHamiltonian(problem), coords, _state_bounds(grid), running_cost=running_cost
    )


def solve_value_function(
    scenario: Scenario,
    grid: GridSpec,
    horizon: float,
    stamp_count: int,
    settings: SolverSettings = SolverSettings(),
) -> ValueField:
    """Backward-reachability value function on a planar
    (rho, v_rho, v_t, dm) grid, slices at `stamp_count` uniform stamps."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if stamp_count < 2:
        raise ValueError(f"stamp_count must be at least 2, got {stamp_count}")
    scenario = resolve_target_tolerances(scenario, grid)
    rho, vrho, vt, dm = grid.broadcast_coordinates()
    g = scenario.constraint_levelset(rho, vrho, vt, dm)
    nu = scenario.target_levelset(rho, vrho, vt, dm)
    ham = build_grid_hamiltonian(scenario, grid)
    stamps = np.linspace(0.0, horizon, stamp_count)
    return march(grid, nu, g, ham, stamps, settings)


def solve_bolza_value_function(
    scenario: Scenario,
    grid: GridSpec,
    bolza: BolzaSpec,
    horizon: float,
    stamp_count: int,
    settings: SolverSettings = SolverSettings(),
) -> ValueField:
    """Auxiliary-state value function on a (rho, v_rho, v_t, dm, z_1..z_p)
    grid; terminal condition max_i(J_t^i - z^i) v nu v g."""
    if grid.ndim != 4 + bolza.dimension:
        raise ValueError(
            f"grid has {grid.ndim} axes; need 4 + {bolza.dimension} for this objective"
        )
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    scenario = resolve_target_tolerances(scenario, grid)
    coords = grid.broadcast_coordinates()
    rho, vrho, vt, dm = coords[:4]
    g = scenario.constraint_levelset(rho, vrho, vt, dm)
    nu = scenario.target_levelset(rho, vrho, vt, dm)
    terminal = np.broadcast_to(np.maximum(nu, g), grid.shape).copy()
    j_t = bolza.terminal_cost(rho, vrho, vt, dm)
    for i in range(bolza.dimension):
        terminal = np.maximum(terminal, j_t[i] - coords[4 + i])
    ham = build_grid_hamiltonian(scenario, grid, running_cost=bolza.running)
    stamps = np.linspace(0.0, horizon, stamp_count)
    return march(grid, terminal, g, ham, stamps, settings)
