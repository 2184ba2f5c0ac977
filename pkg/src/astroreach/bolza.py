"""Auxiliary-state machinery for objectives in Bolza form.

A p-dimensional objective J = J_t(r(0)) + integral of J_r is reduced to a
terminal-only form by appending auxiliary states z with dz/ds = -J_r along
the trajectory, anchored at the optimization parameter z0 at the start of the
transfer; the terminal payoff max_i(J_t^i(r(0)) - z^i(0)) is then <= 0
exactly when the Bolza cost is bounded by z0.

Cost shapes are restricted to closed forms (terminal affine in the normalized
state, running cost affine in throttle) so the augmented Hamiltonian
minimization stays analytic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import PlanarProblem
from .hamiltonian import BolzaRunningCost

__all__ = ["BolzaSpec", "BolzaRunningCost", "remaining_propellant_objective", "augmented_rhs"]


@dataclass(frozen=True)
class BolzaSpec:
    """Affine Bolza objective: J_t^i(r) = terminal_coeff[i] . r + terminal_base[i],
    J_r^i(r, u) = running.base[i] + running.slope[i] * throttle."""

    terminal_coeff: np.ndarray  # (p, 4) on the normalized (rho, v_rho, v_t, dm) state
    terminal_base: np.ndarray  # (p,)
    running: BolzaRunningCost
    name: str = "custom"

    def __post_init__(self):
        coeff = np.atleast_2d(np.asarray(self.terminal_coeff, dtype=float))
        base = np.atleast_1d(np.asarray(self.terminal_base, dtype=float))
        if coeff.shape != (base.size, 4):
            raise ValueError(f"terminal_coeff must be (p, 4), got {coeff.shape}")
        if self.running.dimension != base.size:
            raise ValueError("running-cost dimension must match the terminal cost")
        object.__setattr__(self, "terminal_coeff", coeff)
        object.__setattr__(self, "terminal_base", base)

    @property
    def dimension(self) -> int:
        return self.terminal_base.size

    @property
    def lipschitz_terminal(self) -> float:
        """Lipschitz constant of J_t in the normalized max-metric."""
        return float(np.max(np.sum(np.abs(self.terminal_coeff), axis=1)))

    @property
    def lipschitz_running(self) -> float:
        """State-Lipschitz constant of J_r (zero: affine in throttle only)."""
        return 0.0

    def terminal_cost(self, rho, vrho, vt, dm) -> list:
        """Per-component terminal cost arrays, broadcast over the inputs."""
        state = (rho, vrho, vt, dm)
        out = []
        for i in range(self.dimension):
            acc = self.terminal_base[i]
            for j in range(4):
                if self.terminal_coeff[i, j] != 0.0:
                    acc = acc + self.terminal_coeff[i, j] * np.asarray(state[j], dtype=float)
            out.append(np.asarray(acc, dtype=float))
        return out

    def running_cost(self, throttle) -> np.ndarray:
        """J_r vector at the given throttle, shape (p, ...)."""
        throttle = np.asarray(throttle, dtype=float)
        return self.running.base[(...,) + (None,) * throttle.ndim] * np.ones_like(throttle) + (
            self.running.slope[(...,) + (None,) * throttle.ndim] * throttle
        )


def remaining_propellant_objective() -> BolzaSpec:
    """Maximize remaining propellant: p = 1, J_t = -dm, J_r = 0.

    The auxiliary bound z0 is then an upper bound on the negated final
    propellant, i.e. -z0 a lower bound on what remains.
    """
    return BolzaSpec(
        terminal_coeff=np.array([[0.0, 0.0, 0.0, -1.0]]),
        terminal_base=np.zeros(1),
        running=BolzaRunningCost(base=np.zeros(1), slope=np.zeros(1)),
        name="remaining_propellant",
    )


def augmented_rhs(problem: PlanarProblem, spec: BolzaSpec, state, alpha, throttle) -> np.ndarray:
    """Derivative of the augmented state [rho, v_rho, v_t, dm, z_1..z_p]."""
    state = np.asarray(state, dtype=float)
    if state.shape[0] != 4 + spec.dimension:
        raise ValueError(f"state length {state.shape[0]} != 4 + {spec.dimension}")
    d_state = problem.rhs(state[:4], alpha, throttle)
    d_aux = -spec.running_cost(np.asarray(throttle, dtype=float))
    return np.concatenate([d_state, np.broadcast_to(d_aux, (spec.dimension, *d_state.shape[1:]))])
