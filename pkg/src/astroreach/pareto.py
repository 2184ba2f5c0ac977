"""Pareto sets and fronts over value-field feasibility.

Feasibility of a candidate (r0, t_f) is the sign of the interpolated value
function; the fronts are built by a deterministic lattice scan, optional
bisection refinement of the feasibility boundary, and strict non-dominance
filtering (a point is dominated only by one strictly smaller in every
objective).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import ValueField
from .model import Scenario

__all__ = [
    "ParetoResult",
    "feasible",
    "nondominated_filter",
    "mayer_front",
    "bolza_front",
]

BISECTION_MARGIN_TOL = 1e-3  # |interpolated value| at returned boundary points


@dataclass
class ParetoResult:
    """Scan candidates, their objective vectors, and the non-dominated subset.

    Objectives are SI: J1 in kg (initial propellant, or the Bolza cost bound
    z0), J2 in seconds.  States and transfer times stay normalized for
    downstream reconstruction.
    """

    objectives: np.ndarray  # (n, 2)
    states: np.ndarray  # (n, 4) normalized initial states
    transfer_times: np.ndarray  # (n,) normalized
    margins: np.ndarray  # (n,) interpolated field value at the candidate
    front_indices: np.ndarray  # indices into the candidate arrays
    aux_bounds: np.ndarray | None = None  # (n,) z0 in kg for Bolza fronts
    provenance: dict = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return self.objectives.shape[0] == 0

    @property
    def front(self) -> np.ndarray:
        return self.objectives[self.front_indices]


def feasible(field_: ValueField, r0, t_f: float) -> tuple[bool, float]:
    """Whether the interpolated value at (r0, t_f) is <= 0, plus the margin."""
    margin = float(field_.value(np.asarray(r0, dtype=float), t_f, strict=True))
    return margin <= 0.0, margin


def nondominated_filter(objectives, weak: bool = False) -> np.ndarray:
    """Indices of the non-dominated points, ordered by the first objective
    (ties keep input order).

    Strict dominance: b dominates a iff b < a in every component.  With
    `weak`, b dominates a iff b <= a componentwise and b != a (useful for
    plotting staircase fronts).
    """
    obj = np.asarray(objectives, dtype=float)
    if obj.ndim != 2:
        raise ValueError("objectives must be a 2-d array of objective vectors")
    n = obj.shape[0]
    if n == 0:
        return np.empty(0, dtype=int)
    if obj.shape[1] == 2:
        keep = _nondominated_2d(obj, weak)
    else:
        keep = _nondominated_pairwise(obj, weak)
    order = np.lexsort((np.arange(n), obj[:, 0]))
    return order[keep[order]]


def _nondominated_2d(obj: np.ndarray, weak: bool) -> np.ndarray:
    n = obj.shape[0]
    order = np.lexsort((np.arange(n), obj[:, 1], obj[:, 0]))
    keep = np.ones(n, dtype=bool)
    best_prev = np.inf  # min J2 over strictly smaller J1
    i = 0
    j1_sorted = obj[order, 0]
    while i < n:
        j = i
        group_min = np.inf
        while j < n and j1_sorted[j] == j1_sorted[i]:
            idx = order[j]
            a2 = obj[idx, 1]
            if weak:
                dominated = best_prev <= a2 or group_min < a2
            else:
                dominated = best_prev < a2
            keep[idx] = not dominated
            group_min = min(group_min, a2)
            j += 1
        best_prev = min(best_prev, group_min)
        i = j
    return keep


def _nondominated_pairwise(obj: np.ndarray, weak: bool) -> np.ndarray:
    n = obj.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if weak:
            dominated = np.any(
                np.all(obj <= obj[i], axis=1) & np.any(obj < obj[i], axis=1)
            )
        else:
            dominated = np.any(np.all(obj < obj[i], axis=1))
        keep[i] = not dominated
    return keep


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("ASTROREACH_MAX_WORKERS")
    return max(1, int(env)) if env else 1


def _bisect_margin(eval_margin, x_infeasible: float, x_feasible: float, tol: float = BISECTION_MARGIN_TOL):
    """Bisection on a bracket with eval(x_infeasible) > 0 >= eval(x_feasible).

    Endpoints may come in either numeric order.  Returns (x, margin) on the
    feasible side with |margin| <= tol (or the tightest point once the
    bracket collapses).
    """
    m_good = eval_margin(x_feasible)
    for _ in range(200):
        if abs(m_good) <= tol or abs(x_feasible - x_infeasible) <= 1e-15 * max(1.0, abs(x_feasible)):
            break
        mid = 0.5 * (x_infeasible + x_feasible)
        m_mid = eval_margin(mid)
        if m_mid <= 0.0:
            x_feasible, m_good = mid, m_mid
        else:
            x_infeasible = mid
    return x_feasible, m_good


def mayer_front(
    field_: ValueField,
    scenario: Scenario,
    dm_values_kg,
    tf_values_s,
    refine: bool = True,
    workers: int | None = None,
) -> ParetoResult:
    """Front of (initial propellant, transfer time) for the fixed initial orbit.

    Scans the (dm, t_f) lattice, keeps feasible points, optionally bisects
    every feasibility sign change along dm to the interpolated boundary, and
    returns the strictly non-dominated subset.  An empty feasible set yields
    an empty result whose provenance records the scan bounds and the best
    margin seen.
    """
    n = scenario.normalization
    dm_values_kg = np.asarray(dm_values_kg, dtype=float)
    tf_values_s = np.asarray(tf_values_s, dtype=float)
    tf_norm_values = tf_values_s / n.time_scale_s
    if np.any(tf_norm_values > field_.horizon + 1e-12):
        raise ValueError("transfer-time scan exceeds the field horizon")
    dm_norm = dm_values_kg / n.mass_scale_kg
    base = scenario.initial_state_normalized(0.0)

    def scan_column(tf_norm: float):
        pts = np.tile(base, (dm_norm.size, 1))
        pts[:, 3] = dm_norm
        margins = np.asarray(field_.value(pts, tf_norm), dtype=float)
        rows = []
        for i in range(dm_norm.size):
            if margins[i] <= 0.0:
                rows.append((dm_norm[i], margins[i]))
        if refine:

            def margin_at(dm):
                p = base.copy()
                p[3] = dm
                return float(field_.value(p, tf_norm))

            for i in range(dm_norm.size - 1):
                lo_m, hi_m = margins[i], margins[i + 1]
                if lo_m > 0.0 >= hi_m:
                    rows.append(_bisect_margin(margin_at, dm_norm[i], dm_norm[i + 1]))
                elif hi_m > 0.0 >= lo_m:
                    rows.append(_bisect_margin(margin_at, dm_norm[i + 1], dm_norm[i]))
        return rows

    count = _worker_count(workers)
    if count > 1:
        with ThreadPoolExecutor(max_workers=count) as pool:
            columns = list(pool.map(scan_column, tf_norm_values))
    else:
        columns = [scan_column(tf) for tf in tf_norm_values]

    objectives, states, tfs, margins = [], [], [], []
    best_margin = np.inf
    for tf_norm, tf_s, rows in zip(tf_norm_values, tf_values_s, columns):
        for dm, margin in rows:
            p = base.copy()
            p[3] = dm
            objectives.append((dm * n.mass_scale_kg, tf_s))
            states.append(p)
            tfs.append(tf_norm)
            margins.append(margin)
            best_margin = min(best_margin, margin)
    provenance = {
        "kind": "mayer",
        "dm_range_kg": (float(dm_values_kg.min()), float(dm_values_kg.max())),
        "tf_range_s": (float(tf_values_s.min()), float(tf_values_s.max())),
        "scan_shape": (int(dm_values_kg.size), int(tf_values_s.size)),
        "refined": bool(refine),
        "best_margin": None if not np.isfinite(best_margin) else float(best_margin),
    }
    if not objectives:
        empty = np.empty((0, 2))
        return ParetoResult(
            objectives=empty,
            states=np.empty((0, 4)),
            transfer_times=np.empty(0),
            margins=np.empty(0),
            front_indices=np.empty(0, dtype=int),
            provenance=provenance,
        )
    objectives = np.asarray(objectives)
    result = ParetoResult(
        objectives=objectives,
        states=np.asarray(states),
        transfer_times=np.asarray(tfs),
        margins=np.asarray(margins),
        front_indices=nondominated_filter(objectives),
        provenance=provenance,
    )
    return result


def bolza_front(
    field_: ValueField,
    scenario: Scenario,
    initial_propellant_kg: float,
    tf_values_s,
    z_min_kg: float,
    z_max_kg: float,
    workers: int | None = None,
) -> ParetoResult:
    """Front of (cost bound z0, transfer time) at fixed initial propellant.

    For each transfer time the minimal feasible z0 is located by bisection on
    the interpolated auxiliary value function (monotone non-increasing in z0
    by the terminal condition and the comparison principle; this is property
    tested, not assumed blindly).
    """
    n = scenario.normalization
    tf_values_s = np.asarray(tf_values_s, dtype=float)
    tf_norm_values = tf_values_s / n.time_scale_s
    if np.any(tf_norm_values > field_.horizon + 1e-12):
        raise ValueError("transfer-time scan exceeds the field horizon")
    if not z_min_kg < z_max_kg:
        raise ValueError(f"need z_min_kg < z_max_kg, got {z_min_kg}, {z_max_kg}")
    base = scenario.initial_state_normalized(initial_propellant_kg)
    z_lo = z_min_kg / n.mass_scale_kg
    z_hi = z_max_kg / n.mass_scale_kg

    def column(tf_norm: float):
        def margin_at(z):
            p = np.concatenate([base, [z]])
            return float(field_.value(p, tf_norm))

        m_hi = margin_at(z_hi)
        if m_hi > 0.0:
            return None  # infeasible even with the loosest bound
        m_lo = margin_at(z_lo)
        if m_lo <= 0.0:
            return z_lo, m_lo  # already feasible at the scan edge
        z_star, m_star = _bisect_margin(margin_at, z_lo, z_hi)
        return z_star, m_star

    count = _worker_count(workers)
    if count > 1:
        with ThreadPoolExecutor(max_workers=count) as pool:
            results = list(pool.map(column, tf_norm_values))
    else:
        results = [column(tf) for tf in tf_norm_values]

    objectives, states, tfs, margins, zs = [], [], [], [], []
    for tf_norm, tf_s, res in zip(tf_norm_values, tf_values_s, results):
        if res is None:
            continue
        z_star, margin = res
        objectives.append((z_star * n.mass_scale_kg, tf_s))
        states.append(base.copy())
        tfs.append(tf_norm)
        margins.append(margin)
        zs.append(z_star * n.mass_scale_kg)
    provenance = {
        "kind": "bolza",
        "initial_propellant_kg": float(initial_propellant_kg),
        "z_range_kg": (float(z_min_kg), float(z_max_kg)),
        "tf_range_s": (float(tf_values_s.min()), float(tf_values_s.max())),
        "scan_shape": (int(tf_values_s.size),),
    }
    if not objectives:
        return ParetoResult(
            objectives=np.empty((0, 2)),
            states=np.empty((0, 4)),
            transfer_times=np.empty(0),
            margins=np.empty(0),
            front_indices=np.empty(0, dtype=int),
            aux_bounds=np.empty(0),
            provenance=provenance,
        )
    objectives = np.asarray(objectives)
    return ParetoResult(
        objectives=objectives,
        states=np.asarray(states),
        transfer_times=np.asarray(tfs),
        margins=np.asarray(margins),
        front_indices=nondominated_filter(objectives),
        aux_bounds=np.asarray(zs),
        provenance=provenance,
    )
