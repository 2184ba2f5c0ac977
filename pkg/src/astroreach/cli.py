"""Command-line surface: solve / bolza-solve / trajectory / pareto / info.

Exit codes: 0 ok, 2 config error, 3 infeasible start, 4 empty front,
5 numerical abort.  The ASTROREACH_MAX_WORKERS environment variable caps the
Pareto scan's worker parallelism.
"""
from __future__ import annotations

import argparse
import resource
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    AstroreachError,
    CFLViolation,
    ConfigError,
    EmptyFrontError,
    FieldFormatError,
    InfeasibleStartError,
    NumericalAbort,
)
from .io import (
    load_config,
    read_field,
    read_manifest,
    resolved_scenario_text,
    write_field,
    write_front_csv,
    write_manifest,
    write_trajectory_csv,
)
from .pareto import bolza_front, mayer_front
from .solver import (
    resolve_target_tolerances,
    solve_bolza_value_function,
    solve_value_function,
)
from .trajectory import reconstruct, smooth_controls

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_EMPTY_FRONT = 4
EXIT_NUMERICAL = 5


def _peak_memory_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _cmd_solve(args, bolza: bool) -> int:
    config = load_config(args.config)
    started = time.perf_counter()
    if bolza:
        if config.bolza is None:
            raise ConfigError(f"{args.config}: bolza-solve needs a [bolza] section")
        grid = config.bolza_grid()
        scenario = resolve_target_tolerances(config.scenario, grid)
        field = solve_bolza_value_function(
            scenario,
            grid,
            config.bolza.spec(),
            config.horizon_normalized,
            config.stamp_count,
            config.settings,
        )
        kind = "bolza"
    else:
        grid = config.grid
        scenario = resolve_target_tolerances(config.scenario, grid)
        field = solve_value_function(
            scenario, grid, config.horizon_normalized, config.stamp_count, config.settings
        )
        kind = "mayer"
    elapsed = time.perf_counter() - started
    out = Path(args.out)
    write_field(field, out)
    bytes_written = out.stat().st_size
    write_manifest(
        out.with_suffix(out.suffix + ".manifest.json"),
        config,
        scenario,
        out,
        kind,
        timings={"solve_seconds": elapsed},
        grid=grid,
    )
    print(resolved_scenario_text(scenario, grid, config.horizon_normalized))
    print(
        f"solved {kind} field: {field.times.size} stamps, {bytes_written} bytes, "
        f"wall {elapsed:.1f} s, peak memory {_peak_memory_mb():.0f} MB"
    )
    return EXIT_OK


def _cmd_trajectory(args) -> int:
    config = load_config(args.config)
    field = read_field(args.field)
    scenario = resolve_target_tolerances(config.scenario, field.grid)
    n = scenario.normalization
    r0 = scenario.initial_state_normalized(args.dm0_kg)
    t_f = args.tf_s / n.time_scale_s
    traj = reconstruct(
        field, scenario, r0, t_f, n_steps=args.steps, force=args.force
    )
    if args.smooth_window > 1:
        traj = smooth_controls(traj, args.smooth_window)
    write_trajectory_csv(traj, scenario, args.out)
    miss = traj.terminal_miss
    burned = (traj.states[0, 4] - traj.states[-1, 4]) * n.mass_scale_kg
    print(f"trajectory written to {args.out} ({len(traj.times)} samples)")
    print(f"  start value        {traj.start_margin: .6g}")
    print(f"  |rho - target|     {miss['radius_m']:.4g} m")
    print(f"  |vrho - target|    {miss['radial_velocity_mps']:.4g} m/s")
    print(f"  |vt - target|      {miss['tangential_velocity_mps']:.4g} m/s")
    print(f"  propellant burned  {burned * 1e3:.4g} g")
    print(f"  max g along path   {traj.max_constraint_violation: .6g}")
    if traj.aborted:
        print(f"  ABORTED: {traj.abort_reason}")
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_pareto(args) -> int:
    config = load_config(args.config)
    field = read_field(args.field)
    scenario = resolve_target_tolerances(config.scenario, field.grid)
    if args.bolza:
        if config.bolza is None:
            raise ConfigError(f"{args.config}: --bolza needs a [bolza] section")
        if config.pareto is None:
            raise ConfigError(f"{args.config}: pareto needs a [pareto] section")
        result = bolza_front(
            field,
            scenario,
            config.bolza.initial_propellant_kg,
            config.pareto.tf_values(),
            config.bolza.z_min_kg,
            config.bolza.z_max_kg,
        )
    else:
        if config.pareto is None:
            raise ConfigError(f"{args.config}: pareto needs a [pareto] section")
        result = mayer_front(
            field,
            scenario,
            config.pareto.dm_values(),
            config.pareto.tf_values(),
            refine=config.pareto.refine,
        )
    if result.is_empty:
        raise EmptyFrontError(
            f"no feasible candidate in the scanned bounds {result.provenance}"
        )
    paths = write_front_csv(result, scenario, args.out)
    print(
        f"front: {result.front_indices.size} points of {result.objectives.shape[0]} candidates"
    )
    for key, value in paths.items():
        print(f"  {key}: {value}")
    return EXIT_OK


def _cmd_info(args) -> int:
    field = read_field(args.field)
    names = ["rho", "v_rho", "v_t", "dm"] + [f"z{i}" for i in range(1, field.grid.ndim - 3)]
    print(f"{args.field}: {field.grid.ndim} dimensions, {field.times.size} stamps")
    for name, ax in zip(names, field.grid.axes):
        print(
            f"  {name:<6} [{ax.minimum:.6g}, {ax.maximum:.6g}] x {ax.points}"
            f"{' (periodic)' if ax.periodic else ''}"
        )
    if field.times.size:
        print(f"  horizon [0, {field.horizon:.6g}] normalized")
    print(f"  data {field.data.nbytes} bytes float32")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="astroreach",
        description="Reachability-based low-thrust transfer design around rotating asteroids",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute the reachability value function")
    solve.add_argument("--config", required=True)
    solve.add_argument("--out", required=True, help="output HJVF1 field path")

    bsolve = sub.add_parser("bolza-solve", help="compute the auxiliary-state value function")
    bsolve.add_argument("--config", required=True)
    bsolve.add_argument("--out", required=True, help="output HJVF1 field path")

    traj = sub.add_parser("trajectory", help="reconstruct one transfer trajectory")
    traj.add_argument("--field", required=True)
    traj.add_argument("--config", required=True)
    traj.add_argument("--dm0-kg", type=float, required=True, dest="dm0_kg")
    traj.add_argument("--tf-s", type=float, required=True, dest="tf_s")
    traj.add_argument("--steps", type=int, default=4000)
    traj.add_argument("--smooth-window", type=int, default=1)
    traj.add_argument("--force", action="store_true", help="reconstruct from an infeasible start")
    traj.add_argument("--out", required=True, help="output trajectory CSV path")

    par = sub.add_parser("pareto", help="scan and filter the Pareto front")
    par.add_argument("--field", required=True)
    par.add_argument("--config", required=True)
    par.add_argument("--bolza", action="store_true", help="scan the auxiliary-state front")
    par.add_argument("--out", required=True, help="output prefix for front files")

    info = sub.add_parser("info", help="print a field file header")
    info.add_argument("--field", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args, bolza=False)
        if args.command == "bolza-solve":
            return _cmd_solve(args, bolza=True)
        if args.command == "trajectory":
            return _cmd_trajectory(args)
        if args.command == "pareto":
            return _cmd_pareto(args)
        if args.command == "info":
            return _cmd_info(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleStartError as exc:
        print(f"infeasible start: {exc} (use --force to override)", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EmptyFrontError as exc:
        print(f"empty front: {exc}", file=sys.stderr)
        return EXIT_EMPTY_FRONT
    except (NumericalAbort, CFLViolation) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FieldFormatError, AstroreachError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
