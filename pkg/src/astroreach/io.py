"""Scenario configuration files, value-field persistence, and result emission.

Config files are INI-style key/value text with explicit units in key names
(see the shipped configs/ for a template).  Value fields use the HJVF1
container: an ASCII header (magic, per-axis extents, horizon stamps) followed
by raw little-endian float32 slices in row-major order, one per stamp.  All
emitted physical quantities are denormalized SI.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bolza import BolzaSpec, remaining_propellant_objective
from .errors import ConfigError, FieldFormatError
from .grid import GridAxis, GridSpec, ValueField
from .gravity import load_gravity_profile
from .model import (
    AsteroidParams,
    InitialOrbit,
    Normalization,
    Scenario,
    SpacecraftParams,
    TargetOrbit,
)
from .pareto import ParetoResult
from .solver import SolverSettings
from .trajectory import Trajectory

__all__ = [
    "RunConfig",
    "load_config",
    "write_field",
    "read_field",
    "write_manifest",
    "read_manifest",
    "scenario_digest",
    "resolved_scenario_text",
    "write_trajectory_csv",
    "write_front_csv",
]

FIELD_MAGIC = b"HJVF1\n"

_OBJECTIVES = {"remaining_propellant": remaining_propellant_objective}


# --- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class ParetoScan:
    dm_min_kg: float
    dm_max_kg: float
    dm_count: int
    tf_min_seconds: float
    tf_max_seconds: float
    tf_count: int
    refine: bool = True

    def dm_values(self) -> np.ndarray:
        return np.linspace(self.dm_min_kg, self.dm_max_kg, self.dm_count)

    def tf_values(self) -> np.ndarray:
        return np.linspace(self.tf_min_seconds, self.tf_max_seconds, self.tf_count)


@dataclass(frozen=True)
class BolzaConfig:
    objective: str
    z_min_kg: float
    z_max_kg: float
    z_points: int
    initial_propellant_kg: float

    def spec(self) -> BolzaSpec:
        try:
            return _OBJECTIVES[self.objective]()
        except KeyError:
            raise ConfigError(
                f"section [bolza]: unknown objective '{self.objective}' "
                f"(available: {sorted(_OBJECTIVES)})"
            ) from None

    def z_axis(self, mass_scale_kg: float) -> GridAxis:
        return GridAxis(self.z_min_kg / mass_scale_kg, self.z_max_kg / mass_scale_kg, self.z_points)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs: scenario, grid, solver, and scan settings."""

    scenario: Scenario
    grid: GridSpec
    horizon_seconds: float
    stamp_count: int
    settings: SolverSettings
    pareto: ParetoScan | None = None
    bolza: BolzaConfig | None = None
    source_path: str | None = None

    @property
    def horizon_normalized(self) -> float:
        return self.horizon_seconds / self.scenario.normalization.time_scale_s

    def bolza_grid(self) -> GridSpec:
        if self.bolza is None:
            raise ConfigError("config has no [bolza] section")
        z_axis = self.bolza.z_axis(self.scenario.normalization.mass_scale_kg)
        return GridSpec(axes=(*self.grid.axes, z_axis))


class _Section:
    """Typed access to one config section with key-precise error messages."""

    def __init__(self, parser: configparser.ConfigParser, name: str, path: str):
        self.name = name
        self.path = path
        if not parser.has_section(name):
            raise ConfigError(f"{path}: missing required section [{name}]")
        self.raw = dict(parser.items(name))
        self.seen: set[str] = set()

    def _fetch(self, key: str, required: bool, default):
        self.seen.add(key)
        if key not in self.raw:
            if required:
                raise ConfigError(f"{self.path}: section [{self.name}]: missing required key '{key}'")
            return default
        return self.raw[key]

    def number(self, key: str, required: bool = True, default: float | None = None) -> float | None:
        text = self._fetch(key, required, None)
        if text is None:
            return default
        try:
            return float(text)
        except ValueError:
            raise ConfigError(
                f"{self.path}: section [{self.name}]: key '{key}' is not a number: {text!r}"
            ) from None

    def integer(self, key: str, required: bool = True, default: int | None = None) -> int | None:
        value = self.number(key, required, None)
        if value is None:
            return default
        if value != int(value):
            raise ConfigError(f"{self.path}: section [{self.name}]: key '{key}' must be an integer")
        return int(value)

    def flag(self, key: str, default: bool) -> bool:
        text = self._fetch(key, False, None)
        if text is None:
            return default
        lowered = str(text).strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.path}: section [{self.name}]: key '{key}' must be a boolean")

    def text(self, key: str, required: bool = True, default: str | None = None) -> str | None:
        value = self._fetch(key, required, None)
        return default if value is None else str(value).strip()

    def reject_unknown(self):
        unknown = set(self.raw) - self.seen
        if unknown:
            raise ConfigError(
                f"{self.path}: section [{self.name}]: unknown keys {sorted(unknown)}"
            )


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a scenario config file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    where = str(path)

    sc = _Section(parser, "spacecraft", where)
    spacecraft = SpacecraftParams(
        dry_mass_kg=sc.number("dry_mass_kg"),
        max_thrust_newton=sc.number("max_thrust_newton"),
        exhaust_velocity_mps=sc.number("exhaust_velocity_mps"),
        max_propellant_kg=sc.number("max_propellant_kg"),
    )
    sc.reject_unknown()

    ast = _Section(parser, "asteroid", where)
    try:
        asteroid = AsteroidParams.from_orbital_data(
            mass_kg=ast.number("mass_kg"),
            sun_mass_kg=ast.number("sun_mass_kg"),
            semi_major_axis_m=ast.number("semi_major_axis_m"),
            spin_rate_rad_s=ast.number("spin_rate_rad_s"),
            rho_min_m=ast.number("rho_min_m"),
            gravitational_parameter_m3s2=ast.number("gravitational_parameter_m3s2", required=False),
            rho_max_m=ast.number("rho_max_m", required=False),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: section [asteroid]: {exc}") from None
    gravity_file = ast.text("gravity_profile_file", required=False)
    ast.reject_unknown()
    gravity = None
    if gravity_file:
        profile_path = Path(gravity_file)
        if not profile_path.is_absolute():
            profile_path = path.parent / profile_path
        try:
            gravity = load_gravity_profile(profile_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}: gravity_profile_file: {exc}") from None

    ini = _Section(parser, "initial_orbit", where)
    initial = InitialOrbit(
        radius_m=ini.number("radius_m"),
        radial_velocity_mps=ini.number("radial_velocity_mps"),
        tangential_velocity_mps=ini.number("tangential_velocity_mps"),
    )
    ini.reject_unknown()

    tgt = _Section(parser, "target_orbit", where)
    target = TargetOrbit(
        radius_m=tgt.number("radius_m"),
        radial_velocity_mps=tgt.number("radial_velocity_mps"),
        tangential_velocity_mps=tgt.number("tangential_velocity_mps"),
        radius_tolerance_m=tgt.number("radius_tolerance_m", required=False),
        radial_velocity_tolerance_mps=tgt.number("radial_velocity_tolerance_mps", required=False),
        tangential_velocity_tolerance_mps=tgt.number("tangential_velocity_tolerance_mps", required=False),
    )
    tgt.reject_unknown()

    nrm = _Section(parser, "normalization", where)
    normalization = Normalization.for_spacecraft(
        spacecraft,
        length_scale_m=nrm.number("length_scale_m"),
        velocity_scale_mps=nrm.number("velocity_scale_mps"),
        mass_scale_kg=nrm.number("mass_scale_kg", required=False, default=1.0),
    )
    nrm.reject_unknown()

    try:
        scenario = Scenario(
            spacecraft=spacecraft,
            asteroid=asteroid,
            initial_orbit=initial,
            target_orbit=target,
            normalization=normalization,
            gravity=gravity,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None

    grd = _Section(parser, "grid", where)
    mass_scale = normalization.mass_scale_kg
    axes = (
        GridAxis(grd.number("rho_min_norm"), grd.number("rho_max_norm"), grd.integer("rho_points")),
        GridAxis(grd.number("vrho_min_norm"), grd.number("vrho_max_norm"), grd.integer("vrho_points")),
        GridAxis(grd.number("vt_min_norm"), grd.number("vt_max_norm"), grd.integer("vt_points")),
        GridAxis(
            grd.number("dm_min_kg") / mass_scale,
            grd.number("dm_max_kg") / mass_scale,
            grd.integer("dm_points"),
        ),
    )
    grd.reject_unknown()
    grid = GridSpec(axes=axes)

    sol = _Section(parser, "solver", where)
    horizon_seconds = sol.number("horizon_seconds")
    stamp_count = sol.integer("stamp_count")
    settings = SolverSettings(
        cfl_number=sol.number("cfl_number", required=False, default=0.5),
        max_dt=sol.number("max_dt_norm", required=False, default=1e-2),
    )
    sol.reject_unknown()
    if horizon_seconds <= 0:
        raise ConfigError(f"{where}: section [solver]: horizon_seconds must be positive")
    if stamp_count < 2:
        raise ConfigError(f"{where}: section [solver]: stamp_count must be at least 2")

    pareto = None
    if parser.has_section("pareto"):
        par = _Section(parser, "pareto", where)
        pareto = ParetoScan(
            dm_min_kg=par.number("dm_min_kg"),
            dm_max_kg=par.number("dm_max_kg"),
            dm_count=par.integer("dm_count"),
            tf_min_seconds=par.number("tf_min_seconds"),
            tf_max_seconds=par.number("tf_max_seconds"),
            tf_count=par.integer("tf_count"),
            refine=par.flag("refine", default=True),
        )
        par.reject_unknown()

    bolza = None
    if parser.has_section("bolza"):
        bol = _Section(parser, "bolza", where)
        bolza = BolzaConfig(
            objective=bol.text("objective"),
            z_min_kg=bol.number("z_min_kg"),
            z_max_kg=bol.number("z_max_kg"),
            z_points=bol.integer("z_points"),
            initial_propellant_kg=bol.number("initial_propellant_kg"),
        )
        bol.reject_unknown()
        bolza.spec()  # validate the objective name eagerly

    return RunConfig(
        scenario=scenario,
        grid=grid,
        horizon_seconds=horizon_seconds,
        stamp_count=stamp_count,
        settings=settings,
        pareto=pareto,
        bolza=bolza,
        source_path=str(path),
    )


# --- value-field container ---------------------------------------------------


def write_field(field: ValueField, path: str | Path) -> None:
    """Write a field in the HJVF1 container (bit-exact round trip)."""
    path = Path(path)
    with open(path, "wb") as handle:
        handle.write(FIELD_MAGIC)
        handle.write(f"{field.grid.ndim}\n".encode())
        for ax in field.grid.axes:
            handle.write(f"{ax.minimum!r} {ax.maximum!r} {ax.points} {int(ax.periodic)}\n".encode())
        handle.write(f"{field.times.size}\n".encode())
        for stamp in field.times:
            handle.write(f"{float(stamp)!r}\n".encode())
        data = np.ascontiguousarray(field.data, dtype=np.float32)
        if data.dtype.byteorder == ">":  # pragma: no cover - big-endian hosts
            data = data.astype("<f4")
        handle.write(data.tobytes())


def read_field(path: str | Path) -> ValueField:
    """Read an HJVF1 field; structured errors name the failing byte offset."""
    path = Path(path)
    blob = path.read_bytes()
    if not blob.startswith(FIELD_MAGIC):
        raise FieldFormatError(f"{path}: bad magic, expected {FIELD_MAGIC!r}", byte_offset=0)
    offset = len(FIELD_MAGIC)

    def read_line() -> str:
        nonlocal offset
        end = blob.find(b"\n", offset)
        if end < 0:
            raise FieldFormatError(f"{path}: truncated header", byte_offset=offset)
        line = blob[offset:end].decode("ascii", errors="replace")
        offset = end + 1
        return line

    try:
        ndim = int(read_line())
        axes = []
        for _ in range(ndim):
            lo, hi, count, periodic = read_line().split()
            axes.append(GridAxis(float(lo), float(hi), int(count), bool(int(periodic))))
        stamp_count = int(read_line())
        stamps = [float(read_line()) for _ in range(stamp_count)]
    except (ValueError, FieldFormatError) as exc:
        if isinstance(exc, FieldFormatError):
            raise
        raise FieldFormatError(f"{path}: malformed header: {exc}", byte_offset=offset) from None
    grid = GridSpec(axes=tuple(axes))
    expected = stamp_count * int(np.prod(grid.shape)) * 4
    available = len(blob) - offset
    if available != expected:
        raise FieldFormatError(
            f"{path}: expected {expected} data bytes, found {available}",
            byte_offset=offset + min(available, expected),
        )
    data = np.frombuffer(blob, dtype="<f4", count=expected // 4, offset=offset)
    data = data.reshape((stamp_count, *grid.shape)).astype(np.float32)
    return ValueField(grid=grid, times=np.asarray(stamps, dtype=float), data=data)


# --- manifest ----------------------------------------------------------------


def _scenario_dict(scenario: Scenario) -> dict:
    n = scenario.normalization
    return {
        "spacecraft": vars(scenario.spacecraft).copy(),
        "asteroid": vars(scenario.asteroid).copy(),
        "initial_orbit": vars(scenario.initial_orbit).copy(),
        "target_orbit": vars(scenario.target_orbit).copy(),
        "normalization": {
            "length_scale_m": n.length_scale_m,
            "velocity_scale_mps": n.velocity_scale_mps,
            "time_scale_s": n.time_scale_s,
            "mass_scale_kg": n.mass_scale_kg,
            "force_scale_newton": n.force_scale_newton,
            "thrust_constant": n.thrust_constant,
        },
        "gravity": type(scenario.gravity_model).__name__,
    }


def scenario_digest(scenario: Scenario) -> str:
    canonical = json.dumps(_scenario_dict(scenario), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_manifest(
    path: str | Path,
    config: RunConfig,
    scenario: Scenario,
    field_path: str | Path,
    kind: str,
    timings: dict,
    grid: GridSpec | None = None,
) -> None:
    grid = grid if grid is not None else config.grid
    manifest = {
        "format": "astroreach-manifest-1",
        "kind": kind,
        "scenario_hash": scenario_digest(scenario),
        "config_path": config.source_path,
        "field_path": str(field_path),
        "grid": [[ax.minimum, ax.maximum, ax.points, int(ax.periodic)] for ax in grid.axes],
        "horizon_seconds": config.horizon_seconds,
        "horizon_normalized": config.horizon_normalized,
        "stamp_count": config.stamp_count,
        "solver": {"cfl_number": config.settings.cfl_number, "max_dt_norm": config.settings.max_dt},
        "scenario": _scenario_dict(scenario),
        "timings": timings,
        "versions": {
            "astroreach": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


# --- result emission ----------------------------------------------------------


def resolved_scenario_text(scenario: Scenario, grid: GridSpec, horizon_norm: float) -> str:
    """Human-readable echo of the fully resolved, normalized scenario."""
    n = scenario.normalization
    t = scenario.target_orbit
    init = scenario.initial_state_normalized(0.0)
    tgt = scenario.target_state_normalized()
    lines = [
        f"scenario hash       {scenario_digest(scenario)}",
        f"length scale        {n.length_scale_m} m",
        f"velocity scale      {n.velocity_scale_mps} m/s",
        f"time scale          {n.time_scale_s} s",
        f"mass scale          {n.mass_scale_kg} kg",
        f"thrust constant c   {n.thrust_constant:.12g}",
        f"spin rate (norm)    {scenario.spin_rate_normalized:.12g}",
        f"initial state       rho={init[0]:.6f} v_rho={init[1]:.6f} v_t={init[2]:.6f} (normalized)",
        f"target state        rho={tgt[0]:.6f} v_rho={tgt[1]:.6f} v_t={tgt[2]:.6f} (normalized)",
        f"target tolerances   {t.radius_tolerance_m:.6g} m, {t.radial_velocity_tolerance_mps:.6g} m/s, "
        f"{t.tangential_velocity_tolerance_mps:.6g} m/s",
        f"horizon             {horizon_norm:.6f} normalized",
        "grid axes (min, max, points, spacing):",
    ]
    names = ["rho", "v_rho", "v_t", "dm"] + [f"z{i}" for i in range(1, grid.ndim - 3)]
    for name, ax in zip(names, grid.axes):
        lines.append(f"  {name:<6} {ax.minimum: .6f} {ax.maximum: .6f} {ax.points:4d} {ax.spacing:.6f}")
    return "\n".join(lines)


def write_trajectory_csv(traj: Trajectory, scenario: Scenario, path: str | Path) -> None:
    """Emit one row per trajectory sample, denormalized SI."""
    n = scenario.normalization
    t_max = scenario.spacecraft.max_thrust_newton
    with open(Path(path), "w", newline="") as handle:
        handle.write("s,rho_m,theta_rad,vrho_mps,vt_mps,dm_kg,alpha_rad,thrust_N,omega_hat\n")
        for i in range(len(traj.times)):
            rho, theta, vrho, vt, dm = traj.states[i]
            handle.write(
                ",".join(
                    f"{v:.17g}"
                    for v in (
                        traj.times[i] * n.time_scale_s,
                        rho * n.length_scale_m,
                        theta,
                        vrho * n.velocity_scale_mps,
                        vt * n.velocity_scale_mps,
                        dm * n.mass_scale_kg,
                        traj.controls[i, 0],
                        traj.controls[i, 1] * t_max,
                        traj.omega_hat[i],
                    )
                )
                + "\n"
            )


def write_front_csv(result: ParetoResult, scenario: Scenario, out_prefix: str | Path) -> dict:
    """Emit front CSV, two-column plot data (grams vs seconds), and the
    Pareto-set coordinates; returns the written paths."""
    out_prefix = Path(out_prefix)
    n = scenario.normalization
    front_path = out_prefix.with_suffix(".csv")
    plot_path = out_prefix.with_suffix(".plot.dat")
    set_path = Path(str(out_prefix) + "_set.csv")
    is_bolza = result.aux_bounds is not None
    with open(front_path, "w", newline="") as handle:
        handle.write("J1,J2,dm_kg_or_z_g,tf_s,omega_hat\n")
        for idx in result.front_indices:
            j1, j2 = result.objectives[idx]
            mixed = j1 * 1e3 if is_bolza else j1  # dm in kg, z in grams
            handle.write(f"{j1:.17g},{j2:.17g},{mixed:.17g},{j2:.17g},{result.margins[idx]:.17g}\n")
    with open(plot_path, "w") as handle:
        handle.write("# J1_grams J2_seconds\n")
        for idx in result.front_indices:
            j1, j2 = result.objectives[idx]
            handle.write(f"{j1 * 1e3:.17g} {j2:.17g}\n")
    with open(set_path, "w", newline="") as handle:
        header = "rho_m,vrho_mps,vt_mps,dm_kg,tf_s"
        if is_bolza:
            header += ",z_kg"
        handle.write(header + "\n")
        for idx in result.front_indices:
            rho, vrho, vt, dm = result.states[idx]
            row = [
                rho * n.length_scale_m,
                vrho * n.velocity_scale_mps,
                vt * n.velocity_scale_mps,
                dm * n.mass_scale_kg,
                result.transfer_times[idx] * n.time_scale_s,
            ]
            if is_bolza:
                row.append(result.aux_bounds[idx])
            handle.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return {"front": front_path, "plot": plot_path, "set": set_path}
