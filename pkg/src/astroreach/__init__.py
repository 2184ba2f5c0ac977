"""Reachability-based multi-objective low-thrust transfer design around
rotating asteroids: constrained backward-reachability value functions,
trajectory reconstruction, and propellant/time Pareto fronts."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    AsteroidParams,
    InitialOrbit,
    Normalization,
    Scenario,
    SpacecraftParams,
    TargetOrbit,
    soi_radius,
)
from .gravity import PointMassGravity, TabulatedRadialGravity  # noqa: F401
from .dynamics import Control, PlanarProblem, planar_rhs, reconstruct_theta  # noqa: F401
from .hamiltonian import (  # noqa: F401
    PlanarHamiltonian,
    optimal_thrust_direction,
    optimal_thrust_magnitude,
)
from .grid import GridAxis, GridSpec, ValueField  # noqa: F401
from .solver import (  # noqa: F401
    SolverSettings,
    solve_bolza_value_function,
    solve_value_function,
)
from .bolza import BolzaSpec, augmented_rhs, remaining_propellant_objective  # noqa: F401
from .trajectory import Trajectory, reconstruct, smooth_controls  # noqa: F401
from .pareto import ParetoResult, bolza_front, mayer_front, nondominated_filter  # noqa: F401
