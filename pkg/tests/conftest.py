import numpy as np
import pytest
from hypothesis import settings

from astroreach.grid import GridAxis, GridSpec
from astroreach.io import load_config
from astroreach.solver import (
    SolverSettings,
    march,
    resolve_target_tolerances,
    solve_value_function,
)

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")

CONFIG_DIR = "configs"


def check_field_invariants(field, scenario):
    """Structural QVI invariants: terminal slice, obstacle, finiteness."""
    rho, vrho, vt, dm = field.grid.broadcast_coordinates()[:4]
    g = scenario.constraint_levelset(rho, vrho, vt, dm)
    nu = scenario.target_levelset(rho, vrho, vt, dm)
    terminal = np.maximum(nu, g)
    if field.grid.ndim > 4:
        extra = tuple(range(4, field.grid.ndim))
        g = np.broadcast_to(
            g.reshape(g.shape + (1,) * len(extra)), field.grid.shape
        )
    else:
        terminal = np.broadcast_to(terminal, field.grid.shape)
        g = np.broadcast_to(g, field.grid.shape)
    g32 = np.float32(g)
    if field.grid.ndim == 4:
        assert np.array_equal(field.data[0], np.float32(terminal)), "terminal slice mismatch"
    assert np.all(np.isfinite(field.data)), "non-finite entries in the field"
    for k in range(field.times.size):
        assert np.all(field.data[k] >= g32), f"obstacle violated at stamp {k}"


class LineReachProblem:
    """1-d single integrator dx = u, |u| <= 1: H(q) = |q|, alpha = 1."""

    def __call__(self, q):
        return np.abs(q[0])

    def dissipation(self):
        return (1.0,)

    @staticmethod
    def exact(x, t):
        return np.maximum(np.abs(x) - t, 0.0) - 0.1


def solve_line_field(points=201, horizon=0.5, stamps=6):
    grid = GridSpec(axes=(GridAxis(-1.0, 1.0, points),))
    x = grid.axes[0].coordinates()
    nu = np.abs(x) - 0.1
    g = np.full_like(x, -1.0)
    field = march(grid, nu, g, LineReachProblem(), np.linspace(0.0, horizon, stamps), SolverSettings())
    return grid, x, field


@pytest.fixture(scope="session")
def line_field():
    return solve_line_field()


@pytest.fixture(scope="session")
def low_config():
    return load_config(f"{CONFIG_DIR}/castalia_low.cfg")


@pytest.fixture(scope="session")
def coarse_config():
    return load_config(f"{CONFIG_DIR}/castalia_coarse.cfg")


@pytest.fixture(scope="session")
def coarse_scenario(coarse_config):
    return resolve_target_tolerances(coarse_config.scenario, coarse_config.grid)


@pytest.fixture(scope="session")
def coarse_field(coarse_config, coarse_scenario):
    return solve_value_function(
        coarse_scenario,
        coarse_config.grid,
        coarse_config.horizon_normalized,
        coarse_config.stamp_count,
        coarse_config.settings,
    )


@pytest.fixture(scope="session")
def low_scenario(low_config):
    return resolve_target_tolerances(low_config.scenario, low_config.grid)


@pytest.fixture(scope="session")
def low_field(low_config, low_scenario):
    return solve_value_function(
        low_scenario,
        low_config.grid,
        low_config.horizon_normalized,
        low_config.stamp_count,
        low_config.settings,
    )
