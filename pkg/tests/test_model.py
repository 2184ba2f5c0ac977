import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from astroreach.gravity import PointMassGravity, TabulatedRadialGravity, load_gravity_profile
from astroreach.model import (
    AsteroidParams,
    InitialOrbit,
    Normalization,
    Scenario,
    SpacecraftParams,
    TargetOrbit,
    circular_orbit_tangential_velocity_mps,
    soi_radius,
)


def make_scenario(**overrides):
    spacecraft = SpacecraftParams(
        dry_mass_kg=750.0,
        max_thrust_newton=0.6,
        exhaust_velocity_mps=4.0e4,
        max_propellant_kg=0.1,
    )
    asteroid = AsteroidParams.from_orbital_data(
        mass_kg=1.4091e12,
        sun_mass_kg=1.9890e30,
        semi_major_axis_m=1.5907e11,
        spin_rate_rad_s=4.2883e-4,
        rho_min_m=1000.0,
    )
    gm = asteroid.gravitational_parameter_m3s2
    spin = asteroid.spin_rate_rad_s
    defaults = dict(
        spacecraft=spacecraft,
        asteroid=asteroid,
        initial_orbit=InitialOrbit(5100.0, 0.0, circular_orbit_tangential_velocity_mps(gm, spin, 5100.0)),
        target_orbit=TargetOrbit(
            6117.5,
            0.0,
            circular_orbit_tangential_velocity_mps(gm, spin, 6117.5),
            radius_tolerance_m=160.0,
            radial_velocity_tolerance_mps=0.24,
            tangential_velocity_tolerance_mps=0.065,
        ),
        normalization=Normalization.for_spacecraft(spacecraft, 5100.0, 2.0),
    )
    defaults.update(overrides)
    return Scenario(**defaults)


class TestSoiRadius:
    def test_reported_castalia_value(self):
        # printed result for Castalia's orbital data: about 8.74 km
        r = soi_radius(1.5907e11, 1.4091e12, 1.9890e30)
        assert abs(r / 1000.0 - 8.74) < 0.01

    def test_equal_masses_return_semi_major_axis(self):
        assert soi_radius(42.0, 5.0, 5.0) == pytest.approx(42.0, rel=1e-15)

    def test_log_domain_cross_check(self):
        # independent evaluation via exp((2/5) ln ratio)
        a, ratio = 1.0e8, 1.0e-18
        expected = a * math.exp(0.4 * math.log(ratio))
        assert soi_radius(a, ratio * 1.9890e30, 1.9890e30) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("bad", [(-1.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, -2.0)])
    def test_non_positive_inputs_rejected(self, bad):
        with pytest.raises(ValueError):
            soi_radius(*bad)


class TestParams:
    def test_spacecraft_positivity(self):
        with pytest.raises(ValueError):
            SpacecraftParams(0.0, 0.6, 4e4, 0.1)
        with pytest.raises(ValueError):
            SpacecraftParams(750.0, -0.6, 4e4, 0.1)
        with pytest.raises(ValueError, match="min_propellant"):
            SpacecraftParams(750.0, 0.6, 4e4, 0.1, min_propellant_kg=0.01)

    def test_asteroid_shell_ordering(self):
        with pytest.raises(ValueError):
            AsteroidParams(94.0, 1e-4, 1.5e11, 1e12, 2e30, rho_min_m=9000.0, rho_max_m=8000.0)

    def test_asteroid_defaults_from_orbital_data(self):
        ast = AsteroidParams.from_orbital_data(
            mass_kg=1.4091e12,
            sun_mass_kg=1.9890e30,
            semi_major_axis_m=1.5907e11,
            spin_rate_rad_s=4.2883e-4,
            rho_min_m=1000.0,
        )
        assert ast.gravitational_parameter_m3s2 == pytest.approx(6.674e-11 * 1.4091e12, rel=1e-14)
        assert ast.rho_max_m == pytest.approx(soi_radius(1.5907e11, 1.4091e12, 1.9890e30), rel=1e-14)

    def test_target_inside_shell_enforced(self):
        with pytest.raises(ValueError, match="target radius"):
            make_scenario(target_orbit=TargetOrbit(9000.0, 0.0, -2.7))


class TestNormalization:
    def test_thrust_constant_formula(self):
        sc = SpacecraftParams(750.0, 0.6, 4e4, 0.1)
        n = Normalization.for_spacecraft(sc, 5100.0, 2.0)
        assert n.thrust_constant == 0.6 * 5100.0 / (750.0 * 4.0)
        assert n.time_scale_s == 2550.0
        assert n.force_scale_newton == 0.6

    @given(
        st.floats(min_value=1e-3, max_value=1e9, allow_nan=False),
        st.floats(min_value=1e-3, max_value=1e6, allow_nan=False),
    )
    def test_round_trip_identity(self, meters, mps):
        n = Normalization.for_spacecraft(SpacecraftParams(750.0, 0.6, 4e4, 0.1), 5100.0, 2.0)
        assert n.length_si(n.length(meters)) == pytest.approx(meters, rel=1e-14)
        assert n.velocity_si(n.velocity(mps)) == pytest.approx(mps, rel=1e-14)
        assert n.time_si(n.time(meters)) == pytest.approx(meters, rel=1e-14)
        assert n.mass_si(n.mass(mps)) == pytest.approx(mps, rel=1e-14)
        assert n.thrust_si(n.thrust(mps)) == pytest.approx(mps, rel=1e-14)

    def test_state_round_trip(self):
        scen = make_scenario()
        n = scen.normalization
        si = (5400.0, 0.33, -2.5, 0.07)
        back = n.state_si(*n.state(*si))
        np.testing.assert_allclose(back, si, rtol=1e-14)


class TestConstraintLevelset:
    def test_interior_point_negative(self):
        scen = make_scenario()
        n = scen.normalization
        rho_mid = 0.5 * (scen.asteroid.rho_min_m + scen.asteroid.rho_max_m) / n.length_scale_m
        assert scen.constraint_levelset(rho_mid, 0.0, -1.2, 0.05) < 0

    def test_lower_radius_boundary_zero(self):
        scen = make_scenario()
        rho_lo = scen.asteroid.rho_min_m / scen.normalization.length_scale_m
        assert scen.constraint_levelset(rho_lo, 0.0, -1.2, 0.05) == pytest.approx(0.0, abs=1e-15)

    def test_outside_radius_margin_matches_hand_formula(self):
        # below rho_min by d (normalized): max of margins evaluates to +d
        scen = make_scenario()
        rho_lo = scen.asteroid.rho_min_m / scen.normalization.length_scale_m
        d = 0.037
        assert scen.constraint_levelset(rho_lo - d, 0.0, -1.2, 0.05) == pytest.approx(d, rel=1e-12)

    def test_sign_characterizes_membership(self):
        scen = make_scenario()
        n = scen.normalization
        rng = np.random.default_rng(7)
        m = 200_000
        rho = rng.uniform(0.1, 2.0, m)
        dm = rng.uniform(-0.1, 0.2, m)
        g = scen.constraint_levelset(rho, 0.0, -1.2, dm)
        inside = (
            (rho * n.length_scale_m >= scen.asteroid.rho_min_m)
            & (rho * n.length_scale_m <= scen.asteroid.rho_max_m)
            & (dm >= 0.0)
            & (dm <= scen.spacecraft.max_propellant_kg)
        )
        np.testing.assert_array_equal(g <= 0, inside)

    def test_lipschitz_one_in_max_metric(self):
        scen = make_scenario()
        rng = np.random.default_rng(11)
        m = 1_000_000
        a = np.column_stack(
            [rng.uniform(0.1, 2.0, m), rng.uniform(-1, 1, m), rng.uniform(-2, 0, m), rng.uniform(-0.1, 0.2, m)]
        )
        b = a + rng.normal(scale=0.05, size=a.shape)
        ga = scen.constraint_levelset(a[:, 0], a[:, 1], a[:, 2], a[:, 3])
        gb = scen.constraint_levelset(b[:, 0], b[:, 1], b[:, 2], b[:, 3])
        dist = np.max(np.abs(a - b), axis=1)
        assert np.all(np.abs(ga - gb) <= dist + 1e-12)


class TestTargetLevelset:
    def test_center_is_deepest_point(self):
        scen = make_scenario()
        c = scen.target_state_normalized()
        v = float(scen.target_levelset(c[0], c[1], c[2], 0.05))
        assert v == pytest.approx(-scen.target_tolerances_normalized().min(), rel=1e-12)

    def test_mass_independent(self):
        scen = make_scenario()
        c = scen.target_state_normalized()
        v0 = scen.target_levelset(c[0] + 0.01, c[1], c[2], 0.0)
        v1 = scen.target_levelset(c[0] + 0.01, c[1], c[2], scen.spacecraft.max_propellant_kg)
        assert v0 == v1

    def test_double_radius_offset_positive_and_matches_formula(self):
        scen = make_scenario()
        n = scen.normalization
        c = scen.target_state_normalized()
        tol = scen.target_tolerances_normalized()
        offset = 2.0 * scen.target_orbit.radius_tolerance_m / n.length_scale_m
        v = float(scen.target_levelset(c[0] + offset, c[1], c[2], 0.05))
        # hand evaluation: s * (sqrt((2 tol_r / tol_r)^2) - 1) = s
        assert v > 0
        assert v == pytest.approx(tol.min() * (2.0 - 1.0), rel=1e-12)

    def test_sign_characterizes_ellipsoid_membership(self):
        scen = make_scenario()
        c = scen.target_state_normalized()
        tol = scen.target_tolerances_normalized()
        rng = np.random.default_rng(13)
        m = 200_000
        rho = c[0] + rng.uniform(-3, 3, m) * tol[0]
        vr = c[1] + rng.uniform(-3, 3, m) * tol[1]
        vt = c[2] + rng.uniform(-3, 3, m) * tol[2]
        nu = scen.target_levelset(rho, vr, vt, 0.0)
        quad = ((rho - c[0]) / tol[0]) ** 2 + ((vr - c[1]) / tol[1]) ** 2 + ((vt - c[2]) / tol[2]) ** 2
        np.testing.assert_array_equal(nu <= 0, quad <= 1.0)

    def test_lipschitz_documented_constant(self):
        scen = make_scenario()
        L = scen.target_lipschitz_maxnorm
        rng = np.random.default_rng(17)
        m = 1_000_000
        a = np.column_stack(
            [rng.uniform(0.9, 1.4, m), rng.uniform(-0.5, 0.8, m), rng.uniform(-1.6, -1.0, m)]
        )
        b = a + rng.normal(scale=0.02, size=a.shape)
        na = scen.target_levelset(a[:, 0], a[:, 1], a[:, 2], 0.0)
        nb = scen.target_levelset(b[:, 0], b[:, 1], b[:, 2], 0.0)
        dist = np.max(np.abs(a - b), axis=1)
        assert np.all(np.abs(na - nb) <= L * dist + 1e-12)

    def test_unresolved_tolerances_rejected(self):
        scen = make_scenario(target_orbit=TargetOrbit(6117.5, 0.0, -2.747))
        with pytest.raises(ValueError, match="unresolved"):
            scen.target_levelset(1.2, 0.0, -1.37, 0.0)


class TestGravity:
    def test_point_mass_attraction(self):
        g = PointMassGravity(94.0)
        assert g.radial_acceleration(5100.0) < 0
        assert g.radial_acceleration(5100.0) == pytest.approx(-94.0 / 5100.0**2, rel=1e-15)

    def test_tabulated_profile_roundtrip(self, tmp_path):
        rho = np.linspace(4000.0, 9000.0, 40)
        acc = -94.0 / rho**2
        path = tmp_path / "profile.txt"
        np.savetxt(path, np.column_stack([rho, acc]))
        prof = load_gravity_profile(path)
        assert prof.radial_acceleration(5100.0) == pytest.approx(-94.0 / 5100.0**2, rel=1e-3)
        assert prof.slope_bound(4000.0, 9000.0) > 0
        assert prof.magnitude_bound(4000.0, 9000.0) == pytest.approx(94.0 / 4000.0**2, rel=1e-3)

    def test_tabulated_profile_validation(self):
        with pytest.raises(ValueError, match="increasing"):
            TabulatedRadialGravity(np.array([1.0, 1.0, 2.0]), np.array([-1.0, -1.0, -1.0]))
        with pytest.raises(ValueError, match="attractive"):
            TabulatedRadialGravity(np.array([1.0, 2.0]), np.array([0.5, -1.0]))
