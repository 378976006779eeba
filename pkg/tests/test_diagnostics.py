"""Tests for global integrals, error norms and derived diagnostic fields."""

import numpy as np
import pytest

from cubedswe.diagnostics import (ConservationTrace, courant_number,
                                  energy_density, error_norms,
                                  global_integral, mean_resolution_deg,
                                  potential_enstrophy_density,
                                  relative_vorticity)
from cubedswe.geometry import Grid, GridSpec, RotationConfig
from cubedswe.swe_cases import build_case, solid_body_speed
from cubedswe.swe_rhs import ShallowWaterModel


@pytest.fixture(scope="module")
def grid():
    return Grid(GridSpec(ne=5, ns=5,
                         rotation=RotationConfig(0.0, np.pi / 4.0, 0.0)))


@pytest.fixture(scope="module")
def model(grid):
    return ShallowWaterModel(grid)


class TestGlobalIntegral:
    def test_unit_density_gives_sphere_area(self, model):
        ones = np.ones((6, model.n, model.n))
        area = global_integral(model, ones)
        a = model.grid.spec.constants.radius
        assert area == pytest.approx(4.0 * np.pi * a**2, rel=1e-9)

    def test_linear_in_density(self, model):
        rng = np.random.default_rng(0)
        d = rng.standard_normal((6, model.n, model.n))
        assert global_integral(model, 3.0 * d) == pytest.approx(
            3.0 * global_integral(model, d), rel=1e-13)


class TestErrorNorms:
    def test_zero_for_identical_states(self, model):
        q = model.state_from_spherical(
            np.full_like(model.grid.lat, 1000.0),
            np.zeros_like(model.grid.lat), np.zeros_like(model.grid.lat))
        norms = error_norms(model, q, q)
        assert norms == {"l1": 0.0, "l2": 0.0, "linf": 0.0}

    def test_uniform_relative_perturbation(self, model):
        depth = np.full_like(model.grid.lat, 2000.0)
        zero = np.zeros_like(depth)
        q_ref = model.state_from_spherical(depth, zero, zero)
        q = model.state_from_spherical(1.01 * depth, zero, zero)
        norms = error_norms(model, q, q_ref)
        for key in ("l1", "l2", "linf"):
            assert norms[key] == pytest.approx(0.01, rel=1e-10)

    def test_ordering(self, model):
        # a localized error has linf >= l2 >= l1
        rng = np.random.default_rng(1)
        depth = np.full_like(model.grid.lat, 2000.0)
        zero = np.zeros_like(depth)
        q_ref = model.state_from_spherical(depth, zero, zero)
        bump = np.zeros_like(depth)
        bump[2, 3, 4] = 50.0
        q = model.state_from_spherical(depth + bump, zero, zero)
        norms = error_norms(model, q, q_ref)
        assert norms["linf"] > norms["l2"] > norms["l1"] > 0.0


class TestDerivedFields:
    def test_vorticity_of_solid_body_flow(self, grid):
        # zonal solid-body flow has zeta = 2 u0 sin(lat) / a
        case = build_case(grid, "steady_geostrophic")
        consts = grid.spec.constants
        u0 = solid_body_speed(consts)
        zeta = relative_vorticity(case.model, case.q0)
        expected = 2.0 * u0 * np.sin(grid.lat) / consts.radius
        scale = 2.0 * u0 / consts.radius
        assert np.max(np.abs(zeta - expected)) < 1e-3 * scale

    def test_rest_state_energy_closed_form(self, model):
        depth = np.full_like(model.grid.lat, 3000.0)
        zero = np.zeros_like(depth)
        q = model.state_from_spherical(depth, zero, zero)
        e = energy_density(model, q)
        assert np.allclose(e, 0.5 * model.gravity * 3000.0**2, rtol=1e-12)

    def test_kinetic_energy_uses_physical_speed(self, grid):
        # uniform zonal wind at rest depth: e - pe = H |u|^2 / 2 everywhere
        model = ShallowWaterModel(grid)
        depth = np.full_like(grid.lat, 1000.0)
        ue = np.full_like(grid.lat, 25.0)
        vn = np.full_like(grid.lat, -10.0)
        q = model.state_from_spherical(depth, ue, vn)
        ke = energy_density(model, q) - 0.5 * model.gravity * depth**2
        assert np.allclose(ke, 0.5 * 1000.0 * (25.0**2 + 10.0**2),
                           rtol=1e-10)

    def test_rest_state_enstrophy_is_coriolis_only(self, model):
        depth = np.full_like(model.grid.lat, 4000.0)
        zero = np.zeros_like(depth)
        q = model.state_from_spherical(depth, zero, zero)
        ens = potential_enstrophy_density(model, q)
        expected = model.grid.nodes.f ** 2 / (2.0 * 4000.0)
        assert np.allclose(ens, expected, atol=1e-12 * expected.max())


class TestConservationTrace:
    def test_zero_drift_at_start(self, grid):
        case = build_case(grid, "mountain")
        trace = ConservationTrace.start(case.model, case.q0)
        drift = trace.drift(case.model, case.q0)
        assert drift == {"mass": 0.0, "energy": 0.0, "enstrophy": 0.0}

    def test_mass_drift_detects_change(self, model):
        depth = np.full_like(model.grid.lat, 1000.0)
        zero = np.zeros_like(depth)
        q = model.state_from_spherical(depth, zero, zero)
        trace = ConservationTrace.start(model, q)
        q2 = model.state_from_spherical(1.05 * depth, zero, zero)
        assert trace.drift(model, q2)["mass"] == pytest.approx(0.05,
                                                               rel=1e-10)


class TestScalars:
    def test_mean_resolution(self, model):
        assert mean_resolution_deg(model) == pytest.approx(90.0 / 25.0)

    def test_courant_linear_in_dt(self, grid):
        case = build_case(grid, "steady_geostrophic")
        c1 = courant_number(case.model, case.q0, 600.0)
        c2 = courant_number(case.model, case.q0, 1200.0)
        assert c2 == pytest.approx(2.0 * c1, rel=1e-12)
        assert c1 > 0.0
