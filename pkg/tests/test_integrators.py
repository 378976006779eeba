"""Tests for the multistep exponential time integrators."""

from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import factorial

import cubedswe.integrators as integrators
from cubedswe.integrators import (EpiScheme, JacobianHandle, StepHistory,
                                  epi_step, integrate, phi_scalar, remainder,
                                  startup)


class TestPhiScalar:
    @pytest.mark.parametrize("k", range(0, 6))
    @pytest.mark.parametrize("z", (-8.0, -1.0, -0.3, -1e-6, 0.0, 0.2, 2.5))
    def test_against_integral_representation(self, k, z):
        # phi_k(z) = int_0^1 e^((1-s) z) s^(k-1) / (k-1)! ds for k >= 1
        if k == 0:
            assert phi_scalar(0, z) == pytest.approx(np.exp(z), rel=1e-14)
            return
        ref, _ = quad(lambda s: np.exp((1 - s) * z) * s ** (k - 1)
                      / factorial(k - 1), 0.0, 1.0, epsabs=1e-15)
        assert phi_scalar(k, z) == pytest.approx(ref, rel=1e-12)

    def test_value_at_zero(self):
        for k in range(1, 8):
            assert phi_scalar(k, 0.0) == pytest.approx(1.0 / factorial(k),
                                                       rel=1e-15)

    def test_recurrence(self):
        for z in (-3.0, 0.4, 1.0 + 0.5j):
            for k in range(0, 5):
                lhs = phi_scalar(k + 1, z)
                rhs = (phi_scalar(k, z) - 1.0 / factorial(k)) / z
                assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_negative_index_raises(self):
        with pytest.raises(ValueError):
            phi_scalar(-1, 0.5)


class TestEpiScheme:
    def test_available_orders_and_shapes(self):
        shapes = {2: (0, 0), 3: (2, 1), 4: (3, 2), 5: (4, 3), 6: (4, 4)}
        for order, shape in shapes.items():
            s = EpiScheme(order=order)
            assert s.history_depth == shape[1]
            assert s.a_matrix.shape == shape
            if shape[1]:
                # row for phi_1 is identically zero by construction
                assert np.all(s.a_matrix[0] == 0.0)

    def test_coefficient_spot_values(self):
        a4 = EpiScheme(order=4).a_matrix
        assert a4[2, 0] == float(Fraction(32, 5))
        assert a4[1, 1] == float(Fraction(3, 40))
        a5 = EpiScheme(order=5).a_matrix
        assert a5[2, 0] == 12.0
        assert a5[3, 2] == float(Fraction(-1, 3))
        a6 = EpiScheme(order=6).a_matrix
        assert a6[1, 3] == float(Fraction(367, 6720))
        assert a6[3, 0] == float(Fraction(485, 21))

    def test_unknown_order_raises(self):
        with pytest.raises(ValueError):
            EpiScheme(order=7)

    def test_third_order_conditions(self):
        # the order-3 weights reproduce the phi-expansion of the local error:
        # sum_i a[1, i] * i^2 must equal 2/3 for third order with one vector
        a3 = EpiScheme(order=3).a_matrix
        assert a3[1, 0] == pytest.approx(2.0 / 3.0)


class TestJacobianHandle:
    def test_complex_step_matches_analytic(self):
        def rhs(q):
            return np.array([q[0] ** 2 + np.sin(q[1]), q[0] * q[1]])

        q = np.array([0.7, -0.3])
        h = JacobianHandle(rhs=rhs, q_base=q, f_base=np.real(rhs(q)))
        jac = np.array([[2 * q[0], np.cos(q[1])], [q[1], q[0]]])
        for v in np.eye(2):
            assert np.allclose(h(v), jac @ v, rtol=1e-13)

    def test_exact_jvp_path(self):
        a = np.diag([1.0, 2.0])
        h = JacobianHandle(rhs=lambda q: a @ q, q_base=np.ones(2),
                           f_base=a @ np.ones(2),
                           exact_jvp=lambda q, v: a @ v)
        assert np.allclose(h(np.array([1.0, -1.0])), [1.0, -2.0])

    def test_remainder_vanishes_for_linear_rhs(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((5, 5))
        q = rng.standard_normal(5)
        q_old = rng.standard_normal(5)
        h = JacobianHandle(rhs=lambda x: a @ x, q_base=q, f_base=a @ q,
                           exact_jvp=lambda x, v: a @ v)
        assert np.allclose(remainder(h, q_old, a @ q_old), 0.0, atol=1e-13)


class TestStepHistory:
    def test_push_keeps_newest_first(self):
        h = StepHistory(depth=2)
        for k in range(4):
            h.push(np.array([float(k)]), np.array([float(10 + k)]))
        assert h.full
        assert h.states[0][0] == 3.0 and h.states[1][0] == 2.0
        assert h.rhs_values[0][0] == 13.0

    def test_step_requires_full_history(self):
        scheme = EpiScheme(order=4)
        handle = JacobianHandle(rhs=lambda q: -q, q_base=np.ones(3),
                                f_base=-np.ones(3),
                                exact_jvp=lambda q, v: -v)
        with pytest.raises(ValueError):
            epi_step(scheme, handle, StepHistory(depth=2), 0.1)


def _linear_problem(n=40, seed=3):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a -= np.eye(n) * 1.5 * np.sqrt(n)
    q0 = rng.standard_normal(n)
    return a, q0


class TestIntegrate:
    @pytest.mark.parametrize("order", (2, 3, 4, 5, 6))
    def test_linear_exactness(self, order):
        # every EPI order reproduces e^(tA) q0 on a linear system because the
        # nonlinear remainders vanish identically
        a, q0 = _linear_problem()
        dt, n_steps = 0.23, 6
        q = integrate(lambda q: a @ q, q0, dt, n_steps, order=order,
                      tol=1e-12, exact_jvp=lambda q, v: a @ v)
        ref = expm(n_steps * dt * a) @ q0
        assert np.linalg.norm(q - ref) <= 1e-8 * np.linalg.norm(q0)

    def test_scalar_decay(self):
        q = integrate(lambda q: -q, np.array([1.0]), 0.1, 10, order=2,
                      tol=1e-12, exact_jvp=lambda q, v: -v)
        assert q[0] == pytest.approx(np.exp(-1.0), rel=1e-10)

    def test_zero_rhs_is_fixed_point(self):
        q0 = np.arange(5.0)
        q = integrate(lambda q: 0.0 * q, q0, 1.0, 8, order=4, tol=1e-12,
                      exact_jvp=lambda q, v: 0.0 * v)
        assert np.allclose(q, q0, atol=1e-14)

    @pytest.mark.parametrize("order", (3, 4, 5, 6))
    def test_observed_convergence_order(self, order):
        # stiff Prothero-Robinson-style problem with known solution
        lam = -40.0

        def make_rhs():
            def f(q):
                # q = [y, t]; dy/dt = lam (y - sin t) + cos t, dt/dt = 1
                y, t = q[0], q[1]
                return np.array([lam * (y - np.sin(t)) + np.cos(t),
                                 1.0 + 0.0 * y])
            return f

        def jvp(q, v):
            y, t = q[0], q[1]
            return np.array([lam * v[0] + (-lam * np.cos(t) - np.sin(t))
                             * v[1], 0.0 * v[0]])

        t_end = 1.6
        errs = []
        steps_list = (20, 40)
        for n_steps in steps_list:
            dt = t_end / n_steps
            q0 = np.array([0.0, 0.0])
            q = integrate(make_rhs(), q0, dt, n_steps, order=order,
                          tol=1e-13, exact_jvp=jvp,
                          startup_substeps=64 * 4 ** max(0, order - 4))
            errs.append(abs(q[0] - np.sin(t_end)))
        slope = np.log(errs[0] / errs[1]) / np.log(2.0)
        assert slope > order - 0.7

    def test_callback_invoked_each_step(self):
        a, q0 = _linear_problem(n=10)
        seen = []
        integrate(lambda q: a @ q, q0, 0.1, 7, order=4, tol=1e-10,
                  exact_jvp=lambda q, v: a @ v,
                  callback=lambda step, t, q, st: seen.append((step, q is
                                                               None)))
        assert [s for s, _ in seen] == list(range(1, 8))
        # the first history_depth entries are startup markers without a state
        assert [none for _, none in seen] == [True, True] + [False] * 5

    def test_too_few_steps_raises(self):
        with pytest.raises(ValueError):
            integrate(lambda q: -q, np.ones(2), 0.1, 2, order=6)

    def test_one_phi_combination_per_step(self, monkeypatch):
        calls = {"n": 0}
        orig = integrators.phi_combination

        def counting(req):
            calls["n"] += 1
            return orig(req)

        monkeypatch.setattr(integrators, "phi_combination", counting)
        a, q0 = _linear_problem(n=12)
        n_steps, substeps = 8, 4
        integrate(lambda q: a @ q, q0, 0.05, n_steps, order=5, tol=1e-10,
                  exact_jvp=lambda q, v: a @ v, startup_substeps=substeps)
        depth = EpiScheme(order=5).history_depth
        expected = depth * substeps + (n_steps - depth)
        assert calls["n"] == expected


class TestStartup:
    def test_linear_startup_is_exact(self):
        # startup accuracy must not depend on the substep count for linear F
        a, q0 = _linear_problem(n=15, seed=8)
        scheme = EpiScheme(order=5)
        dt = 0.2
        for substeps in (1, 16):
            q, history, t_off = startup(scheme, lambda q: a @ q, q0, dt,
                                        substeps=substeps, tol=1e-13,
                                        exact_jvp=lambda q, v: a @ v)
            assert t_off == pytest.approx(scheme.history_depth * dt)
            assert history.full
            ref = expm(scheme.history_depth * dt * a) @ q0
            assert np.linalg.norm(q - ref) < 1e-9 * np.linalg.norm(ref)

    def test_zero_depth_history(self):
        q0 = np.ones(4)
        q, history, t_off = startup(EpiScheme(order=2), lambda q: 0 * q, q0,
                                    0.5, exact_jvp=lambda q, v: 0 * v)
        assert t_off == 0.0
        assert history.depth == 0
        assert np.allclose(q, q0)
