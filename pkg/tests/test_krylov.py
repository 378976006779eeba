"""Tests for the adaptive Krylov phi-combination engine."""

import numpy as np
import pytest
from scipy.linalg import expm

from cubedswe.krylov import (KrylovError, PhiCombinationRequest,
                             PhiCombinationResult, dense_phi_oracle,
                             phi_combination)
from cubedswe.integrators import phi_scalar


def _random_instance(rng):
    n = int(rng.integers(5, 200))
    p = int(rng.integers(0, 4))
    scale = 10.0 ** rng.uniform(-2, 2)
    a = rng.standard_normal((n, n)) * scale
    a -= np.eye(n) * scale * np.sqrt(n) * rng.uniform(0.5, 2.0)
    tau = 10.0 ** rng.uniform(-2, 0.5) / scale
    bs = [rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3)
          for _ in range(p + 1)]
    return a, tau, bs


def _input_relative_error(w, ref, bs):
    scale = max(max(np.linalg.norm(b) for b in bs), np.linalg.norm(ref))
    return np.linalg.norm(w - ref) / scale


class TestDenseOracle:
    def test_oracle_matches_scalar_phi_on_diagonal(self):
        lam = np.array([-0.5, -2.0, 1.3])
        jmat = np.diag(lam)
        tau = 0.7
        rng = np.random.default_rng(3)
        bs = [rng.standard_normal(3) for _ in range(4)]
        ref = dense_phi_oracle(jmat, bs, tau)
        expected = sum(
            np.array([phi_scalar(k, tau * l) for l in lam]) * bs[k]
            for k in range(4))
        assert np.allclose(ref, expected, rtol=1e-12)

    def test_oracle_size_guard(self):
        with pytest.raises(ValueError):
            dense_phi_oracle(np.zeros((3000, 3000)), [np.zeros(3000)] * 2,
                             1.0)


class TestPhiCombination:
    def test_matches_oracle_on_200_random_instances(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(200):
            a, tau, bs = _random_instance(rng)
            ref = dense_phi_oracle(a, bs, tau)
            res = phi_combination(PhiCombinationRequest(
                operator=lambda v: a @ v, tau=tau, vectors=bs, tol=1e-10))
            worst = max(worst, _input_relative_error(res.w, ref, bs))
        assert worst <= 1e-9

    def test_exponential_only(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((40, 40)) - 6.0 * np.eye(40)
        b = rng.standard_normal(40)
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: a @ v, tau=0.5, vectors=[b], tol=1e-12))
        assert np.allclose(res.w, expm(0.5 * a) @ b, atol=1e-10)

    def test_zero_vectors_short_circuit(self):
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: v, tau=1.0,
            vectors=[np.zeros(10), np.zeros(10)]))
        assert np.all(res.w == 0.0)
        assert res.matvecs == 0

    def test_happy_breakdown_low_rank(self):
        # operator with a tiny invariant subspace containing b
        proj = np.zeros((50, 50))
        proj[0, 0] = -2.0
        b = np.zeros(50)
        b[0] = 3.0
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: proj @ v, tau=1.0, vectors=[b]))
        assert res.krylov_dim <= 2
        assert res.w[0] == pytest.approx(3.0 * np.exp(-2.0), rel=1e-12)

    def test_badly_scaled_vectors(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((60, 60)) - 8.0 * np.eye(60)
        bs = [np.zeros(60), 1e13 * rng.standard_normal(60),
              1e10 * rng.standard_normal(60), 1e7 * rng.standard_normal(60)]
        ref = dense_phi_oracle(a, bs, 0.3)
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: a @ v, tau=0.3, vectors=bs, tol=1e-10))
        assert _input_relative_error(res.w, ref, bs) < 1e-10

    def test_phi1_of_singular_operator(self):
        # phi_1(0) b = b: the zero operator must be handled exactly
        b = np.arange(1.0, 9.0)
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: 0.0 * v, tau=1.0,
            vectors=[np.zeros(8), b]))
        assert np.allclose(res.w, b, rtol=1e-12)

    def test_stats_reported(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((80, 80)) - 10.0 * np.eye(80)
        res = phi_combination(PhiCombinationRequest(
            operator=lambda v: a @ v, tau=1.0,
            vectors=[rng.standard_normal(80)]))
        assert isinstance(res, PhiCombinationResult)
        assert res.substeps >= 1
        assert res.matvecs >= res.krylov_dim
        assert res.final_dim >= 1

    def test_nan_operator_raises(self):
        def bad(v):
            out = v.copy()
            out[0] = np.nan
            return out
        with pytest.raises(KrylovError):
            phi_combination(PhiCombinationRequest(
                operator=bad, tau=1.0, vectors=[np.ones(10)]))

    def test_validation(self):
        with pytest.raises(ValueError):
            PhiCombinationRequest(operator=lambda v: v, tau=1.0, vectors=[])
        with pytest.raises(ValueError):
            PhiCombinationRequest(operator=lambda v: v, tau=1.0,
                                  vectors=[np.ones(3)], tol=0.0)
        with pytest.raises(ValueError):
            PhiCombinationRequest(operator=lambda v: v, tau=1.0,
                                  vectors=[np.ones(3), np.ones(4)])

    def test_warm_start_dimension_hint(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((120, 120)) - 12.0 * np.eye(120)
        req = PhiCombinationRequest(operator=lambda v: a @ v, tau=1.0,
                                    vectors=[rng.standard_normal(120)])
        cold = phi_combination(req)
        warm = phi_combination(PhiCombinationRequest(
            operator=req.operator, tau=req.tau, vectors=req.vectors,
            m_init=cold.final_dim))
        assert warm.rejections <= cold.rejections
        assert np.allclose(warm.w, cold.w, atol=1e-9 * np.linalg.norm(cold.w))
