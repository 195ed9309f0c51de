"""Tests for the matrix normal / contaminated matrix normal laws."""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from cmvmix.distributions import (
    ETA_MIN,
    CmvnParams,
    MvnParams,
    cmvn_log_density,
    h_weight,
    mvn_log_density,
    posterior_good_prob,
    sample_cmvn,
    sample_mvn,
    sample_mvn_stack,
    w_weight,
)
from cmvmix.linalg import trace_quad_form

from test_linalg import random_spd

LOG_2PI = np.log(2 * np.pi)


def vec_log_density(x, m, sigma, psi):
    """Oracle: multivariate normal on vec(X) with covariance psi (x) sigma."""
    return multivariate_normal.logpdf(
        np.asarray(x).flatten(order="F"),
        np.asarray(m).flatten(order="F"),
        np.kron(psi, sigma),
    )


def random_params(rng, r=None, p=None):
    r = r or int(rng.integers(1, 5))
    p = p or int(rng.integers(1, 5))
    return MvnParams(rng.standard_normal((r, p)), random_spd(rng, r), random_spd(rng, p))


class TestMvnDensity:
    def test_at_mean_identity_scales(self):
        params = MvnParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
        assert mvn_log_density(np.zeros((2, 2)), params) == pytest.approx(-2 * LOG_2PI, rel=1e-14)

    def test_vec_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            params = random_params(rng)
            x = rng.standard_normal(params.shape)
            expected = vec_log_density(x, params.m, params.sigma, params.psi)
            assert mvn_log_density(x, params) == pytest.approx(expected, abs=1e-10)

    def test_single_entry_perturbation(self):
        params = MvnParams(np.zeros((2, 3)), np.eye(2), np.eye(3))
        at_mean = mvn_log_density(np.zeros((2, 3)), params)
        for t in (0.5, 1.0, 3.0):
            x = np.zeros((2, 3))
            x[0, 0] = t
            assert mvn_log_density(x, params) == pytest.approx(at_mean - t * t / 2, rel=1e-13)

    def test_normalization_neutral(self):
        # replacing (sigma, psi) by (sigma/s11, s11*psi) leaves the density alone
        rng = np.random.default_rng(1)
        m = rng.standard_normal((3, 2))
        sigma = random_spd(rng, 3, scale=2.7)
        psi = random_spd(rng, 2)
        x = rng.standard_normal((3, 2))
        a = mvn_log_density(x, MvnParams(m, sigma, psi))
        s11 = sigma[0, 0]
        b = mvn_log_density(x, MvnParams(m, sigma / s11, s11 * psi))
        assert a == pytest.approx(b, abs=1e-12)
        # and the constructor itself enforces sigma[0,0] = 1
        assert MvnParams(m, sigma, psi).sigma[0, 0] == 1.0

    def test_constructor_preserves_kronecker(self):
        rng = np.random.default_rng(2)
        sigma = random_spd(rng, 2, scale=3.1)
        psi = random_spd(rng, 3)
        params = MvnParams(np.zeros((2, 3)), sigma, psi)
        before = np.kron(psi, sigma)
        after = np.kron(params.psi, params.sigma)
        assert np.linalg.norm(after - before) / np.linalg.norm(before) < 1e-12


class TestCmvnDensity:
    def test_alpha_near_one_degenerates(self):
        rng = np.random.default_rng(3)
        base = random_params(rng, 2, 2)
        params = CmvnParams(base, 1 - 1e-12, 4.0)
        x = rng.standard_normal((2, 2))
        assert cmvn_log_density(x, params) == pytest.approx(mvn_log_density(x, base), abs=1e-9)

    def test_closed_form_at_mean(self):
        base = MvnParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
        params = CmvnParams(base, 0.9, 4.0)
        # inflated component scales by eta^(-rp/2) = 1/16 at the mean
        expected = np.log(0.9 + 0.1 / 16) - 2 * LOG_2PI
        assert cmvn_log_density(np.zeros((2, 2)), params) == pytest.approx(expected, rel=1e-14)

    def test_two_term_vec_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            base = random_params(rng)
            alpha = rng.uniform(0.55, 0.95)
            eta = rng.uniform(1.5, 20.0)
            params = CmvnParams(base, alpha, eta)
            x = rng.standard_normal(base.shape)
            good = np.exp(vec_log_density(x, base.m, base.sigma, base.psi))
            bad = np.exp(vec_log_density(x, base.m, eta * base.sigma, base.psi))
            assert cmvn_log_density(x, params) == pytest.approx(
                np.log(alpha * good + (1 - alpha) * bad), abs=1e-10)

    def test_inflation_factorization(self):
        # splitting eta across both scales changes nothing once the products agree
        rng = np.random.default_rng(5)
        base = random_params(rng, 2, 3)
        x = rng.standard_normal((2, 3))
        eta_s, eta_p = 2.5, 3.2
        a = mvn_log_density(x, MvnParams(base.m, eta_s * base.sigma, eta_p * base.psi))
        b = mvn_log_density(x, MvnParams(base.m, eta_s * eta_p * base.sigma, base.psi))
        assert a == pytest.approx(b, abs=1e-12)


class TestPosteriorGoodProb:
    def test_closed_form_at_mean(self):
        base = MvnParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
        params = CmvnParams(base, 0.9, 4.0)
        got = posterior_good_prob(np.zeros((2, 2)), params)
        assert got == pytest.approx(0.9 / 0.90625, rel=1e-12)

    def test_eta_min_gives_alpha(self):
        rng = np.random.default_rng(6)
        base = random_params(rng, 2, 2)
        params = CmvnParams(base, 0.8, ETA_MIN)
        for _ in range(5):
            x = rng.standard_normal((2, 2))
            assert posterior_good_prob(x, params) == pytest.approx(0.8, abs=1e-3)

    def test_decreasing_in_distance_matches_h(self):
        base = MvnParams(np.zeros((1, 1)), np.eye(1), np.eye(1))
        params = CmvnParams(base, 0.85, 5.0)
        deltas = np.linspace(0.0, 50.0, 40)
        values = [h_weight(d, 0.85, 5.0, 1, 1) for d in deltas]
        assert all(b < a for a, b in zip(values, values[1:]))
        # h and the posterior are the same function through two code paths
        for d in deltas[1:]:
            x = np.array([[np.sqrt(d)]])
            assert posterior_good_prob(x, params) == pytest.approx(
                h_weight(d, 0.85, 5.0, 1, 1), rel=1e-12)


class TestWeights:
    def test_h_at_zero(self):
        assert h_weight(0.0, 0.9, 4.0, 2, 2) == pytest.approx(0.9 / 0.90625, rel=1e-12)

    def test_h_underflows_monotonically(self):
        vals = [h_weight(d, 0.9, 4.0, 2, 2) for d in (1e2, 1e3, 1e4)]
        assert vals[0] > vals[1] >= vals[2]
        assert vals[2] < 1e-300 or vals[2] == 0.0

    def test_h_matches_posterior_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            base = random_params(rng, 2, 3)
            alpha = rng.uniform(0.55, 0.95)
            eta = rng.uniform(1.5, 30.0)
            params = CmvnParams(base, alpha, eta)
            x = rng.standard_normal((2, 3))
            delta = trace_quad_form(x, base.m, base.sigma, base.psi)
            assert h_weight(delta, alpha, eta, 2, 3) == pytest.approx(
                posterior_good_prob(x, params), rel=1e-10)

    def test_w_limits(self):
        # h -> 1 gives full weight, h -> 0 bottoms out at 1/eta
        assert w_weight(0.0, 1 - 1e-12, 4.0, 2, 2) == pytest.approx(1.0, abs=1e-9)
        assert w_weight(1e5, 0.6, 4.0, 2, 2) == pytest.approx(0.25, rel=1e-12)

    def test_w_bounds_and_monotonicity(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            alpha = rng.uniform(0.55, 0.95)
            eta = rng.uniform(1.2, 50.0)
            deltas = np.sort(rng.uniform(0, 200, size=25))
            vals = [w_weight(d, alpha, eta, 2, 4) for d in deltas]
            hs = [h_weight(d, alpha, eta, 2, 4) for d in deltas]
            assert all(1 / eta - 1e-12 <= v <= 1 + 1e-12 for v in vals)
            # strictly decreasing until w saturates at 1/eta in float precision
            for (va, vb), hb in zip(zip(vals, vals[1:]), hs[1:]):
                if hb > 1e-12:
                    assert vb < va
                else:
                    assert vb <= va

    def test_domain_violations(self):
        for bad in (dict(delta=-1.0), dict(alpha=0.0), dict(alpha=1.0), dict(eta=1.0)):
            kwargs = dict(delta=1.0, alpha=0.8, eta=2.0)
            kwargs.update(bad)
            with pytest.raises(ValueError):
                h_weight(kwargs["delta"], kwargs["alpha"], kwargs["eta"], 2, 2)

    def test_boundary_agreement_with_posterior(self):
        # the two code paths cross 0.5 at the same distance
        alpha, eta = 0.75, 6.0
        base = MvnParams(np.zeros((1, 2)), np.eye(1), np.eye(2))
        params = CmvnParams(base, alpha, eta)
        for d in np.linspace(0.1, 40, 60):
            x = np.array([[np.sqrt(d), 0.0]])
            assert (posterior_good_prob(x, params) > 0.5) == (h_weight(d, alpha, eta, 1, 2) > 0.5)


class TestSampling:
    def test_fixed_seed_bit_identical(self):
        params = random_params(np.random.default_rng(9), 2, 3)
        a = sample_mvn(params, np.random.default_rng(42))
        b = sample_mvn(params, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_sample_mean_converges(self):
        params = MvnParams(np.arange(6.0).reshape(2, 3), np.eye(2), np.eye(3))
        draws = sample_mvn_stack(params, 10_000, np.random.default_rng(10))
        se = 1 / np.sqrt(10_000)
        assert np.all(np.abs(draws.mean(axis=0) - params.m) < 4 * se)

    def test_vec_covariance_converges(self):
        rng = np.random.default_rng(11)
        params = MvnParams(np.zeros((2, 2)), np.array([[2.0, 0.5], [0.5, 1.0]]),
                           np.array([[1.0, 0.3], [0.3, 1.5]]))
        target = np.kron(params.psi, params.sigma)
        errs = []
        for n in (500, 5_000, 50_000):
            draws = sample_mvn_stack(params, n, rng)
            vecs = draws.reshape(n, 2, 2).transpose(0, 2, 1).reshape(n, 4)  # column-major vec
            emp = np.cov(vecs.T, bias=True)
            errs.append(np.linalg.norm(emp - target))
        assert errs[2] < errs[0]
        assert errs[2] < 0.1 * np.linalg.norm(target)

    def test_cmvn_good_fraction(self):
        rng = np.random.default_rng(12)
        base = MvnParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
        params = CmvnParams(base, 0.75, 9.0)
        flags = [sample_cmvn(params, rng)[1] for _ in range(10_000)]
        frac = np.mean(flags)
        se = np.sqrt(0.75 * 0.25 / 10_000)
        assert abs(frac - 0.75) < 3 * se

    def test_bad_draw_distance_scales_with_eta(self):
        rng = np.random.default_rng(13)
        base = MvnParams(np.zeros((2, 2)), np.eye(2), np.eye(2))
        eta = 100.0
        params = CmvnParams(base, 0.5001, eta)
        deltas = []
        while len(deltas) < 2000:
            x, good = sample_cmvn(params, rng)
            if not good:
                deltas.append(trace_quad_form(x, base.m, base.sigma, base.psi))
        mean_delta = np.mean(deltas)
        # E[delta] = eta * r * p for bad draws measured under the base scale
        assert mean_delta == pytest.approx(eta * 4, rel=0.1)

    def test_alpha_near_one_rarely_bad(self):
        rng = np.random.default_rng(14)
        base = MvnParams(np.zeros((1, 1)), np.eye(1), np.eye(1))
        params = CmvnParams(base, 1 - 1e-12, 4.0)
        assert all(sample_cmvn(params, rng)[1] for _ in range(1000))


class TestParamValidation:
    def test_alpha_range(self):
        base = MvnParams(np.zeros((1, 1)), np.eye(1), np.eye(1))
        for alpha in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                CmvnParams(base, alpha, 2.0)

    def test_eta_floor(self):
        base = MvnParams(np.zeros((1, 1)), np.eye(1), np.eye(1))
        with pytest.raises(ValueError):
            CmvnParams(base, 0.9, 1.0)
        CmvnParams(base, 0.9, ETA_MIN)  # boundary allowed
