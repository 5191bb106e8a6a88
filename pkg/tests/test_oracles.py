import math

import numpy as np
import pytest

from crosslearn.errors import ValidationError
from crosslearn.oracles import (LdaOracleParams, ProbitOracleParams,
                                oracle_lda, oracle_monte_carlo, oracle_probit,
                                oracle_probit_smallnoise, oracle_score)
from crosslearn.synth import OracleModel, rotate_to_cosine, spec_pair


class TestProbitOracle:
    def test_orthogonal_is_half_exactly(self):
        params = ProbitOracleParams(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert oracle_probit(params) == 0.5

    def test_noise_free_halfway(self):
        # cos(theta) = 0.5 at zero noise: arccos(0.5)/pi = 1/3
        b = np.array([1.0, 0.0])
        s = np.array([0.5, math.sqrt(3.0) / 2.0])
        got = oracle_probit(ProbitOracleParams(b, s, sigma2=0.0))
        assert got == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_noise_free_antipodal(self):
        got = oracle_probit(ProbitOracleParams(np.array([1.0, 1.0]),
                                               np.array([-1.0, -1.0]),
                                               sigma2=0.0))
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_matches_smallnoise_formula_at_zero_noise(self):
        g = np.random.default_rng(3)
        for _ in range(100):
            bt = g.normal(size=6)
            bs = g.normal(size=6)
            params = ProbitOracleParams(bt, bs, sigma2=0.0)
            assert oracle_probit(params) == pytest.approx(
                oracle_probit_smallnoise(params.theta_beta), abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValidationError):
            ProbitOracleParams(np.zeros(3), np.ones(3))

    def test_smallnoise_endpoints(self):
        assert oracle_probit_smallnoise(0.0) == 0.0
        assert oracle_probit_smallnoise(math.pi) == 1.0
        assert oracle_probit_smallnoise(math.pi / 2) == 0.5
        with pytest.raises(ValidationError):
            oracle_probit_smallnoise(-0.1)

    def test_rho_bounds(self):
        g = np.random.default_rng(5)
        for _ in range(50):
            params = ProbitOracleParams(g.normal(size=4), g.normal(size=4),
                                        sigma2=abs(g.normal()))
            assert -1.0 <= params.rho1 <= 1.0
            assert -1.0 <= params.rho2 <= 1.0
            assert 0.0 <= params.theta_beta <= math.pi


class TestLdaOracle:
    def test_paper_endpoints(self):
        mu = np.full(10, 0.3)
        assert oracle_lda(LdaOracleParams(mu, mu)) == pytest.approx(0.1714, abs=1e-4)
        assert oracle_lda(LdaOracleParams(mu, -mu)) == pytest.approx(0.8286, abs=1e-4)

    def test_orthogonal_is_half(self):
        mu = np.zeros(10)
        mu[0] = 0.3
        nu = np.zeros(10)
        nu[1] = 0.3
        assert oracle_lda(LdaOracleParams(mu, nu)) == 0.5

    def test_monotone_in_cosine(self):
        mu = np.full(10, 0.3)
        grid = np.round(np.arange(-10, 11) * 0.1, 10)
        vals = [oracle_lda(LdaOracleParams(mu, rotate_to_cosine(mu, c)))
                for c in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_zero_mean_rejected(self):
        with pytest.raises(ValidationError):
            LdaOracleParams(np.zeros(3), np.ones(3))


class TestMonteCarloOracle:
    def test_self_pair_hits_bayes_error(self):
        t_spec, s_spec = spec_pair("lda", 0.3, seed=1)
        est = oracle_monte_carlo(OracleModel(t_spec), OracleModel(t_spec),
                                 t_spec, t_spec, samples=100_000, seed=2)
        bayes = oracle_lda(LdaOracleParams(t_spec.mu, t_spec.mu))
        assert abs(est.score - bayes) <= 3.0 * est.mc_se

    def test_matches_probit_closed_form(self):
        for c in (-1.0, 0.0, 1.0):
            t_spec, s_spec = spec_pair("probit", c, seed=4)
            mc = oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                                    t_spec, s_spec, samples=100_000, seed=1)
            closed = oracle_probit(ProbitOracleParams(t_spec.beta, s_spec.beta,
                                                      t_spec.sigma2))
            assert abs(mc.score - closed) <= 3.0 * mc.mc_se

    def test_nonlinreg_identity_at_cosine_one(self):
        t_spec, s_spec = spec_pair("nonlinreg", 1.0, seed=6)
        mc = oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                                t_spec, s_spec, samples=100_000, seed=7)
        assert abs(mc.score - 1.0) <= 3.0 * mc.mc_se

    def test_se_scales_with_samples(self):
        t_spec, s_spec = spec_pair("lda", 0.5, seed=8)
        small = oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                                   t_spec, s_spec, samples=10_000, seed=9)
        large = oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                                   t_spec, s_spec, samples=40_000, seed=9)
        ratio = small.mc_se / large.mc_se
        assert 2.0 / 1.5 <= ratio <= 2.0 * 1.5

    def test_sample_floor(self):
        t_spec, s_spec = spec_pair("lda", 0.5, seed=8)
        with pytest.raises(ValidationError):
            oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                               t_spec, s_spec, samples=100, seed=0)

    def test_incompatible_oracles(self):
        t_spec, _ = spec_pair("lda", 0.5, seed=8)
        other, _ = spec_pair("probit", 0.5, seed=8)
        with pytest.raises(ValidationError):
            oracle_monte_carlo(OracleModel(other), OracleModel(t_spec),
                               t_spec, t_spec, samples=20_000, seed=0)


class TestOracleScore:
    def test_closed_forms_used(self):
        t, s = spec_pair("probit", 0.5, seed=1)
        assert oracle_score(t, s).scheme == "oracle"
        t, s = spec_pair("lda", 0.5, seed=1)
        assert oracle_score(t, s).scheme == "oracle"
        t, s = spec_pair("mixture", 0.5, seed=1)
        assert oracle_score(t, s, mc_samples=20_000).scheme == "mc-oracle"

    def test_probit_strictly_decreasing_in_cosine(self):
        grid = np.round(np.arange(-10, 11) * 0.1, 10)
        scores = []
        for c in grid:
            t, s = spec_pair("probit", c, seed=13)
            scores.append(oracle_score(t, s).score)
        assert all(a > b for a, b in zip(scores, scores[1:]))
