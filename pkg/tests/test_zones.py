import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosslearn.errors import ValidationError
from crosslearn.models import ModelSpec, default_models
from crosslearn.oracles import LdaOracleParams, oracle_lda
from crosslearn.synth import sample_dataset, spec_pair
from crosslearn.zones import (EstimatorConfig, Zone, baseline_error, classify,
                              relative_error_reduction, thresholds)


class TestThresholds:
    def test_arithmetic(self):
        th = thresholds(0.2, 0.02)
        assert th.tau1 == pytest.approx(0.22, abs=1e-15)
        assert th.tau2 == pytest.approx(0.30, abs=1e-15)

    def test_zero_se_collapses(self):
        th = thresholds(0.3, 0.0)
        assert th.tau1 == th.tau2 == 0.3

    def test_custom_gammas(self):
        th = thresholds(0.408, 0.01, 1, 5)
        assert th.tau1 == pytest.approx(0.418, abs=1e-12)
        assert th.tau2 == pytest.approx(0.458, abs=1e-12)

    def test_recompute_matches(self):
        th = thresholds(0.13, 0.011, 1.5, 4.0)
        assert abs(th.tau1 - (th.e0 + th.gamma1 * th.se_e0)) <= 1e-12
        assert abs(th.tau2 - (th.e0 + th.gamma2 * th.se_e0)) <= 1e-12

    def test_gamma_order_enforced(self):
        with pytest.raises(ValidationError):
            thresholds(0.2, 0.01, 5, 1)
        with pytest.raises(ValidationError):
            thresholds(0.2, -0.01)


class TestClassify:
    def test_examples(self):
        th = thresholds(0.2, 0.02)
        assert classify(0.10, th) is Zone.POSITIVE
        assert classify(0.25, th) is Zone.AMBIGUOUS
        assert classify(0.31, th) is Zone.NEGATIVE

    def test_boundaries_fall_in_ambiguous(self):
        th = thresholds(0.2, 0.02)
        assert classify(th.tau1, th) is Zone.AMBIGUOUS
        assert classify(th.tau2, th) is Zone.AMBIGUOUS

    def test_epsilon_outside_boundaries(self):
        th = thresholds(0.2, 0.02)
        for eps in (1e-12, 1e-6, 0.01):
            assert classify(th.tau1 - eps, th) is Zone.POSITIVE
            assert classify(th.tau2 + eps, th) is Zone.NEGATIVE

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_score(self, a, b):
        th = thresholds(0.3, 0.05)
        order = [Zone.POSITIVE, Zone.AMBIGUOUS, Zone.NEGATIVE]
        lo, hi = min(a, b), max(a, b)
        assert order.index(classify(lo, th)) <= order.index(classify(hi, th))


class TestRelativeErrorReduction:
    def test_examples(self):
        assert relative_error_reduction(0.408, 0.408) == 0.0
        assert relative_error_reduction(0.408, 0.204) == pytest.approx(0.5)
        assert relative_error_reduction(0.5, 0.6) == pytest.approx(-0.2)

    def test_zero_baseline_rejected(self):
        with pytest.raises(ValidationError):
            relative_error_reduction(0.0, 0.1)


class TestBaselineError:
    def test_separable_target_zero(self, separable4):
        # replicate the 4 separable points enough for 5 folds
        big = separable4
        feats = np.tile(big.features, (10, 1))
        labels = np.tile(big.labels, 10)
        from crosslearn.data import Dataset
        d = Dataset(feats, labels, big.task)
        cfg = EstimatorConfig(models=(ModelSpec("logreg"),), scheme="single")
        e0, se = baseline_error(cfg, d, seed=0)
        assert e0 == 0.0 and se == 0.0

    def test_deterministic(self):
        target = sample_dataset(spec_pair("lda", 0.5, seed=3)[0], 100, seed=1)
        cfg = EstimatorConfig.for_task(target.task)
        a = baseline_error(cfg, target, seed=7)
        b = baseline_error(cfg, target, seed=7)
        assert a == b

    def test_ensemble_tracks_bayes_error(self):
        t_spec, _ = spec_pair("lda", 0.5, seed=9)
        target = sample_dataset(t_spec, 200, seed=2)
        cfg = EstimatorConfig.for_task(target.task)
        e0, se = baseline_error(cfg, target, seed=1)
        bayes = oracle_lda(LdaOracleParams(t_spec.mu, t_spec.mu))
        assert abs(e0 - bayes) <= 3.0 * se + 0.02

    def test_avg_schemes_run(self):
        target = sample_dataset(spec_pair("lda", 0.5, seed=3)[0], 100, seed=1)
        for scheme in ("unweighted-avg", "weighted-avg"):
            cfg = EstimatorConfig(models=tuple(default_models(target.task)),
                                  scheme=scheme)
            e0, se = baseline_error(cfg, target, seed=0)
            assert 0.0 <= e0 <= 1.0 and se >= 0.0
