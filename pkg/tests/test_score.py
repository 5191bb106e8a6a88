import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosslearn.data import LossKind
from crosslearn.errors import ValidationError
from crosslearn.models import ModelSpec
from crosslearn.oracles import ProbitOracleParams, oracle_probit
from crosslearn.score import (cls_ensemble, cls_single,
                              cls_weighted_asymmetric, cls_weighted_avg,
                              evaluate_panel, softmax_weights)
from crosslearn.synth import sample_dataset, spec_pair

PANEL = [ModelSpec(a) for a in ("logreg", "svm-linear", "svm-rbf", "gbt")]


@pytest.fixture(scope="module")
def probit_pair():
    t_spec, s_spec = spec_pair("probit", 0.5, seed=21)
    target = sample_dataset(t_spec, 150, seed=1)
    source = sample_dataset(s_spec, 150, seed=2)
    return target, source


class TestClsSingle:
    def test_same_dataset_collapses(self, probit_pair):
        target, _ = probit_pair
        est = cls_single(ModelSpec("logreg"), target, target)
        assert est.e_t == est.e_s == est.score

    def test_zero_one_range(self, probit_pair):
        est = cls_single(ModelSpec("gbt"), *probit_pair)
        assert 0.0 <= est.score <= 1.0

    def test_symmetry_exact(self, probit_pair):
        target, source = probit_pair
        ab = cls_single(ModelSpec("svm-rbf"), target, source)
        ba = cls_single(ModelSpec("svm-rbf"), source, target)
        assert ab.score == ba.score
        assert ab.e_t == ba.e_s and ab.e_s == ba.e_t

    def test_tracks_oracle_at_cosine_one(self):
        t_spec, s_spec = spec_pair("probit", 1.0, seed=33)
        target = sample_dataset(t_spec, 200, seed=5)
        source = sample_dataset(s_spec, 200, seed=6)
        est = cls_single(ModelSpec("logreg"), target, source)
        oracle = oracle_probit(ProbitOracleParams(t_spec.beta, s_spec.beta, 1.0))
        assert abs(est.score - oracle) < 0.05

    def test_task_mismatch(self, probit_pair):
        target, _ = probit_pair
        reg = sample_dataset(spec_pair("linreg", 0.5, seed=2)[0], 100, seed=0)
        with pytest.raises(ValidationError):
            cls_single(ModelSpec("logreg"), target, reg)


class TestWeightedAsymmetric:
    def test_examples(self):
        assert cls_weighted_asymmetric(0.5, 0.2, 0.4) == pytest.approx(0.3)
        assert cls_weighted_asymmetric(0.999, 0.2, 0.4) == pytest.approx(0.2002)
        assert cls_weighted_asymmetric(0.25, 0.0, 1.0) == pytest.approx(0.75)

    @given(st.floats(0.0, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_boundaries_rejected(self, w):
        if 0.0 < w < 1.0:
            cls_weighted_asymmetric(w, 0.1, 0.2)
        else:
            with pytest.raises(ValidationError):
                cls_weighted_asymmetric(w, 0.1, 0.2)


class TestSoftmaxWeights:
    def test_lambda_zero_exactly_uniform(self):
        w = softmax_weights(np.array([0.1, 0.9, 0.4]), 0.0)
        assert w.tolist() == [1.0 / 3.0] * 3

    def test_dominant_model(self):
        w = softmax_weights(np.array([0.1, 0.2]), 500.0)
        assert w[0] == pytest.approx(1.0 / (1.0 + np.exp(-50.0)), rel=1e-12)

    @given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=6),
           st.floats(0.0, 1000.0))
    @settings(max_examples=60, deadline=None)
    def test_simplex_property(self, errors, lam):
        w = softmax_weights(np.array(errors), lam)
        assert w.min() >= 0.0
        assert abs(w.sum() - 1.0) <= 1e-12


class TestPanelSchemes:
    def test_single_model_panel_equals_single(self, probit_pair):
        target, source = probit_pair
        one = [ModelSpec("logreg")]
        single = cls_single(one[0], target, source)
        assert cls_weighted_avg(one, target, source).score == single.score
        assert cls_ensemble(one, target, source).score == single.score

    def test_identical_models_equal_single(self, probit_pair):
        target, source = probit_pair
        dup = [ModelSpec("logreg"), ModelSpec("logreg")]
        single = cls_single(dup[0], target, source)
        avg = cls_weighted_avg(dup, target, source)
        assert avg.score == pytest.approx(single.score, abs=1e-12)
        ens = cls_ensemble(dup, target, source)
        assert ens.score == pytest.approx(single.score, abs=1e-12)

    def test_lambda_zero_matches_unweighted(self, probit_pair):
        target, source = probit_pair
        panel = evaluate_panel(PANEL, target, source, lam=0.0, seed=3)
        assert panel.weighted.score == pytest.approx(panel.unweighted.score,
                                                     abs=1e-15)

    def test_weights_are_simplex(self, probit_pair):
        target, source = probit_pair
        panel = evaluate_panel(PANEL, target, source, seed=3)
        for ew in (panel.weights_target, panel.weights_source):
            arr = ew.as_array()
            assert arr.min() >= 0 and abs(arr.sum() - 1.0) <= 1e-12

    def test_weighted_avg_is_convex_combination(self, probit_pair):
        target, source = probit_pair
        panel = evaluate_panel(PANEL, target, source, seed=3)
        per = dict(panel.per_model)
        weights = dict(panel.weighted.weights)
        expect = sum(weights[name] * per[name].score for name in per)
        assert panel.weighted.score == pytest.approx(expect, abs=1e-12)

    def test_ensemble_range_and_provenance(self, probit_pair):
        target, source = probit_pair
        panel = evaluate_panel(PANEL, target, source, seed=3)
        assert 0.0 <= panel.ensemble.score <= 1.0
        assert panel.ensemble.scheme == "ensemble"
        assert panel.ensemble.models == ("logreg", "svm-linear", "svm-rbf", "gbt")
        d = panel.ensemble.to_dict()
        assert d["lambda"] == 500.0 and d["loss"] == "zero-one"

    def test_regression_panel(self):
        t_spec, s_spec = spec_pair("linreg", 0.5, seed=4)
        target = sample_dataset(t_spec, 120, seed=1)
        source = sample_dataset(s_spec, 120, seed=2)
        panel = evaluate_panel([ModelSpec("ols"), ModelSpec("svr-linear")],
                               target, source, seed=0)
        assert panel.ensemble.score >= 0.0
        assert panel.ensemble.loss is LossKind.SQUARED

    def test_empty_panel_rejected(self, probit_pair):
        with pytest.raises(ValidationError):
            evaluate_panel([], *probit_pair)
