import numpy as np
import pytest

from crosslearn.data import Dataset, LossKind, TaskKind, make_folds
from crosslearn.errors import ValidationError
from crosslearn.models import (ModelSpec, cv_error, default_models, fit,
                               parse_model_ids, predict)
from crosslearn.models.linear import _design
from crosslearn.oracles import oracle_monte_carlo
from crosslearn.synth import OracleModel, sample_dataset, spec_pair

ALL_CLASSIFIERS = ["logreg", "mlogreg", "probit", "lda", "qda",
                   "svm-linear", "svm-rbf", "gbt"]
ALL_REGRESSORS = ["ols", "svr-linear", "svr-rbf", "gbt"]


def probit_data(n=200, c=0.5, seed=1, data_seed=1):
    t, s = spec_pair("probit", c, seed=seed)
    return sample_dataset(t, n, seed=data_seed), t


class TestFitBasics:
    def test_logreg_separable(self, separable4):
        m = fit(ModelSpec("logreg"), separable4)
        assert np.array_equal(m.predict(separable4.features), separable4.labels)

    def test_lda_recovers_generator_mean(self):
        t, _ = spec_pair("lda", 0.0, seed=2)
        d = sample_dataset(t, 2000, seed=4)
        m = fit(ModelSpec("lda"), d)
        mean1 = d.features[d.labels == 1].mean(axis=0)
        assert np.all(np.abs(mean1 - 0.3) < 0.1)
        # the fitted discriminant agrees with the generator's rule
        g = np.random.default_rng(0)
        pts = g.normal(size=(2000, 10))
        bayes = (pts @ t.mu >= 0).astype(np.int64)
        assert np.mean(m.predict(pts) != bayes) < 0.05

    def test_discriminants_approach_generator_rule(self):
        # both discriminant fits on equal-covariance balanced Gaussians
        t, _ = spec_pair("lda", 0.0, seed=6)
        d = sample_dataset(t, 5000, seed=8)
        g = np.random.default_rng(1)
        pts = g.normal(size=(4000, 10))
        bayes = (pts @ t.mu >= 0).astype(np.int64)
        for alg in ("lda", "qda"):
            m = fit(ModelSpec(alg), d)
            assert np.mean(m.predict(pts) != bayes) <= 0.05, alg

    def test_gbt_fits_xor(self, xor200):
        m = fit(ModelSpec("gbt"), xor200)
        err = np.mean(m.predict(xor200.features) != xor200.labels)
        assert err < 0.1

    def test_ols_exact_interpolation(self):
        x = np.arange(10.0)[:, None]
        d = Dataset(x, 2.0 * x[:, 0], TaskKind.regression())
        m = fit(ModelSpec("ols"), d)
        assert m.predict(np.array([[3.0]]))[0] == pytest.approx(6.0, abs=1e-8)

    def test_svm_rbf_multiclass_range(self):
        t, _ = spec_pair("fourclass", 0.5, seed=7)
        d = sample_dataset(t, 200, seed=1)
        m = fit(ModelSpec("svm-rbf"), d)
        assert set(np.unique(m.predict(d.features))) <= {0, 1, 2, 3}

    def test_task_compat_errors(self, separable4):
        with pytest.raises(ValidationError):
            fit(ModelSpec("ols"), separable4)
        with pytest.raises(ValidationError):
            fit(ModelSpec("logreg"),
                Dataset(np.arange(4.0)[:, None], np.arange(4.0),
                        TaskKind.regression()))

    def test_missing_class_rejected(self):
        d = Dataset(np.arange(4.0)[:, None], np.zeros(4, np.int64),
                    TaskKind.binary())
        with pytest.raises(ValidationError):
            fit(ModelSpec("logreg"), d)

    def test_predict_dimension_check(self, separable4):
        m = fit(ModelSpec("logreg"), separable4)
        with pytest.raises(ValidationError):
            predict(m, np.zeros((2, 5)))

    def test_deterministic_fits(self):
        d, _ = probit_data()
        for alg in ALL_CLASSIFIERS:
            if alg == "mlogreg":
                continue
            a = fit(ModelSpec(alg), d)
            b = fit(ModelSpec(alg), d)
            assert np.array_equal(a.predict(d.features), b.predict(d.features)), alg


class TestSolverContracts:
    def test_objective_paths_non_increasing(self, xor200):
        d, _ = probit_data()
        reg = sample_dataset(spec_pair("nonlinreg", 0.5, seed=3)[0], 150, seed=2)
        four = sample_dataset(spec_pair("fourclass", 0.5, seed=3)[0], 150, seed=2)
        cases = ([(alg, d) for alg in ("logreg", "probit", "svm-linear",
                                       "svm-rbf", "gbt")]
                 + [("mlogreg", four), ("gbt", four)]
                 + [(alg, reg) for alg in ("svr-linear", "svr-rbf", "gbt")])
        for alg, data in cases:
            path = np.asarray(fit(ModelSpec(alg), data).objective_path)
            assert np.all(np.diff(path) <= 1e-9), alg

    def test_logreg_gradient_small_and_matches_fd(self):
        g = np.random.default_rng(12)
        X = g.normal(size=(5, 3))
        y = np.array([0, 1, 0, 1, 1])
        d = Dataset(X, y, TaskKind.binary())
        spec = ModelSpec("logreg")
        m = fit(spec, d)
        w = m.core.weights
        A = _design(X)

        def nll(wv):
            eta = A @ wv
            return float(np.sum(np.log1p(np.exp(-np.abs(eta)))
                                + np.maximum(eta, 0) - y * eta))

        # analytic gradient at the optimum
        p = 1.0 / (1.0 + np.exp(-(A @ w)))
        grad = A.T @ (p - y)
        assert np.max(np.abs(grad)) <= spec.tol * 10
        # central finite differences agree with the analytic gradient at a
        # generic (unsaturated) point
        w2 = np.array([0.3, -0.2, 0.5, 0.1])
        p2 = 1.0 / (1.0 + np.exp(-(A @ w2)))
        grad2 = A.T @ (p2 - y)
        fd = np.zeros_like(w2)
        eps = 1e-6
        for i in range(len(w2)):
            up, dn = w2.copy(), w2.copy()
            up[i] += eps
            dn[i] -= eps
            fd[i] = (nll(up) - nll(dn)) / (2 * eps)
        rel = np.abs(fd - grad2).max() / np.abs(fd).max()
        assert rel <= 1e-4

    def test_smo_kkt_conditions(self):
        d, _ = probit_data()
        core = fit(ModelSpec("svm-rbf"), d).core
        assert core.alpha.min() >= 0.0
        assert core.alpha.max() <= 1.0 + 1e-15
        assert abs(np.sum(core.alpha * core.signs)) <= 1e-8
        assert core.violation <= 1e-3

    def test_nonconvergence_flagged_not_fatal(self, separable4):
        # Separable data cannot reach the gradient tolerance: flag, no error.
        m = fit(ModelSpec("logreg", max_iter=3), separable4)
        assert "not-converged" in m.flags

    def test_qda_singular_covariance_ridged(self):
        X = np.array([[0.0, 0], [0, 0], [1, 1], [1, 1]])
        d = Dataset(X, np.array([0, 0, 1, 1]), TaskKind.binary())
        m = fit(ModelSpec("qda"), d)
        assert "ridged-covariance" in m.flags

    def test_ovr_reduces_to_binary(self):
        d, _ = probit_data()
        for alg in ("svm-rbf", "svm-linear", "gbt"):
            wrapped = fit(ModelSpec(alg), d)
            # binary fits produce the binary core directly, not a one-vs-rest
            assert not hasattr(wrapped.core, "members"), alg

    def test_probit_close_to_logreg_on_probit_data(self):
        d, _ = probit_data(n=400)
        a = fit(ModelSpec("probit"), d)
        b = fit(ModelSpec("logreg"), d)
        assert np.mean(a.predict(d.features) != b.predict(d.features)) < 0.05


class TestCvError:
    def test_constant_prediction_zero(self):
        g = np.random.default_rng(0)
        X = g.normal(size=(40, 2))
        X[:20] += 10.0
        y = (X[:, 0] > 5).astype(np.int64)
        d = Dataset(X, y, TaskKind.binary())
        folds = make_folds(d, 4, seed=1)
        res = cv_error(ModelSpec("lda"), d, folds, LossKind.ZERO_ONE)
        assert res.mean == 0.0 and res.se == 0.0

    def test_deterministic(self):
        d, _ = probit_data()
        folds = make_folds(d, 5, seed=2)
        a = cv_error(ModelSpec("svm-rbf"), d, folds, LossKind.ZERO_ONE)
        b = cv_error(ModelSpec("svm-rbf"), d, folds, LossKind.ZERO_ONE)
        assert a.mean == b.mean and a.se == b.se

    def test_matches_bayes_error_within_3se(self):
        d, t_spec = probit_data(n=200, c=1.0, seed=5, data_seed=6)
        folds = make_folds(d, 5, seed=3)
        res = cv_error(ModelSpec("logreg"), d, folds, LossKind.ZERO_ONE)
        _, s_spec = spec_pair("probit", 1.0, seed=5)
        mc = oracle_monte_carlo(OracleModel(t_spec), OracleModel(s_spec),
                                t_spec, s_spec, samples=100_000, seed=0)
        bayes = mc.score  # at cosine 1 the oracle score equals the Bayes error
        assert abs(res.mean - bayes) <= 3.0 * max(res.se, 1e-6) + 0.02

    def test_wrong_fold_plan(self):
        d, _ = probit_data(n=100)
        other = Dataset(d.features[:60], d.labels[:60], d.task)
        folds = make_folds(other, 5, seed=0)
        with pytest.raises(ValidationError):
            cv_error(ModelSpec("logreg"), d, folds, LossKind.ZERO_ONE)


class TestSpecPlumbing:
    def test_parse_model_ids(self):
        specs = parse_model_ids("logreg,svm-linear, gbt")
        assert [s.algorithm for s in specs] == ["logreg", "svm-linear", "gbt"]
        with pytest.raises(ValidationError):
            parse_model_ids(" , ")
        with pytest.raises(ValidationError):
            parse_model_ids("nope")

    def test_default_models(self):
        assert [m.algorithm for m in default_models(TaskKind.binary())] == \
            ["logreg", "svm-linear", "svm-rbf", "gbt"]
        assert [m.algorithm for m in default_models(TaskKind.multiclass(4))] == \
            ["mlogreg", "svm-linear", "svm-rbf", "gbt"]
        assert [m.algorithm for m in default_models(TaskKind.regression())] == \
            ["ols", "svr-linear", "svr-rbf", "gbt"]

    def test_hyperparameter_validation(self):
        with pytest.raises(ValidationError):
            ModelSpec("logreg", tol=0.0)
        with pytest.raises(ValidationError):
            ModelSpec("svm-rbf", c=-1.0)

    def test_json_round_trip(self):
        spec = ModelSpec("svm-rbf", c=2.0, gamma=0.3)
        assert ModelSpec.from_dict(spec.to_dict()) == spec
