"""Trainable learners used to estimate cross-learning scores.

All trainers are written against numpy directly so their solver behaviour
is fully specified: iteratively reweighted least squares with step
halving for the likelihood models, sequential minimal optimization for
the SVMs, and second-order boosted trees. Every `fit` is deterministic
given its inputs, and iterative trainers record a non-increasing
objective path in the returned model's training summary.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..data import Dataset, FoldPlan, LossKind, TaskKind, mean_loss
from ..errors import NumericError, ValidationError

ALGORITHMS = {
    "logreg": {"binary"},
    "mlogreg": {"binary", "multiclass"},
    "probit": {"binary"},
    "lda": {"binary", "multiclass"},
    "qda": {"binary", "multiclass"},
    "svm-linear": {"binary", "multiclass"},
    "svm-rbf": {"binary", "multiclass"},
    "svr-linear": {"regression"},
    "svr-rbf": {"regression"},
    "gbt": {"binary", "multiclass", "regression"},
    "ols": {"regression"},
}


@dataclass(frozen=True)
class ModelSpec:
    """An algorithm id plus its hyperparameters.

    Defaults follow common library conventions: C=1 for all SVMs, RBF
    gamma of 1/(p * mean feature variance), SVR tube 0.1, boosting with
    100 depth-3 trees at learning rate 0.1, and IRLS capped at 100
    iterations with gradient tolerance 1e-8.
    """

    algorithm: str
    c: float = 1.0
    gamma: float | None = None
    epsilon: float = 0.1
    rounds: int = 100
    depth: int = 3
    learning_rate: float = 0.1
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")
        positive = {"c": self.c, "epsilon": self.epsilon, "rounds": self.rounds,
                    "depth": self.depth, "learning_rate": self.learning_rate,
                    "max_iter": self.max_iter, "tol": self.tol}
        if self.gamma is not None:
            positive["gamma"] = self.gamma
        for name, value in positive.items():
            if value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}")

    def supports(self, task: TaskKind) -> bool:
        return task.kind in ALGORITHMS[self.algorithm]

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "ModelSpec":
        return ModelSpec(**d)


def parse_model_ids(ids: str) -> list[ModelSpec]:
    """Parse a comma-separated algorithm id list, e.g. "logreg,svm-rbf,gbt"."""
    specs = []
    for token in ids.split(","):
        token = token.strip()
        if token:
            specs.append(ModelSpec(token))
    if not specs:
        raise ValidationError("empty model list")
    return specs


def default_models(task: TaskKind) -> list[ModelSpec]:
    """The standard four-model panel for a task kind."""
    if task.kind == "binary":
        heads = ["logreg"]
    elif task.kind == "multiclass":
        heads = ["mlogreg"]
    else:
        return [ModelSpec(a) for a in ("ols", "svr-linear", "svr-rbf", "gbt")]
    return [ModelSpec(a) for a in heads + ["svm-linear", "svm-rbf", "gbt"]]


@dataclass(frozen=True)
class FittedModel:
    """A trained predictor plus its training summary."""

    spec: ModelSpec
    task: TaskKind
    p: int
    core: Any
    n_iter: int
    objective_path: tuple[float, ...]
    flags: tuple[str, ...] = ()

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValidationError(f"expected (m, {self.p}) feature matrix")
        out = self.core.predict(X)
        if self.task.is_classification:
            return out.astype(np.int64)
        if not np.all(np.isfinite(out)):
            raise NumericError("model produced non-finite predictions")
        return out.astype(np.float64)


def predict(model: FittedModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def fit(spec: ModelSpec, data: Dataset) -> FittedModel:
    """Train `spec` on `data`; deterministic given its arguments."""
    from . import linear, discriminant, svm, boosting

    if not spec.supports(data.task):
        raise ValidationError(
            f"{spec.algorithm} does not support {data.task.kind} tasks")
    if data.n < 2:
        raise ValidationError("need at least two training samples")
    if data.task.is_classification:
        present = np.bincount(data.labels, minlength=data.task.n_classes)
        if present.min() == 0:
            raise ValidationError("every class needs at least one training sample")
    X, y = data.features, data.labels
    alg = spec.algorithm
    if alg in ("logreg", "probit"):
        core, n_iter, path, flags = linear.fit_binary_irls(X, y, alg, spec)
    elif alg == "mlogreg":
        core, n_iter, path, flags = linear.fit_multinomial(
            X, y, data.task.n_classes, spec)
    elif alg == "ols":
        core, n_iter, path, flags = linear.fit_ols(X, y)
    elif alg in ("lda", "qda"):
        core, n_iter, path, flags = discriminant.fit_discriminant(
            X, y, data.task.n_classes, alg)
    elif alg in ("svm-linear", "svm-rbf"):
        core, n_iter, path, flags = svm.fit_svc(
            X, y, data.task.n_classes, spec)
    elif alg in ("svr-linear", "svr-rbf"):
        core, n_iter, path, flags = svm.fit_svr(X, y, spec)
    else:
        core, n_iter, path, flags = boosting.fit_gbt(
            X, y, data.task, spec)
    return FittedModel(spec=spec, task=data.task, p=data.p, core=core,
                       n_iter=n_iter, objective_path=tuple(path),
                       flags=tuple(flags))


@dataclass(frozen=True)
class CvResult:
    mean: float
    se: float
    fold_losses: tuple[float, ...]
    skipped_folds: tuple[int, ...] = ()


def cv_error(spec: ModelSpec, data: Dataset, folds: FoldPlan,
             loss: LossKind) -> CvResult:
    """K-fold cross-validated loss: mean and fold standard error.

    Folds whose training part misses a class are skipped (recorded on the
    result); if no fold is usable the whole call fails.
    """
    if len(folds.assignments) != data.n:
        raise ValidationError("fold plan was built for a different dataset")
    losses, skipped = [], []
    for f in range(folds.k):
        train_idx, test_idx = folds.split(f)
        train = data.subset(train_idx)
        if data.task.is_classification:
            present = np.bincount(train.labels, minlength=data.task.n_classes)
            if present.min() == 0:
                skipped.append(f)
                continue
        model = fit(spec, train)
        losses.append(mean_loss(model.predict(data.features[test_idx]),
                                data.labels[test_idx], loss))
    if not losses:
        raise NumericError("all folds were skipped; cannot cross-validate")
    arr = np.asarray(losses)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return CvResult(mean=float(arr.mean()), se=se,
                    fold_losses=tuple(float(v) for v in arr),
                    skipped_folds=tuple(skipped))
