"""Transfer-learning methods used to validate zone predictions.

Two methods are registered: naive pooling (train on the concatenation of
target training rows and all source rows) and instance-weighted transfer
boosting, in which source instances that the current learner misclassifies
have their weights multiplied by a fixed factor below one while target
instances follow the usual boosting re-weighting. Base learners without
native instance weights are trained on weighted resamples of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .data import Dataset, LossKind, mean_loss
from .errors import NumericError, ValidationError
from .models import ModelSpec, fit

METHODS = ("naive", "tradaboost")


@dataclass(frozen=True)
class TransferOutcome:
    method: str
    test_error: float
    baseline_error: float

    @property
    def beat_baseline(self) -> bool:
        return self.test_error < self.baseline_error


def _check_transfer_inputs(target_train: Dataset, source: Dataset | None,
                           target_test: Dataset) -> None:
    for other in (source, target_test):
        if other is None:
            continue
        if other.p != target_train.p or other.task != target_train.task:
            raise ValidationError("transfer datasets must share shape and task")


def _concat(a: Dataset, b: Dataset) -> Dataset:
    return Dataset(np.vstack([a.features, b.features]),
                   np.concatenate([a.labels, b.labels]), a.task)


def naive_pool_transfer(model: ModelSpec, target_train: Dataset,
                        source: Dataset | None, target_test: Dataset,
                        loss: LossKind | None = None) -> TransferOutcome:
    """Fit on target_train plus all source rows; compare against the
    target-only fit on the same held-out split. An absent source reduces
    to the baseline exactly."""
    _check_transfer_inputs(target_train, source, target_test)
    if loss is None:
        loss = target_train.task.default_loss()
    baseline = fit(model, target_train)
    base_err = mean_loss(baseline.predict(target_test.features),
                         target_test.labels, loss)
    if source is None:
        return TransferOutcome("naive", base_err, base_err)
    pooled = fit(model, _concat(target_train, source))
    err = mean_loss(pooled.predict(target_test.features),
                    target_test.labels, loss)
    return TransferOutcome("naive", err, base_err)


def _weighted_resample_fit(model: ModelSpec, X: np.ndarray, y: np.ndarray,
                           prob: np.ndarray, task, g: np.random.Generator):
    n = len(y)
    for _ in range(10):
        idx = g.choice(n, size=n, replace=True, p=prob)
        labels = y[idx]
        if len(np.unique(labels)) == task.n_classes:
            return fit(model, Dataset(X[idx], labels, task)), idx
    raise NumericError("weighted resampling kept missing a class")


def _tradaboost_rounds(base: ModelSpec, target_train: Dataset, source: Dataset,
                       rounds: int, seed: int):
    """The boosting loop: returns (learners, vote log-weights, final
    instance weights, target mask)."""
    n_s, n_t = source.n, target_train.n
    X = np.vstack([source.features, target_train.features])
    y = np.concatenate([source.labels, target_train.labels])
    is_target = np.arange(n_s + n_t) >= n_s
    w = np.full(n_s + n_t, 1.0 / (n_s + n_t))
    beta_src = 1.0 / (1.0 + math.sqrt(2.0 * math.log(max(n_s, 1)) / rounds))
    g = rng.stream(seed, rng.RESAMPLE)
    learners: list = []
    vote_logw: list[float] = []
    for _ in range(rounds):
        prob = w / w.sum()
        model, _ = _weighted_resample_fit(base, X, y, prob,
                                          target_train.task, g)
        pred = model.predict(X)
        wrong = pred != y
        target_w = w[is_target]
        eps_t = float(target_w[wrong[is_target]].sum() / target_w.sum())
        if eps_t >= 0.5:
            break
        beta_t = max(eps_t, 1e-10) / (1.0 - max(eps_t, 1e-10))
        learners.append(model)
        vote_logw.append(math.log(1.0 / beta_t))
        w = w * np.where(~is_target & wrong, beta_src, 1.0)
        w = w * np.where(is_target & wrong, 1.0 / beta_t, 1.0)
    return learners, vote_logw, w, is_target


def tradaboost(base: ModelSpec, target_train: Dataset, source: Dataset | None,
               target_test: Dataset, rounds: int = 20,
               seed: int = 0) -> TransferOutcome:
    """Instance-weighted transfer boosting for binary tasks.

    Source weights shrink by a fixed factor 1/(1 + sqrt(2 ln n_s / rounds))
    on misclassified source rows; target weights grow as in adaptive
    boosting. The final hypothesis is the weighted vote of the last
    ceil(rounds/2) learners.
    """
    _check_transfer_inputs(target_train, source, target_test)
    if target_train.task.kind != "binary":
        raise ValidationError("transfer boosting requires a binary task")
    if rounds < 2:
        raise ValidationError("need at least two boosting rounds")
    loss = LossKind.ZERO_ONE
    baseline = fit(base, target_train)
    base_err = mean_loss(baseline.predict(target_test.features),
                         target_test.labels, loss)
    if source is None or source.n == 0:
        return TransferOutcome("tradaboost", base_err, base_err)
    learners, vote_logw, _, _ = _tradaboost_rounds(base, target_train, source,
                                                   rounds, seed)
    if not learners:
        return TransferOutcome("tradaboost", base_err, base_err)
    half = max((len(learners) + 1) // 2, 1)
    tail = learners[-half:]
    tail_logw = vote_logw[-half:]
    votes = np.zeros(target_test.n)
    for model, lw in zip(tail, tail_logw):
        votes += lw * model.predict(target_test.features)
    pred = (votes >= 0.5 * sum(tail_logw)).astype(np.int64)
    err = mean_loss(pred, target_test.labels, loss)
    return TransferOutcome("tradaboost", err, base_err)


def run_method(method: str, model: ModelSpec, target_train: Dataset,
               source: Dataset | None, target_test: Dataset,
               rounds: int = 20, seed: int = 0) -> TransferOutcome:
    if method == "naive":
        return naive_pool_transfer(model, target_train, source, target_test)
    if method == "tradaboost":
        return tradaboost(model, target_train, source, target_test,
                          rounds=rounds, seed=seed)
    raise ValidationError(f"unknown transfer method {method!r}")
