"""Transferable-zone classification.

A source dataset's score is compared against thresholds built from the
target-only baseline error: tau1 = e0 + gamma1*SE(e0) and
tau2 = e0 + gamma2*SE(e0) (defaults gamma1=1, gamma2=5). Scores below
tau1 predict positive transfer, above tau2 negative transfer, anything
else is ambiguous; boundary values fall in the ambiguous zone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .data import Dataset, LossKind, make_folds, mean_loss
from .errors import ValidationError
from .models import ModelSpec, cv_error, default_models, fit
from .score import DEFAULT_FOLDS, DEFAULT_LAMBDA, softmax_weights, _vote_blend


class Zone(enum.Enum):
    POSITIVE = "PT"
    AMBIGUOUS = "AZ"
    NEGATIVE = "NT"


@dataclass(frozen=True)
class ZoneThresholds:
    e0: float
    se_e0: float
    gamma1: float = 1.0
    gamma2: float = 5.0
    tau1: float = field(init=False)
    tau2: float = field(init=False)

    def __post_init__(self):
        if self.se_e0 < 0:
            raise ValidationError("standard error must be >= 0")
        if not self.gamma1 < self.gamma2:
            raise ValidationError("need gamma1 < gamma2")
        object.__setattr__(self, "tau1", self.e0 + self.gamma1 * self.se_e0)
        object.__setattr__(self, "tau2", self.e0 + self.gamma2 * self.se_e0)

    def to_dict(self) -> dict:
        return {"e0": self.e0, "se_e0": self.se_e0, "gamma1": self.gamma1,
                "gamma2": self.gamma2, "tau1": self.tau1, "tau2": self.tau2}


def thresholds(e0: float, se: float, gamma1: float = 1.0,
               gamma2: float = 5.0) -> ZoneThresholds:
    return ZoneThresholds(e0=e0, se_e0=se, gamma1=gamma1, gamma2=gamma2)


def classify(cls_score: float, th: ZoneThresholds) -> Zone:
    if not np.isfinite(cls_score):
        raise ValidationError("score must be finite")
    if cls_score < th.tau1:
        return Zone.POSITIVE
    if cls_score > th.tau2:
        return Zone.NEGATIVE
    return Zone.AMBIGUOUS


def relative_error_reduction(e0: float, e_transfer: float) -> float:
    """(e0 - e_transfer) / e0; positive when transfer helped."""
    if e0 <= 0:
        raise ValidationError("baseline error must be positive")
    return (e0 - e_transfer) / e0


@dataclass(frozen=True)
class EstimatorConfig:
    """Which estimator the baseline error refers to; defaults match the
    ensemble scheme used for score estimation."""

    models: tuple[ModelSpec, ...]
    scheme: str = "ensemble"     # "single" | "unweighted-avg" | "weighted-avg" | "ensemble"
    lam: float = DEFAULT_LAMBDA
    folds_k: int = DEFAULT_FOLDS

    @staticmethod
    def for_task(task, scheme: str = "ensemble") -> "EstimatorConfig":
        return EstimatorConfig(models=tuple(default_models(task)), scheme=scheme)


def baseline_error(config: EstimatorConfig, target: Dataset,
                   seed: int = 0, loss: LossKind | None = None
                   ) -> tuple[float, float]:
    """K-fold baseline error (mean, SE) of the configured estimator on the
    target data alone.

    For the ensemble scheme each fold trains the panel on its training
    part, derives softmax weights from an inner cross-validation on that
    part, and scores the blended vote on the held-out part.
    """
    if loss is None:
        loss = target.task.default_loss()
    if config.scheme == "single":
        folds = make_folds(target, config.folds_k, rng.derive(seed, rng.FOLDS, 2))
        res = cv_error(config.models[0], target, folds, loss)
        return res.mean, res.se
    if config.scheme in ("unweighted-avg", "weighted-avg"):
        folds = make_folds(target, config.folds_k, rng.derive(seed, rng.FOLDS, 2))
        results = [cv_error(m, target, folds, loss) for m in config.models]
        per_fold = []
        for r in results:
            kept = [f for f in range(config.folds_k) if f not in r.skipped_folds]
            per_fold.append(dict(zip(kept, r.fold_losses)))
        usable = sorted(set.intersection(*(set(d) for d in per_fold)))
        if not usable:
            raise ValidationError("no usable folds for the baseline")
        mat = np.array([[d[f] for f in usable] for d in per_fold])
        if config.scheme == "weighted-avg":
            w = softmax_weights(mat.mean(axis=1), config.lam)
        else:
            w = np.full(len(results), 1.0 / len(results))
        fold_losses = w @ mat
        se = (float(fold_losses.std(ddof=1) / np.sqrt(len(fold_losses)))
              if len(fold_losses) > 1 else 0.0)
        return float(fold_losses.mean()), se
    if config.scheme != "ensemble":
        raise ValidationError(f"unknown baseline scheme {config.scheme!r}")
    folds = make_folds(target, config.folds_k, rng.derive(seed, rng.FOLDS, 2))
    fold_losses = []
    for f in range(config.folds_k):
        train_idx, test_idx = folds.split(f)
        train = target.subset(train_idx)
        inner = make_folds(train, config.folds_k, rng.derive(seed, rng.FOLDS, 3, f))
        preds, errs = [], []
        for m in config.models:
            errs.append(cv_error(m, train, inner, loss).mean)
            preds.append(fit(m, train).predict(target.features[test_idx]))
        w = softmax_weights(np.array(errs), config.lam)
        if target.task.is_classification:
            blended = _vote_blend(preds, w, target.task.n_classes)
        else:
            blended = sum(wi * pred for wi, pred in zip(w, preds))
        fold_losses.append(mean_loss(blended, target.labels[test_idx], loss))
    arr = np.asarray(fold_losses)
    se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), se
