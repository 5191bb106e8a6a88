"""Cross-learning score estimation.

The score of a (target, source) pair is the average of the two
cross-domain errors: a model trained on the target evaluated on all of
the source, and vice versa. Single-model estimation trains one learner
per side; the multi-model schemes either average per-model scores under
cross-validation softmax weights or blend the fitted models into one
weighted-vote predictor per domain before cross-evaluating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .data import Dataset, LossKind, make_folds, mean_loss
from .errors import CrossLearnError, NumericError, ValidationError
from .models import ModelSpec, cv_error, fit

DEFAULT_LAMBDA = 500.0
DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class ClsEstimate:
    """A cross-learning score with its two directional errors and provenance."""

    score: float
    e_t: float                      # target-trained model's loss on the source
    e_s: float                      # source-trained model's loss on the target
    scheme: str
    loss: LossKind
    w: float = 0.5
    models: tuple[str, ...] = ()
    weights: tuple[tuple[str, float], ...] | None = None
    lam: float | None = None
    seed: int | None = None
    mc_se: float | None = None
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        expect = self.w * self.e_t + (1.0 - self.w) * self.e_s
        if not np.isfinite(self.score) or abs(self.score - expect) > 1e-12:
            raise ValidationError("score must equal w*e_t + (1-w)*e_s")
        if self.loss is LossKind.ZERO_ONE and not -1e-12 <= self.score <= 1 + 1e-12:
            raise ValidationError("zero-one scores must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "score": self.score, "e_t": self.e_t, "e_s": self.e_s,
            "scheme": self.scheme, "loss": self.loss.value, "w": self.w,
            "models": list(self.models),
            "weights": None if self.weights is None else
                       {k: v for k, v in self.weights},
            "lambda": self.lam, "seed": self.seed, "mc_se": self.mc_se,
            "excluded": list(self.excluded),
        }


@dataclass(frozen=True)
class EnsembleWeights:
    """Softmax weights over a model panel from cross-validation errors."""

    lam: float
    cv_errors: tuple[tuple[str, float], ...]
    weights: tuple[tuple[str, float], ...]

    def __post_init__(self):
        w = np.array([v for _, v in self.weights])
        if w.min() < 0 or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must form a probability simplex")

    def as_array(self) -> np.ndarray:
        return np.array([v for _, v in self.weights])


def softmax_weights(errors: np.ndarray, lam: float) -> np.ndarray:
    """exp(-lam * error), normalized; lam=0 gives exactly uniform weights."""
    if lam < 0:
        raise ValidationError("lambda must be >= 0")
    if lam == 0:
        return np.full(len(errors), 1.0 / len(errors))
    z = -lam * (np.asarray(errors) - np.min(errors))
    e = np.exp(z)
    return e / e.sum()


def cls_weighted_asymmetric(w: float, e_t: float, e_s: float) -> float:
    """Asymmetric combination w*e_t + (1-w)*e_s for 0 < w < 1."""
    if not 0.0 < w < 1.0:
        raise ValidationError("weight w must lie strictly inside (0, 1)")
    return w * e_t + (1.0 - w) * e_s


def _check_pair(target: Dataset, source: Dataset, loss: LossKind | None) -> LossKind:
    if target.p != source.p:
        raise ValidationError("target and source dimension mismatch")
    if target.task != source.task:
        raise ValidationError("target and source task mismatch")
    if loss is None:
        loss = target.task.default_loss()
    if loss is LossKind.ZERO_ONE and not target.task.is_classification:
        raise ValidationError("zero-one loss needs a classification task")
    if loss is LossKind.SQUARED and target.task.is_classification:
        raise ValidationError("squared loss needs a regression task")
    return loss


def cls_single(model: ModelSpec, target: Dataset, source: Dataset,
               loss: LossKind | None = None) -> ClsEstimate:
    """Score from one model: train on each side, evaluate on all of the other."""
    loss = _check_pair(target, source, loss)
    fit_t = fit(model, target)
    fit_s = fit(model, source)
    e_t = mean_loss(fit_t.predict(source.features), source.labels, loss)
    e_s = mean_loss(fit_s.predict(target.features), target.labels, loss)
    return ClsEstimate(score=0.5 * (e_t + e_s), e_t=e_t, e_s=e_s,
                       scheme=f"single:{model.algorithm}", loss=loss,
                       models=(model.algorithm,))


def _panel_names(models: list[ModelSpec]) -> list[str]:
    names = []
    seen: dict[str, int] = {}
    for m in models:
        k = seen.get(m.algorithm, 0)
        seen[m.algorithm] = k + 1
        names.append(m.algorithm if k == 0 else f"{m.algorithm}.{k + 1}")
    return names


@dataclass(frozen=True)
class PanelResult:
    """Everything the multi-model schemes share: per-model estimates,
    per-domain softmax weights and the blended-ensemble estimate."""

    per_model: tuple[tuple[str, ClsEstimate], ...]
    unweighted: ClsEstimate
    weighted: ClsEstimate
    ensemble: ClsEstimate
    weights_target: EnsembleWeights
    weights_source: EnsembleWeights
    excluded: tuple[str, ...]


def evaluate_panel(models: list[ModelSpec], target: Dataset, source: Dataset,
                   folds_k: int = DEFAULT_FOLDS, lam: float = DEFAULT_LAMBDA,
                   loss: LossKind | None = None, seed: int = 0) -> PanelResult:
    """Fit the whole model panel once and derive every estimation scheme.

    A model that fails on either domain is dropped from the panel (and
    recorded); weights are renormalized over the survivors.
    """
    if not models:
        raise ValidationError("need at least one model")
    loss = _check_pair(target, source, loss)
    names = _panel_names(models)
    folds_t = make_folds(target, folds_k, rng.derive(seed, rng.FOLDS, 0))
    folds_s = make_folds(source, folds_k, rng.derive(seed, rng.FOLDS, 1))
    kept: list[tuple[str, ModelSpec]] = []
    fits_t, fits_s, cvs_t, cvs_s = [], [], [], []
    preds_ts, preds_st = [], []
    excluded = []
    for name, m in zip(names, models):
        try:
            ft = fit(m, target)
            fs = fit(m, source)
            cvt = cv_error(m, target, folds_t, loss)
            cvs = cv_error(m, source, folds_s, loss)
            preds_ts.append(ft.predict(source.features))
            preds_st.append(fs.predict(target.features))
        except CrossLearnError:
            excluded.append(name)
            continue
        kept.append((name, m))
        fits_t.append(ft)
        fits_s.append(fs)
        cvs_t.append(cvt)
        cvs_s.append(cvs)
    if not kept:
        raise NumericError("every model in the panel failed to fit")
    kept_names = [n for n, _ in kept]
    e_t = np.array([mean_loss(pred, source.labels, loss) for pred in preds_ts])
    e_s = np.array([mean_loss(pred, target.labels, loss) for pred in preds_st])
    scores = 0.5 * (e_t + e_s)
    per_model = tuple(
        (name, ClsEstimate(score=float(scores[i]), e_t=float(e_t[i]),
                           e_s=float(e_s[i]), scheme=f"single:{name}",
                           loss=loss, models=(name,)))
        for i, name in enumerate(kept_names))
    err_t = np.array([c.mean for c in cvs_t])
    err_s = np.array([c.mean for c in cvs_s])
    w_t = softmax_weights(err_t, lam)
    w_s = softmax_weights(err_s, lam)
    weights_target = EnsembleWeights(
        lam=lam, cv_errors=tuple(zip(kept_names, map(float, err_t))),
        weights=tuple(zip(kept_names, map(float, w_t))))
    weights_source = EnsembleWeights(
        lam=lam, cv_errors=tuple(zip(kept_names, map(float, err_s))),
        weights=tuple(zip(kept_names, map(float, w_s))))

    def combine(weights: np.ndarray, scheme: str) -> ClsEstimate:
        et = float(weights @ e_t)
        es = float(weights @ e_s)
        return ClsEstimate(score=0.5 * (et + es), e_t=et, e_s=es, scheme=scheme,
                           loss=loss, models=tuple(kept_names),
                           weights=tuple(zip(kept_names, map(float, weights))),
                           lam=lam, seed=seed, excluded=tuple(excluded))

    unweighted = combine(np.full(len(kept), 1.0 / len(kept)), "unweighted-avg")
    weighted = combine(0.5 * (w_t + w_s), "weighted-avg")

    if target.task.is_classification:
        k = target.task.n_classes
        ens_ts = _vote_blend(preds_ts, w_t, k)
        ens_st = _vote_blend(preds_st, w_s, k)
    else:
        ens_ts = sum(w * pred for w, pred in zip(w_t, preds_ts))
        ens_st = sum(w * pred for w, pred in zip(w_s, preds_st))
    ens_et = mean_loss(ens_ts, source.labels, loss)
    ens_es = mean_loss(ens_st, target.labels, loss)
    ensemble = ClsEstimate(
        score=0.5 * (ens_et + ens_es), e_t=ens_et, e_s=ens_es,
        scheme="ensemble", loss=loss, models=tuple(kept_names),
        weights=tuple(zip(kept_names, map(float, 0.5 * (w_t + w_s)))),
        lam=lam, seed=seed, excluded=tuple(excluded))
    return PanelResult(per_model=per_model, unweighted=unweighted,
                       weighted=weighted, ensemble=ensemble,
                       weights_target=weights_target,
                       weights_source=weights_source, excluded=tuple(excluded))


def _vote_blend(preds: list[np.ndarray], weights: np.ndarray, k: int) -> np.ndarray:
    """Weighted one-hot votes; argmax with ties to the smaller class id."""
    votes = np.zeros((len(preds[0]), k))
    for w, pred in zip(weights, preds):
        votes[np.arange(len(pred)), pred] += w
    return np.argmax(votes, axis=1).astype(np.int64)


def cls_weighted_avg(models: list[ModelSpec], target: Dataset, source: Dataset,
                     folds_k: int = DEFAULT_FOLDS, lam: float = DEFAULT_LAMBDA,
                     loss: LossKind | None = None, seed: int = 0) -> ClsEstimate:
    """Convex combination of per-model scores under averaged domain weights."""
    return evaluate_panel(models, target, source, folds_k, lam, loss, seed).weighted


def cls_ensemble(models: list[ModelSpec], target: Dataset, source: Dataset,
                 folds_k: int = DEFAULT_FOLDS, lam: float = DEFAULT_LAMBDA,
                 loss: LossKind | None = None, seed: int = 0) -> ClsEstimate:
    """Blend the fitted panel into one weighted-vote predictor per domain."""
    return evaluate_panel(models, target, source, folds_k, lam, loss, seed).ensemble
