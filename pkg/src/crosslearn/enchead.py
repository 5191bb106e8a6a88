"""Encoder-head score estimation for representation-level transfer.

A small fully connected rectifier network is trained jointly on the two
training sets with a temporary softmax head (discarded afterwards). The
frozen encoder then embeds all four splits; lightweight softmax heads are
trained per domain on the embeddings and cross-evaluated on the other
domain's test split. The baseline error comes from cross-validating the
target head on the frozen target-train embeddings, which also yields the
thresholds for the zone verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .data import Dataset, LossKind, make_folds, mean_loss
from .errors import NumericError, ValidationError
from .models import ModelSpec, cv_error, fit
from .zones import Zone, classify, thresholds


@dataclass(frozen=True)
class EncoderConfig:
    hidden: tuple[int, int] = (32, 16)
    epochs: int = 100
    step: float = 0.01
    batch: int = 32
    seed: int = 0

    def __post_init__(self):
        if any(wd < 1 for wd in self.hidden) or len(self.hidden) != 2:
            raise ValidationError("hidden widths must be two integers >= 1")
        if self.epochs < 1 or self.step <= 0 or self.batch < 1:
            raise ValidationError("epochs, step and batch must be positive")


class MlpNet:
    """Two rectifier layers plus a softmax head, trained by plain
    mini-batch gradient descent with a fixed step."""

    def __init__(self, p: int, hidden: tuple[int, int], n_classes: int,
                 seed: int):
        g = rng.stream(seed, rng.INIT)
        h1, h2 = hidden
        self.w1 = g.normal(0.0, np.sqrt(2.0 / p), (p, h1))
        self.b1 = np.zeros(h1)
        self.w2 = g.normal(0.0, np.sqrt(2.0 / h1), (h1, h2))
        self.b2 = np.zeros(h2)
        self.w3 = g.normal(0.0, np.sqrt(2.0 / h2), (h2, n_classes))
        self.b3 = np.zeros(n_classes)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]

    def set_flat(self, flat: np.ndarray) -> None:
        pos = 0
        for a in self.params:
            a[...] = flat[pos:pos + a.size].reshape(a.shape)
            pos += a.size

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.params])

    def embed(self, X: np.ndarray) -> np.ndarray:
        z1 = np.maximum(X @ self.w1 + self.b1, 0.0)
        return np.maximum(z1 @ self.w2 + self.b2, 0.0)

    def loss_and_grad(self, X: np.ndarray, y: np.ndarray):
        n = X.shape[0]
        with np.errstate(over="ignore", invalid="ignore"):
            a1 = X @ self.w1 + self.b1
            z1 = np.maximum(a1, 0.0)
            a2 = z1 @ self.w2 + self.b2
            z2 = np.maximum(a2, 0.0)
            logits = z2 @ self.w3 + self.b3
            shifted = logits - logits.max(axis=1, keepdims=True)
            expz = np.exp(shifted)
            probs = expz / expz.sum(axis=1, keepdims=True)
            nll = -float(np.mean(shifted[np.arange(n), y]
                                 - np.log(expz.sum(axis=1))))
            d3 = probs.copy()
            d3[np.arange(n), y] -= 1.0
            d3 /= n
            gw3 = z2.T @ d3
            gb3 = d3.sum(axis=0)
            d2 = (d3 @ self.w3.T) * (a2 > 0)
            gw2 = z1.T @ d2
            gb2 = d2.sum(axis=0)
            d1 = (d2 @ self.w2.T) * (a1 > 0)
            gw1 = X.T @ d1
            gb1 = d1.sum(axis=0)
        return nll, [gw1, gb1, gw2, gb2, gw3, gb3]

    def mean_loss(self, X: np.ndarray, y: np.ndarray) -> float:
        return self.loss_and_grad(X, y)[0]


@dataclass(frozen=True)
class Encoder:
    """Frozen embedding map produced by joint training."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    epoch_losses: tuple[float, ...]

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.w1.shape[0]:
            raise ValidationError(f"expected (m, {self.w1.shape[0]}) matrix")
        z1 = np.maximum(X @ self.w1 + self.b1, 0.0)
        return np.maximum(z1 @ self.w2 + self.b2, 0.0)

    @property
    def width(self) -> int:
        return self.w2.shape[1]


def train_joint_encoder(config: EncoderConfig, target_train: Dataset,
                        source_train: Dataset) -> Encoder:
    """Train the shared encoder on the union of the two training sets with
    a temporary softmax head over the shared label space."""
    if target_train.p != source_train.p or target_train.task != source_train.task:
        raise ValidationError("joint training needs a shared space and task")
    if not target_train.task.is_classification:
        raise ValidationError("encoder-head scoring is defined for classification")
    X = np.vstack([target_train.features, source_train.features])
    y = np.concatenate([target_train.labels, source_train.labels])
    k = target_train.task.n_classes
    net = MlpNet(target_train.p, config.hidden, k, config.seed)
    g = rng.stream(config.seed, rng.SHUFFLE)
    n = len(y)
    losses = [net.mean_loss(X, y)]
    for epoch in range(1, config.epochs + 1):
        order = g.permutation(n)
        for start in range(0, n, config.batch):
            rows = order[start:start + config.batch]
            _, grads = net.loss_and_grad(X[rows], y[rows])
            for a, da in zip(net.params, grads):
                a -= config.step * da
        loss = net.mean_loss(X, y)
        if not np.isfinite(loss):
            raise NumericError(f"encoder training diverged at epoch {epoch}")
        losses.append(loss)
    return Encoder(w1=net.w1.copy(), b1=net.b1.copy(),
                   w2=net.w2.copy(), b2=net.b2.copy(),
                   epoch_losses=tuple(losses))


@dataclass(frozen=True)
class EncHeadResult:
    cls_enc_head: float
    e_t: float
    e_s: float
    e0: float
    se_e0: float
    zone: Zone
    encoder: Encoder

    def __post_init__(self):
        if abs(self.cls_enc_head - 0.5 * (self.e_t + self.e_s)) > 1e-12:
            raise ValidationError("score must average the two head errors")

    def to_dict(self) -> dict:
        return {"cls_enc_head": self.cls_enc_head, "e_t": self.e_t,
                "e_s": self.e_s, "e0": self.e0, "se_e0": self.se_e0,
                "zone": self.zone.value}


def _embedded(encoder: Encoder, d: Dataset) -> Dataset:
    return Dataset(encoder.transform(d.features), d.labels, d.task)


def cls_enc_head(config: EncoderConfig, target_train: Dataset,
                 target_test: Dataset, source_train: Dataset,
                 source_test: Dataset, gamma1: float = 1.0,
                 gamma2: float = 5.0, folds_k: int = 5) -> EncHeadResult:
    """Representation-level score: cross-evaluate per-domain softmax heads
    on the frozen joint encoder, plus the target baseline and its zone."""
    for d in (target_test, source_train, source_test):
        if d.p != target_train.p or d.task != target_train.task:
            raise ValidationError("all four splits need one shape and task")
    encoder = train_joint_encoder(config, target_train, source_train)
    emb_tt = _embedded(encoder, target_train)
    emb_te = _embedded(encoder, target_test)
    emb_st = _embedded(encoder, source_train)
    emb_se = _embedded(encoder, source_test)
    head_spec = ModelSpec("mlogreg") if target_train.task.n_classes > 2 \
        else ModelSpec("logreg")
    loss = LossKind.ZERO_ONE
    head_s = fit(head_spec, emb_st)
    head_t = fit(head_spec, emb_tt)
    e_t = mean_loss(head_s.predict(emb_te.features), emb_te.labels, loss)
    e_s = mean_loss(head_t.predict(emb_se.features), emb_se.labels, loss)
    folds = make_folds(emb_tt, folds_k, rng.derive(config.seed, rng.FOLDS, 9))
    cv = cv_error(head_spec, emb_tt, folds, loss)
    score = 0.5 * (e_t + e_s)
    zone = classify(score, thresholds(cv.mean, cv.se, gamma1, gamma2))
    return EncHeadResult(cls_enc_head=score, e_t=e_t, e_s=e_s, e0=cv.mean,
                         se_e0=cv.se, zone=zone, encoder=encoder)
