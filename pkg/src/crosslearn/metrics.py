"""Feature- and label-level distribution distances used for comparison.

All three metrics operate on Gaussian fits of the data: the divergence
and the quadratic transport distance between full-covariance fits of the
feature marginals, and a label-aware transport distance whose ground
cost augments squared feature distance with the quadratic transport
distance between class-conditional fits. The label-aware metric runs
entropic regularized transport on the empirical samples and is debiased
with the two self-transport terms, so the distance of a dataset to
itself vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset
from .errors import ValidationError

SINKHORN_ITERS = 500
SINKHORN_EPS_SCALE = 0.1


@dataclass(frozen=True)
class GaussianFit:
    """Mean and ridge-regularized covariance of one sample."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray

    @staticmethod
    def from_rows(X: np.ndarray) -> "GaussianFit":
        if X.ndim != 2 or X.shape[0] < 2:
            raise ValidationError("need at least two rows to fit a Gaussian")
        mean = X.mean(axis=0)
        d = X - mean
        cov = d.T @ d / (X.shape[0] - 1)
        ridge = max(1e-6 * float(np.trace(cov)) / X.shape[1], 1e-9)
        cov = cov + ridge * np.eye(X.shape[1])
        return GaussianFit(mean=mean, cov=cov, chol=np.linalg.cholesky(cov))


def _fit_pair(a: Dataset, b: Dataset, min_rows: int) -> tuple[GaussianFit, GaussianFit]:
    if a.p != b.p:
        raise ValidationError("dimension mismatch between datasets")
    if a.n < min_rows or b.n < min_rows:
        raise ValidationError(f"need at least {min_rows} rows per dataset")
    return GaussianFit.from_rows(a.features), GaussianFit.from_rows(b.features)


def kl_mvn(fa: GaussianFit, fb: GaussianFit) -> float:
    """KL(N_a || N_b) in the Cholesky form; exactly zero for identical fits."""
    p = len(fa.mean)
    half = solve_triangular(fb.chol, fa.chol, lower=True)
    trace_term = float(np.sum(half * half))
    md = solve_triangular(fb.chol, fa.mean - fb.mean, lower=True)
    mean_term = float(md @ md)
    logdet = 2.0 * (float(np.sum(np.log(np.diag(fb.chol))))
                    - float(np.sum(np.log(np.diag(fa.chol)))))
    return 0.5 * (trace_term + mean_term - p + logdet)


def kl_gaussian(a: Dataset, b: Dataset) -> float:
    """KL divergence between Gaussian fits of the two feature marginals."""
    fa, fb = _fit_pair(a, b, min_rows=a.p + 2)
    return kl_mvn(fa, fb)


def _psd_sqrt(S: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(S)
    w = np.maximum(w, 0.0)
    return (V * np.sqrt(w)) @ V.T


def w2_mvn(mean_a, cov_a, mean_b, cov_b) -> float:
    """Quadratic transport distance between two Gaussians (Bures form)."""
    mean_a = np.asarray(mean_a, dtype=np.float64)
    mean_b = np.asarray(mean_b, dtype=np.float64)
    root = _psd_sqrt(cov_a)
    cross = _psd_sqrt(root @ cov_b @ root)
    d2 = (float(np.sum((mean_a - mean_b) ** 2))
          + float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross)))
    return float(np.sqrt(max(d2, 0.0)))


def w2_gaussian(a: Dataset, b: Dataset) -> float:
    """Quadratic transport distance between Gaussian fits of the features."""
    fa, fb = _fit_pair(a, b, min_rows=2)
    return w2_mvn(fa.mean, fa.cov, fb.mean, fb.cov)


def sinkhorn_cost(C: np.ndarray, eps: float, iters: int = SINKHORN_ITERS) -> float:
    """Entropic-regularized transport cost <plan, C> with uniform marginals."""
    n, m = C.shape
    K = np.exp(-C / eps)
    a = np.full(n, 1.0 / n)
    b = np.full(m, 1.0 / m)
    v = np.ones(m)
    for _ in range(iters):
        u = a / np.maximum(K @ v, 1e-300)
        v = b / np.maximum(K.T @ u, 1e-300)
    plan = (u[:, None] * K) * v[None, :]
    return float(np.sum(plan * C))


def _class_fits(d: Dataset) -> list[GaussianFit]:
    fits = []
    for cls in range(d.task.n_classes):
        rows = d.features[d.labels == cls]
        if rows.shape[0] < 2:
            raise ValidationError(f"class {cls} has fewer than 2 samples")
        fits.append(GaussianFit.from_rows(rows))
    return fits


def _label_cost(fits_a: list[GaussianFit], fits_b: list[GaussianFit]) -> np.ndarray:
    out = np.empty((len(fits_a), len(fits_b)))
    for i, fa in enumerate(fits_a):
        for j, fb in enumerate(fits_b):
            out[i, j] = w2_mvn(fa.mean, fa.cov, fb.mean, fb.cov) ** 2
    return out


def _pair_cost(a: Dataset, b: Dataset, label_d2: np.ndarray) -> np.ndarray:
    sq = (np.sum(a.features ** 2, axis=1)[:, None]
          + np.sum(b.features ** 2, axis=1)[None, :]
          - 2.0 * (a.features @ b.features.T))
    np.maximum(sq, 0.0, out=sq)
    return sq + label_d2[np.ix_(a.labels, b.labels)]


def otdd_gaussian(a: Dataset, b: Dataset) -> float:
    """Label-aware transport distance between two classification datasets.

    Ground cost: squared feature distance plus the squared quadratic
    transport distance between the class-conditional Gaussian fits.
    Debiased entropic transport, square-rooted.
    """
    if not (a.task.is_classification and b.task.is_classification):
        raise ValidationError("label-aware distance needs classification tasks")
    if a.task != b.task:
        raise ValidationError("datasets must share one label space")
    if a.p != b.p:
        raise ValidationError("dimension mismatch between datasets")
    fits_a = _class_fits(a)
    fits_b = _class_fits(b)
    C_ab = _pair_cost(a, b, _label_cost(fits_a, fits_b))
    eps = SINKHORN_EPS_SCALE * float(np.median(C_ab))
    if eps <= 0:
        return 0.0
    cost_ab = sinkhorn_cost(C_ab, eps)
    cost_aa = sinkhorn_cost(_pair_cost(a, a, _label_cost(fits_a, fits_a)), eps)
    cost_bb = sinkhorn_cost(_pair_cost(b, b, _label_cost(fits_b, fits_b)), eps)
    d2 = cost_ab - 0.5 * (cost_aa + cost_bb)
    return float(np.sqrt(max(d2, 0.0)))
