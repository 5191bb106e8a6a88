"""Gaussian discriminant classifiers (shared or per-class covariance)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RIDGE = 1e-6


@dataclass(frozen=True)
class LdaCore:
    coef: np.ndarray        # (K, p)
    intercept: np.ndarray   # (K,)

    def scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef.T + self.intercept

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1).astype(np.int64)


@dataclass(frozen=True)
class QdaCore:
    means: np.ndarray        # (K, p)
    chols: np.ndarray        # (K, p, p) lower Cholesky factors
    log_norms: np.ndarray    # (K,) log prior - log det term

    def scores(self, X: np.ndarray) -> np.ndarray:
        m = X.shape[0]
        out = np.empty((m, len(self.means)))
        for k in range(len(self.means)):
            sol = np.linalg.solve(self.chols[k], (X - self.means[k]).T)
            out[:, k] = self.log_norms[k] - 0.5 * np.einsum("ij,ij->j", sol, sol)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1).astype(np.int64)


def _chol_with_ridge(S: np.ndarray, flags: list[str]) -> np.ndarray:
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        flags.append("ridged-covariance")
        return np.linalg.cholesky(S + RIDGE * np.eye(S.shape[0]))


def fit_discriminant(X, y, n_classes, algorithm):
    n, p = X.shape
    flags: list[str] = []
    means = np.empty((n_classes, p))
    priors = np.empty(n_classes)
    diffs = np.empty_like(X)
    per_class = []
    for k in range(n_classes):
        rows = y == k
        nk = int(rows.sum())
        means[k] = X[rows].mean(axis=0)
        priors[k] = nk / n
        d = X[rows] - means[k]
        diffs[rows] = d
        per_class.append((nk, d))
    if algorithm == "lda":
        denom = max(n - n_classes, 1)
        S = diffs.T @ diffs / denom
        L = _chol_with_ridge(S, flags)
        # Linear discriminants: x' S^-1 mu_k - mu_k' S^-1 mu_k / 2 + log prior
        half = np.linalg.solve(L, means.T)            # (p, K)
        coef = np.linalg.solve(L.T, half).T           # (K, p)
        intercept = -0.5 * np.einsum("ij,ij->i", coef, means) + np.log(priors)
        return LdaCore(coef=coef, intercept=intercept), 1, [0.0], flags
    chols = np.empty((n_classes, p, p))
    log_norms = np.empty(n_classes)
    for k, (nk, d) in enumerate(per_class):
        S = d.T @ d / max(nk - 1, 1)
        L = _chol_with_ridge(S, flags)
        chols[k] = L
        log_norms[k] = np.log(priors[k]) - np.log(np.diag(L)).sum()
    return QdaCore(means=means, chols=chols, log_norms=log_norms), 1, [0.0], flags
