"""Likelihood-based linear models: logistic / probit IRLS, softmax
regression by damped Newton, and ordinary least squares.

The IRLS loops use step halving against the negative log-likelihood, so
the recorded objective path is non-increasing by construction. A fit is
"converged" when the gradient's infinity norm drops below the spec
tolerance; hitting the iteration cap instead leaves a flag on the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from ..errors import NumericError

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _design(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class LinearBinaryCore:
    weights: np.ndarray   # includes intercept as last entry
    link: str             # "logit" or "probit"

    def decision(self, X: np.ndarray) -> np.ndarray:
        return _design(X) @ self.weights

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision(X) > 0).astype(np.int64)


def _binary_nll_grad_weights(eta, y, link):
    """Return (nll, d nll / d eta, newton weights) for one linear predictor."""
    if link == "logit":
        p = _sigmoid(eta)
        nll = float(np.sum(_softplus(eta) - y * eta))
        return nll, p - y, p * (1.0 - p)
    # probit, via log Phi for stability in the tails
    log_p = log_ndtr(eta)
    log_q = log_ndtr(-eta)
    nll = float(-np.sum(y * log_p + (1.0 - y) * log_q))
    log_pdf = -0.5 * eta * eta - _LOG_SQRT_2PI
    ratio_p = np.exp(log_pdf - log_p)
    ratio_q = np.exp(log_pdf - log_q)
    grad_eta = -y * ratio_p + (1.0 - y) * ratio_q
    fisher = np.exp(2.0 * log_pdf - log_p - log_q)
    return nll, grad_eta, fisher


def fit_binary_irls(X, y, algorithm, spec):
    link = "logit" if algorithm == "logreg" else "probit"
    A = _design(X)
    n, d = A.shape
    w = np.zeros(d)
    eta = np.zeros(n)
    yf = y.astype(np.float64)
    nll, grad_eta, wts = _binary_nll_grad_weights(eta, yf, link)
    path = [nll]
    flags = []
    it = 0
    converged = False
    for it in range(1, spec.max_iter + 1):
        grad = A.T @ grad_eta
        if np.max(np.abs(grad)) <= spec.tol:
            converged = True
            it -= 1
            break
        H = (A * np.maximum(wts, 1e-10)[:, None]).T @ A
        H[np.diag_indices_from(H)] += 1e-10
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        accepted = False
        t = 1.0
        for _ in range(50):
            w_new = w - t * step
            eta_new = A @ w_new
            nll_new, grad_new, wts_new = _binary_nll_grad_weights(eta_new, yf, link)
            if np.isfinite(nll_new) and nll_new <= nll + 1e-12:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            flags.append("stalled")
            break
        w, eta, nll, grad_eta, wts = w_new, eta_new, nll_new, grad_new, wts_new
        path.append(nll)
    else:
        it = spec.max_iter
    if not converged and "stalled" not in flags:
        # Re-test at the final iterate before flagging.
        if np.max(np.abs(A.T @ grad_eta)) <= spec.tol:
            converged = True
    if not converged:
        flags.append("not-converged")
    return LinearBinaryCore(weights=w, link=link), it, path, flags


@dataclass(frozen=True)
class SoftmaxCore:
    weights: np.ndarray   # (K-1, p+1); class K-1 logits pinned at zero

    def logits(self, X: np.ndarray) -> np.ndarray:
        z = _design(X) @ self.weights.T
        return np.hstack([z, np.zeros((X.shape[0], 1))])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1).astype(np.int64)


def _softmax_nll(Z, y_idx):
    zmax = Z.max(axis=1)
    lse = zmax + np.log(np.exp(Z - zmax[:, None]).sum(axis=1))
    return float(np.sum(lse - Z[np.arange(len(y_idx)), y_idx]))


def fit_multinomial(X, y, n_classes, spec):
    A = _design(X)
    n, d = A.shape
    km1 = n_classes - 1
    Y = np.zeros((n, km1))
    for k in range(km1):
        Y[:, k] = y == k
    theta = np.zeros((km1, d))

    def forward(th):
        Z = np.hstack([A @ th.T, np.zeros((n, 1))])
        zmax = Z.max(axis=1, keepdims=True)
        E = np.exp(Z - zmax)
        P = E / E.sum(axis=1, keepdims=True)
        return _softmax_nll(Z, y), P

    nll, P = forward(theta)
    path = [nll]
    flags = []
    it = 0
    converged = False
    for it in range(1, spec.max_iter + 1):
        G = A.T @ (P[:, :km1] - Y)          # (d, km1)
        grad = G.T.reshape(-1)
        if np.max(np.abs(grad)) <= spec.tol:
            converged = True
            it -= 1
            break
        H = np.empty((km1 * d, km1 * d))
        for k in range(km1):
            for l in range(k, km1):
                wkl = P[:, k] * ((k == l) - P[:, l])
                block = (A * wkl[:, None]).T @ A
                H[k * d:(k + 1) * d, l * d:(l + 1) * d] = block
                if l != k:
                    H[l * d:(l + 1) * d, k * d:(k + 1) * d] = block
        H[np.diag_indices_from(H)] += 1e-10
        try:
            step = np.linalg.solve(H, grad).reshape(km1, d)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0].reshape(km1, d)
        accepted = False
        t = 1.0
        for _ in range(50):
            theta_new = theta - t * step
            nll_new, P_new = forward(theta_new)
            if np.isfinite(nll_new) and nll_new <= nll + 1e-12:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            flags.append("stalled")
            break
        theta, nll, P = theta_new, nll_new, P_new
        path.append(nll)
    else:
        it = spec.max_iter
    if not converged:
        G = A.T @ (P[:, :km1] - Y)
        if np.max(np.abs(G)) <= spec.tol:
            converged = True
    if not converged and "stalled" not in flags:
        flags.append("not-converged")
    return SoftmaxCore(weights=theta), it, path, flags


@dataclass(frozen=True)
class OlsCore:
    weights: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _design(X) @ self.weights


def fit_ols(X, y):
    A = _design(X)
    w, *_ = np.linalg.lstsq(A, y, rcond=None)
    if not np.all(np.isfinite(w)):
        raise NumericError("least squares produced non-finite coefficients")
    mse = float(np.mean((A @ w - y) ** 2))
    return OlsCore(weights=w), 1, [mse], []
