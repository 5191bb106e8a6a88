"""Support vector machines trained by sequential minimal optimization.

One dual solver covers both classification and epsilon-tube regression:
it minimizes 1/2 a'Qa + q'a over the box [0, C]^m subject to y'a = 0,
choosing the maximal-violating index and its best second-order partner
each step. Pair updates keep the equality constraint exact and each
accepted step strictly decreases the dual objective, so the recorded
objective path is monotone. Regression is solved in the standard doubled
formulation (one variable per tube side), which has exactly this shape.
The inner loop is compiled with numba; the algorithm itself is spelled
out below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

TOL_KKT = 1e-3          # maximal-violating-pair stopping threshold
PASS_BUDGET = 100       # iteration cap = PASS_BUDGET * number of dual variables


def rbf_gamma(X: np.ndarray) -> float:
    """Default RBF width 1/(p * mean feature variance)."""
    v = float(X.var(axis=0).mean())
    if v <= 0:
        v = 1.0
    return 1.0 / (X.shape[1] * v)


def kernel_matrix(kind: str, A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    if kind == "linear":
        return A @ B.T
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * (A @ B.T))
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@njit(cache=True)
def _smo_kernel(Q, qdiag, qlin, y, C, tol, max_iter, check_every):
    m = Q.shape[0]
    alpha = np.zeros(m)
    G = qlin.copy()
    n_slots = max_iter // check_every + 3
    path = np.empty(n_slots)
    path[0] = 0.0
    n_path = 1
    iters = 0
    for it in range(1, max_iter + 1):
        m_val = -np.inf
        M_val = np.inf
        i = -1
        for t in range(m):
            v = -y[t] * G[t]
            if ((y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0)) \
                    and v > m_val:
                m_val = v
                i = t
            if ((y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C)) \
                    and v < M_val:
                M_val = v
        if m_val - M_val <= tol:
            break
        # Second-order partner: maximize guaranteed decrease b^2/a among
        # violating candidates on the low side.
        best = -np.inf
        j = -1
        step = 0.0
        for t in range(m):
            if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
                b = m_val + y[t] * G[t]
                if b > 0.0:
                    a = qdiag[i] + qdiag[t] - 2.0 * y[i] * y[t] * Q[i, t]
                    if a < 1e-12:
                        a = 1e-12
                    sc = b * b / a
                    if sc > best:
                        best = sc
                        j = t
                        step = b / a
        cap_i = (C - alpha[i]) if y[i] > 0.0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0.0 else (C - alpha[j])
        if step > cap_i:
            step = cap_i
        if step > cap_j:
            step = cap_j
        di = y[i] * step
        dj = -y[j] * step
        ai = alpha[i] + di
        aj = alpha[j] + dj
        alpha[i] = 0.0 if ai < 0.0 else (C if ai > C else ai)
        alpha[j] = 0.0 if aj < 0.0 else (C if aj > C else aj)
        for t in range(m):
            G[t] += Q[i, t] * di + Q[j, t] * dj
        iters = it
        if it % check_every == 0 and n_path < n_slots - 1:
            s = 0.0
            for t in range(m):
                s += alpha[t] * (G[t] + qlin[t])
            path[n_path] = 0.5 * s
            n_path += 1
    m_val = -np.inf
    M_val = np.inf
    for t in range(m):
        v = -y[t] * G[t]
        if ((y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0)) \
                and v > m_val:
            m_val = v
        if ((y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C)) \
                and v < M_val:
            M_val = v
    s = 0.0
    for t in range(m):
        s += alpha[t] * (G[t] + qlin[t])
    path[n_path] = 0.5 * s
    n_path += 1
    return alpha, 0.5 * (m_val + M_val), m_val - M_val, iters, path[:n_path]


def _smo(Q, qlin, y, C, tol, max_iter):
    alpha, bias, viol, iters, path = _smo_kernel(
        np.ascontiguousarray(Q), np.ascontiguousarray(np.diag(Q)),
        qlin.astype(np.float64), y.astype(np.float64),
        float(C), float(tol), int(max_iter), max(Q.shape[0], 1))
    flags = ["smo-iteration-cap"] if iters >= max_iter else []
    return alpha, float(bias), iters, list(path), flags, float(viol)


@dataclass(frozen=True)
class SvcBinaryCore:
    kind: str
    gamma: float
    support: np.ndarray       # (s, p) support vectors
    coef: np.ndarray          # (s,) signed multipliers y_i * alpha_i
    bias: float
    alpha: np.ndarray         # full multipliers, for diagnostics
    signs: np.ndarray         # full +-1 labels
    violation: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        K = kernel_matrix(self.kind, X, self.support, self.gamma)
        return K @ self.coef + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision(X) > 0).astype(np.int64)


@dataclass(frozen=True)
class SvcOvrCore:
    members: tuple            # one SvcBinaryCore per class

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = np.stack([m.decision(X) for m in self.members], axis=1)
        return np.argmax(scores, axis=1).astype(np.int64)


def _fit_svc_binary(X, pos_mask, spec):
    n = X.shape[0]
    s = np.where(pos_mask, 1.0, -1.0)
    gamma = spec.gamma if spec.gamma is not None else rbf_gamma(X)
    kind = "linear" if spec.algorithm == "svm-linear" else "rbf"
    K = kernel_matrix(kind, X, X, gamma)
    Q = (s[:, None] * s[None, :]) * K
    alpha, bias, it, path, flags, viol = _smo(
        Q, -np.ones(n), s, spec.c, TOL_KKT, PASS_BUDGET * n)
    sv = alpha > 1e-12
    core = SvcBinaryCore(kind=kind, gamma=gamma, support=X[sv],
                         coef=(s * alpha)[sv], bias=bias, alpha=alpha,
                         signs=s, violation=viol)
    return core, it, path, flags


def merge_objective_paths(paths: list[list[float]]) -> list[float]:
    """Sum one-vs-rest member paths at aligned checkpoints (padding each
    with its final value), keeping the total objective non-increasing."""
    width = max(len(p) for p in paths)
    total = np.zeros(width)
    for p in paths:
        total += np.concatenate([p, np.full(width - len(p), p[-1])])
    return [float(v) for v in total]


def fit_svc(X, y, n_classes, spec):
    if n_classes == 2:
        return _fit_svc_binary(X, y == 1, spec)
    members, paths, flags = [], [], []
    total = 0
    for k in range(n_classes):
        core, it, path, fl = _fit_svc_binary(X, y == k, spec)
        members.append(core)
        total += it
        paths.append(path)
        flags.extend(fl)
    return (SvcOvrCore(members=tuple(members)), total,
            merge_objective_paths(paths), sorted(set(flags)))


@dataclass(frozen=True)
class SvrCore:
    kind: str
    gamma: float
    support: np.ndarray
    coef: np.ndarray
    bias: float
    violation: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        K = kernel_matrix(self.kind, X, self.support, self.gamma)
        return K @ self.coef + self.bias


def fit_svr(X, y, spec):
    n = X.shape[0]
    gamma = spec.gamma if spec.gamma is not None else rbf_gamma(X)
    kind = "linear" if spec.algorithm == "svr-linear" else "rbf"
    K = kernel_matrix(kind, X, X, gamma)
    # Doubled formulation: variables [a; a*], labels [+1; -1],
    # linear term [eps - y; eps + y].
    Q = np.empty((2 * n, 2 * n))
    Q[:n, :n] = K
    Q[:n, n:] = -K
    Q[n:, :n] = -K
    Q[n:, n:] = K
    ysign = np.concatenate([np.ones(n), -np.ones(n)])
    qlin = np.concatenate([spec.epsilon - y, spec.epsilon + y])
    alpha, bias, it, path, flags, viol = _smo(
        Q, qlin, ysign, spec.c, TOL_KKT, PASS_BUDGET * 2 * n)
    beta = alpha[:n] - alpha[n:]
    sv = np.abs(beta) > 1e-12
    if not np.any(sv):
        # Degenerate tube covering all targets: predict the bias alone.
        sv = np.zeros(n, dtype=bool)
        sv[0] = True
        beta = np.zeros(n)
    core = SvrCore(kind=kind, gamma=gamma, support=X[sv], coef=beta[sv],
                   bias=bias, violation=viol)
    return core, it, path, flags
