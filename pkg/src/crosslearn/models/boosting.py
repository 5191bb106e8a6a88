"""Gradient-boosted trees with second-order (Newton) leaf weights.

Squared loss for regression, logistic loss for binary labels, one-vs-rest
for more classes. Split search uses per-feature quantile histograms
(at most 32 bins), grown level-wise; leaf weights are -sum(g)/sum(h)
scaled by the learning rate, with no further regularization beyond the
depth limit. The tree grower and forest traversal are compiled with
numba; the greedy algorithm itself is spelled out below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_BINS = 32          # bin slots per feature; at most 31 thresholds
_EPS_H = 1e-6
_MAX_LEAF = 1e3
_MIN_GAIN = 1e-12


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bin_features(X: np.ndarray):
    n, p = X.shape
    bins = np.empty((n, p), dtype=np.int64)
    thresholds: list[np.ndarray] = []
    for j in range(p):
        col = X[:, j]
        uniq = np.unique(col)
        if len(uniq) <= MAX_BINS:
            thr = (uniq[1:] + uniq[:-1]) / 2.0
        else:
            thr = np.unique(np.quantile(col, np.arange(1, MAX_BINS) / MAX_BINS))
        thresholds.append(thr)
        # bin(x) counts thresholds <= x, so "bin <= b" matches "x < thr[b]".
        bins[:, j] = np.searchsorted(thr, col, side="right")
    return bins, thresholds


@njit(cache=True)
def _grow_kernel(bins, nthr, g, h, depth):
    """Greedy level-wise growth; returns node arrays plus leaf statistics."""
    n, p = bins.shape
    maxn = 2 ** (depth + 1) - 1
    feature = np.full(maxn, -1, np.int64)
    split_bin = np.full(maxn, -1, np.int64)
    left = np.full(maxn, -1, np.int64)
    right = np.full(maxn, -1, np.int64)
    node_of = np.zeros(n, np.int64)
    n_nodes = 1
    frontier = np.empty(maxn, np.int64)
    frontier[0] = 0
    fcount = 1
    for level in range(depth):
        if fcount == 0:
            break
        local = np.full(n_nodes, -1, np.int64)
        for k in range(fcount):
            local[frontier[k]] = k
        L = fcount
        hist_g = np.zeros((L, p, MAX_BINS))
        hist_h = np.zeros((L, p, MAX_BINS))
        hist_c = np.zeros((L, p, MAX_BINS), np.int64)
        tot_g = np.zeros(L)
        tot_h = np.zeros(L)
        tot_c = np.zeros(L, np.int64)
        for s in range(n):
            lid = local[node_of[s]]
            if lid < 0:
                continue
            gs = g[s]
            hs = h[s]
            tot_g[lid] += gs
            tot_h[lid] += hs
            tot_c[lid] += 1
            for j in range(p):
                b = bins[s, j]
                hist_g[lid, j, b] += gs
                hist_h[lid, j, b] += hs
                hist_c[lid, j, b] += 1
        new_count = 0
        new_frontier = np.empty(2 * L, np.int64)
        for k in range(L):
            node_id = frontier[k]
            g_tot = tot_g[k]
            h_tot = tot_h[k]
            c_tot = tot_c[k]
            denom = h_tot if h_tot > _EPS_H else _EPS_H
            base = g_tot * g_tot / denom
            best_gain = _MIN_GAIN
            best_j = -1
            best_b = -1
            for j in range(p):
                gl = 0.0
                hl = 0.0
                cl = 0
                for b in range(nthr[j]):
                    gl += hist_g[k, j, b]
                    hl += hist_h[k, j, b]
                    cl += hist_c[k, j, b]
                    if cl < 1 or c_tot - cl < 1:
                        continue
                    gr = g_tot - gl
                    hr = h_tot - hl
                    dl = hl if hl > _EPS_H else _EPS_H
                    dr = hr if hr > _EPS_H else _EPS_H
                    gain = 0.5 * (gl * gl / dl + gr * gr / dr - base)
                    if gain > best_gain:
                        best_gain = gain
                        best_j = j
                        best_b = b
            if best_j >= 0:
                li = n_nodes
                n_nodes += 2
                feature[node_id] = best_j
                split_bin[node_id] = best_b
                left[node_id] = li
                right[node_id] = li + 1
                if level + 1 < depth:
                    new_frontier[new_count] = li
                    new_frontier[new_count + 1] = li + 1
                    new_count += 2
        for s in range(n):
            nid = node_of[s]
            if feature[nid] >= 0:
                node_of[s] = left[nid] if bins[s, feature[nid]] <= split_bin[nid] \
                    else right[nid]
        for k in range(new_count):
            frontier[k] = new_frontier[k]
        fcount = new_count
    leaf_g = np.zeros(n_nodes)
    leaf_h = np.zeros(n_nodes)
    for s in range(n):
        leaf_g[node_of[s]] += g[s]
        leaf_h[node_of[s]] += h[s]
    return (feature[:n_nodes], split_bin[:n_nodes], left[:n_nodes],
            right[:n_nodes], leaf_g, leaf_h, node_of)


@njit(cache=True)
def _forest_raw(X, feature, threshold, left, right, value, roots, base):
    m = X.shape[0]
    out = np.full(m, base)
    for s in range(m):
        acc = 0.0
        for t in range(roots.shape[0]):
            node = roots[t]
            while feature[node] >= 0:
                if X[s, feature[node]] < threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += value[node]
        out[s] += acc
    return out


@dataclass(frozen=True)
class GbtCore:
    """One boosted forest, stored as flat node arrays with global indices."""

    objective: str            # "squared" or "logistic"
    base_score: float
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    roots: np.ndarray

    def raw(self, X: np.ndarray) -> np.ndarray:
        return _forest_raw(np.ascontiguousarray(X), self.feature, self.threshold,
                           self.left, self.right, self.value, self.roots,
                           self.base_score)

    def predict(self, X: np.ndarray) -> np.ndarray:
        raw = self.raw(X)
        if self.objective == "squared":
            return raw
        return (raw > 0).astype(np.int64)


@dataclass(frozen=True)
class GbtOvrCore:
    members: tuple

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = np.stack([m.raw(X) for m in self.members], axis=1)
        return np.argmax(scores, axis=1).astype(np.int64)


def _logloss(scores, y):
    return float(np.mean(np.log1p(np.exp(-np.abs(scores)))
                         + np.maximum(scores, 0.0) - y * scores))


def _boost(X, y, objective, spec):
    n = len(y)
    bins, thresholds = _bin_features(X)
    nthr = np.asarray([len(t) for t in thresholds], dtype=np.int64)
    if objective == "squared":
        base = float(np.mean(y))
    else:
        pbar = min(max(float(np.mean(y)), 1e-6), 1.0 - 1e-6)
        base = float(np.log(pbar / (1.0 - pbar)))
    scores = np.full(n, base)
    path = []
    h_ones = np.ones(n)
    feats, thrs, lefts, rights, values, roots = [], [], [], [], [], []
    offset = 0
    for _ in range(spec.rounds):
        if objective == "squared":
            g = scores - y
            h = h_ones
            path.append(0.5 * float(np.mean(g ** 2)))
        else:
            prob = _sigmoid(scores)
            g = prob - y
            h = prob * (1.0 - prob)
            path.append(_logloss(scores, y))
        feat, sbin, left, right, leaf_g, leaf_h, node_of = _grow_kernel(
            bins, nthr, g, h, spec.depth)
        raw = -leaf_g / np.maximum(leaf_h, _EPS_H)
        value = np.where(feat < 0,
                         spec.learning_rate * np.clip(raw, -_MAX_LEAF, _MAX_LEAF),
                         0.0)
        thr = np.zeros(len(feat))
        for node in np.flatnonzero(feat >= 0):
            thr[node] = thresholds[feat[node]][sbin[node]]
        feats.append(feat)
        thrs.append(thr)
        lefts.append(np.where(left >= 0, left + offset, -1))
        rights.append(np.where(right >= 0, right + offset, -1))
        values.append(value)
        roots.append(offset)
        scores = scores + value[node_of]
        offset += len(feat)
    if objective == "squared":
        path.append(0.5 * float(np.mean((scores - y) ** 2)))
    else:
        path.append(_logloss(scores, y))
    core = GbtCore(objective=objective, base_score=base,
                   feature=np.concatenate(feats),
                   threshold=np.concatenate(thrs),
                   left=np.concatenate(lefts),
                   right=np.concatenate(rights),
                   value=np.concatenate(values),
                   roots=np.asarray(roots, dtype=np.int64))
    return core, path


def fit_gbt(X, y, task, spec):
    if task.kind == "regression":
        core, path = _boost(X, y.astype(np.float64), "squared", spec)
        return core, spec.rounds, path, []
    if task.n_classes == 2:
        core, path = _boost(X, (y == 1).astype(np.float64), "logistic", spec)
        return core, spec.rounds, path, []
    from .svm import merge_objective_paths

    members, paths = [], []
    for k in range(task.n_classes):
        core, path = _boost(X, (y == k).astype(np.float64), "logistic", spec)
        members.append(core)
        paths.append(path)
    return (GbtOvrCore(members=tuple(members)),
            spec.rounds * task.n_classes, merge_objective_paths(paths), [])
