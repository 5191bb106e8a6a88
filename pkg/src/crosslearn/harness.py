"""Benchmark sweeps: similarity grids, deviation-from-oracle summaries,
correlation footers, and zone-validation experiments.

A sweep runs every (grid point, replicate) cell of one synthetic setting:
it generates a coupled target/source pair, computes the oracle score
(closed form where available, Monte Carlo otherwise), every configured
estimate, and the comparison metrics, then averages across replicates.
Replicate seeds are shared across grid points so columns are paired in
the replicate dimension. Reports serialize to CSV (data rows plus
correlation and deviation footers) and to JSON with full provenance;
reruns of the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .data import Dataset
from .errors import CrossLearnError, NumericError, ValidationError
from .metrics import kl_gaussian, otdd_gaussian, w2_gaussian
from .models import ModelSpec, default_models, fit
from .oracles import oracle_score
from .score import DEFAULT_FOLDS, DEFAULT_LAMBDA, evaluate_panel
from .synth import SETTINGS, sample_dataset, similarity_grid, spec_pair
from .transfer import METHODS, run_method
from .zones import EstimatorConfig, Zone, baseline_error, classify, thresholds

_SCHEME_COLUMNS = ("unweighted-avg", "weighted-avg", "ensemble")
_METRIC_COLUMNS = ("kl", "w2", "otdd")

# Seed stream tags local to the harness.
(_PARAMS, _TDATA, _SDATA, _PANEL, _ORACLE, _BASE, _SPLIT, _METHOD,
 _TEST) = range(100, 109)


def diff_metric(estimates: np.ndarray, oracles: np.ndarray) -> float:
    """Mean absolute deviation between an estimate column and the oracle."""
    a = np.asarray(estimates, dtype=np.float64)
    b = np.asarray(oracles, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValidationError("need two equal-length vectors")
    return float(np.mean(np.abs(a - b)))


def _ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson_spearman(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Absolute linear and rank correlations; zero-variance input gives
    (0, 0) by convention."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValidationError("need two equal-length vectors of size >= 2")

    def abs_corr(a, b):
        sa, sb = a.std(), b.std()
        if sa == 0.0 or sb == 0.0:
            return 0.0
        return float(abs(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb)))

    return abs_corr(x, y), abs_corr(_ranks(x), _ranks(y))


@dataclass(frozen=True)
class SweepConfig:
    setting: str
    grid: tuple[float, ...] = ()
    replicates: int = 50
    n: int = 200
    p: int = 10
    folds_k: int = DEFAULT_FOLDS
    lam: float = DEFAULT_LAMBDA
    mc_samples: int = 200_000
    models: tuple[ModelSpec, ...] = ()
    metrics: tuple[str, ...] = _METRIC_COLUMNS
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValidationError(f"unknown setting {self.setting!r}")
        if self.replicates < 1:
            raise ValidationError("need at least one replicate")
        grid = self.grid or tuple(float(v) for v in similarity_grid(self.setting))
        if not grid or list(grid) != sorted(grid):
            raise ValidationError("grid must be non-empty and sorted")
        object.__setattr__(self, "grid", tuple(float(v) for v in grid))
        task = spec_pair(self.setting, grid[0], 0, self.p)[0].task
        models = self.models or tuple(default_models(task))
        object.__setattr__(self, "models", tuple(models))
        metrics = tuple(m for m in self.metrics
                        if m != "otdd" or task.is_classification)
        unknown = set(metrics) - set(_METRIC_COLUMNS)
        if unknown:
            raise ValidationError(f"unknown metrics: {sorted(unknown)}")
        object.__setattr__(self, "metrics", metrics)


@dataclass(frozen=True)
class SweepReport:
    setting: str
    grid: tuple[float, ...]
    columns: tuple[str, ...]
    means: dict
    diff: dict
    pearson_abs: dict
    spearman_abs: dict
    replicates: int
    n: int
    base_seed: int
    failures: dict

    def estimator_columns(self) -> tuple[str, ...]:
        skip = {"oracle", *_METRIC_COLUMNS}
        return tuple(c for c in self.columns if c not in skip)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["similarity"] + list(self.columns))
        for i, g in enumerate(self.grid):
            writer.writerow([repr(g)] + [repr(self.means[c][i]) for c in self.columns])
        writer.writerow(["pearson_abs"] + [repr(self.pearson_abs[c]) for c in self.columns])
        writer.writerow(["spearman_abs"] + [repr(self.spearman_abs[c]) for c in self.columns])
        writer.writerow(["diff"] + [repr(self.diff[c]) if c in self.diff else ""
                                    for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "setting": self.setting, "grid": list(self.grid),
            "replicates": self.replicates, "n": self.n,
            "base_seed": self.base_seed,
            "columns": list(self.columns),
            "means": {c: list(v) for c, v in self.means.items()},
            "diff": self.diff, "pearson_abs": self.pearson_abs,
            "spearman_abs": self.spearman_abs,
            "failures": {repr(k): v for k, v in self.failures.items()},
        }, indent=2, sort_keys=True)


def _sweep_cell(args: tuple):
    (setting, sim, gi, rep, n, p, folds_k, lam, mc_samples,
     model_dicts, metrics, base_seed) = args
    try:
        t_spec, s_spec = spec_pair(setting, sim, rng.derive(base_seed, _PARAMS, rep), p)
        target = sample_dataset(t_spec, n, rng.derive(base_seed, _TDATA, rep))
        source = sample_dataset(s_spec, n, rng.derive(base_seed, _SDATA, rep))
        models = [ModelSpec.from_dict(d) for d in model_dicts]
        panel = evaluate_panel(models, target, source, folds_k, lam,
                               seed=rng.derive(base_seed, _PANEL, rep))
        oracle = oracle_score(t_spec, s_spec, mc_samples,
                              seed=rng.derive(base_seed, _ORACLE, rep))
        row = {"oracle": oracle.score}
        for name, est in panel.per_model:
            row[name] = est.score
        row["unweighted-avg"] = panel.unweighted.score
        row["weighted-avg"] = panel.weighted.score
        row["ensemble"] = panel.ensemble.score
        for met in metrics:
            if met == "kl":
                row["kl"] = kl_gaussian(target, source)
            elif met == "w2":
                row["w2"] = w2_gaussian(target, source)
            else:
                row["otdd"] = otdd_gaussian(target, source)
        return gi, rep, row, None
    except CrossLearnError as exc:
        return gi, rep, None, f"{type(exc).__name__}: {exc}"


def _warm_kernels():
    """Compile the numba kernels once before any worker forks."""
    g = np.random.default_rng(0)
    X = g.normal(size=(24, 3))
    y = (X[:, 0] > 0).astype(np.int64)
    from .data import Dataset, TaskKind
    d = Dataset(X, y, TaskKind.binary())
    fit(ModelSpec("svm-rbf", max_iter=5), d)
    fit(ModelSpec("gbt", rounds=2), d)
    r = Dataset(X, X[:, 0], TaskKind.regression())
    fit(ModelSpec("svr-linear"), r)


def _run_cells(tasks: list[tuple], workers: int):
    if workers <= 1:
        return [_sweep_cell(t) for t in tasks]
    _warm_kernels()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_cell, tasks, chunksize=4))


def run_sweep(config: SweepConfig) -> SweepReport:
    """Run one setting's full similarity sweep and aggregate the report."""
    model_dicts = [m.to_dict() for m in config.models]
    names = []
    seen: dict[str, int] = {}
    for m in config.models:
        k = seen.get(m.algorithm, 0)
        seen[m.algorithm] = k + 1
        names.append(m.algorithm if k == 0 else f"{m.algorithm}.{k + 1}")
    columns = tuple(["oracle"] + names + list(_SCHEME_COLUMNS) + list(config.metrics))
    tasks = [(config.setting, sim, gi, rep, config.n, config.p, config.folds_k,
              config.lam, config.mc_samples, model_dicts, config.metrics,
              config.base_seed)
             for gi, sim in enumerate(config.grid)
             for rep in range(config.replicates)]
    results = _run_cells(tasks, config.workers)
    cells: dict[int, dict[str, list[float]]] = {
        gi: {c: [] for c in columns} for gi in range(len(config.grid))}
    failures: dict[float, int] = {g: 0 for g in config.grid}
    for gi, rep, row, err in results:
        if err is not None:
            failures[config.grid[gi]] += 1
            continue
        for c in columns:
            if c in row:
                cells[gi][c].append(row[c])
    for g, bad in failures.items():
        if bad > 0.2 * config.replicates:
            raise NumericError(
                f"{bad}/{config.replicates} replicates failed at {g}")
    means = {c: tuple(float(np.mean(cells[gi][c])) if cells[gi][c] else np.nan
                      for gi in range(len(config.grid)))
             for c in columns}
    grid_arr = np.asarray(config.grid)
    pearson, spearman, diff = {}, {}, {}
    for c in columns:
        col = np.asarray(means[c])
        if len(grid_arr) < 2:
            pearson[c], spearman[c] = 0.0, 0.0
        else:
            pearson[c], spearman[c] = pearson_spearman(grid_arr, col)
        if c != "oracle" and c not in _METRIC_COLUMNS:
            diff[c] = diff_metric(col, np.asarray(means["oracle"]))
    return SweepReport(setting=config.setting, grid=config.grid,
                       columns=columns, means=means, diff=diff,
                       pearson_abs=pearson, spearman_abs=spearman,
                       replicates=config.replicates, n=config.n,
                       base_seed=config.base_seed,
                       failures={g: v for g, v in failures.items() if v})


# ---------------------------------------------------------------------------
# Zone-validation experiments


@dataclass(frozen=True)
class ZoneSweepConfig:
    setting: str
    grid: tuple[float, ...] = ()
    replicates: int = 20
    n: int = 200
    p: int = 10
    folds_k: int = DEFAULT_FOLDS
    lam: float = DEFAULT_LAMBDA
    methods: tuple[str, ...] = ("naive",)
    transfer_model: ModelSpec = field(default_factory=lambda: ModelSpec("logreg"))
    rounds: int = 20
    train_per_class: int = 30
    test_n: int = 2000      # fresh target draw for evaluating transfer
    gamma1: float = 1.0
    gamma2: float = 5.0
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.methods:
            raise ValidationError("need at least one registered transfer method")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValidationError(f"unknown transfer methods: {sorted(unknown)}")
        grid = self.grid or tuple(float(v) for v in similarity_grid(self.setting))
        object.__setattr__(self, "grid", tuple(float(v) for v in grid))


@dataclass(frozen=True)
class ZoneSweepReport:
    setting: str
    grid: tuple[float, ...]
    methods: tuple[str, ...]
    zone: tuple[str, ...]                  # majority verdict per grid point
    zone_fractions: dict                   # "PT"/"AZ"/"NT" -> tuple per grid point
    mean_cls: tuple[float, ...]
    mean_e0: float
    mean_tau1: float
    mean_tau2: float
    mean_beat_count: tuple[float, ...]
    beat_fraction: dict                    # method -> tuple per grid point
    mean_baseline_minus_naive: tuple[float, ...] | None
    replicates: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = (["similarity", "zone", "frac_pt", "frac_az", "frac_nt",
                   "mean_cls", "mean_beat_count"]
                  + [f"beat_frac_{m}" for m in self.methods])
        if self.mean_baseline_minus_naive is not None:
            header.append("baseline_minus_naive")
        writer.writerow(header)
        for i, g in enumerate(self.grid):
            row = [repr(g), self.zone[i],
                   repr(self.zone_fractions["PT"][i]),
                   repr(self.zone_fractions["AZ"][i]),
                   repr(self.zone_fractions["NT"][i]),
                   repr(self.mean_cls[i]), repr(self.mean_beat_count[i])]
            row += [repr(self.beat_fraction[m][i]) for m in self.methods]
            if self.mean_baseline_minus_naive is not None:
                row.append(repr(self.mean_baseline_minus_naive[i]))
            writer.writerow(row)
        writer.writerow(["mean_e0", repr(self.mean_e0)])
        writer.writerow(["mean_tau1", repr(self.mean_tau1)])
        writer.writerow(["mean_tau2", repr(self.mean_tau2)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "setting": self.setting, "grid": list(self.grid),
            "methods": list(self.methods), "zone": list(self.zone),
            "zone_fractions": {k: list(v) for k, v in self.zone_fractions.items()},
            "mean_cls": list(self.mean_cls), "mean_e0": self.mean_e0,
            "mean_tau1": self.mean_tau1, "mean_tau2": self.mean_tau2,
            "mean_beat_count": list(self.mean_beat_count),
            "beat_fraction": {k: list(v) for k, v in self.beat_fraction.items()},
            "baseline_minus_naive":
                None if self.mean_baseline_minus_naive is None
                else list(self.mean_baseline_minus_naive),
            "replicates": self.replicates,
        }, indent=2, sort_keys=True)


def _split_for_transfer(target: Dataset, per_class: int, seed: int):
    g = rng.stream(seed, rng.SPLIT)
    if target.task.is_classification:
        train_idx = []
        for cls in range(target.task.n_classes):
            idx = np.flatnonzero(target.labels == cls)
            g.shuffle(idx)
            if len(idx) <= per_class:
                raise ValidationError("not enough rows per class for the split")
            train_idx.append(idx[:per_class])
        train_mask = np.zeros(target.n, dtype=bool)
        train_mask[np.concatenate(train_idx)] = True
    else:
        idx = g.permutation(target.n)
        count = min(2 * per_class, target.n - 1)
        train_mask = np.zeros(target.n, dtype=bool)
        train_mask[idx[:count]] = True
    return target.subset(train_mask), target.subset(~train_mask)


def _zone_replicate(args: tuple):
    (setting, grid, rep, n, p, folds_k, lam, methods, model_dict, rounds,
     per_class, test_n, gamma1, gamma2, base_seed) = args
    model = ModelSpec.from_dict(model_dict)
    t_spec, _ = spec_pair(setting, grid[0], rng.derive(base_seed, _PARAMS, rep), p)
    target = sample_dataset(t_spec, n, rng.derive(base_seed, _TDATA, rep))
    panel_models = default_models(target.task)
    cfg = EstimatorConfig(models=tuple(panel_models), scheme="ensemble",
                          lam=lam, folds_k=folds_k)
    e0, se = baseline_error(cfg, target, seed=rng.derive(base_seed, _BASE, rep))
    th = thresholds(e0, se, gamma1, gamma2)
    train, _ = _split_for_transfer(target, per_class,
                                   rng.derive(base_seed, _SPLIT, rep))
    test = sample_dataset(t_spec, test_n, rng.derive(base_seed, _TEST, rep))
    out = {"e0": e0, "tau1": th.tau1, "tau2": th.tau2, "cells": []}
    for gi, sim in enumerate(grid):
        _, s_spec = spec_pair(setting, sim, rng.derive(base_seed, _PARAMS, rep), p)
        source = sample_dataset(s_spec, n, rng.derive(base_seed, _SDATA, rep))
        panel = evaluate_panel(panel_models, target, source, folds_k, lam,
                               seed=rng.derive(base_seed, _PANEL, rep))
        zone = classify(panel.ensemble.score, th)
        cell = {"cls": panel.ensemble.score, "zone": zone.value}
        for m in methods:
            res = run_method(m, model, train, source, test, rounds=rounds,
                             seed=rng.derive(base_seed, _METHOD, rep, gi))
            cell[f"beat:{m}"] = bool(res.beat_baseline)
            if m == "naive":
                cell["baseline_minus_naive"] = res.baseline_error - res.test_error
        out["cells"].append(cell)
    return out


def run_zone_experiment(config: ZoneSweepConfig) -> ZoneSweepReport:
    """Zone predictions against actual transfer outcomes across a grid."""
    tasks = [(config.setting, config.grid, rep, config.n, config.p,
              config.folds_k, config.lam, config.methods,
              config.transfer_model.to_dict(), config.rounds,
              config.train_per_class, config.test_n, config.gamma1,
              config.gamma2, config.base_seed)
             for rep in range(config.replicates)]
    if config.workers <= 1:
        rows = [_zone_replicate(t) for t in tasks]
    else:
        _warm_kernels()
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_zone_replicate, tasks))
    n_grid = len(config.grid)
    zone_counts = {z: np.zeros(n_grid) for z in ("PT", "AZ", "NT")}
    cls_sum = np.zeros(n_grid)
    beat_counts = {m: np.zeros(n_grid) for m in config.methods}
    beat_total = np.zeros(n_grid)
    bmn_sum = np.zeros(n_grid)
    for row in rows:
        for gi, cell in enumerate(row["cells"]):
            zone_counts[cell["zone"]][gi] += 1
            cls_sum[gi] += cell["cls"]
            total = 0
            for m in config.methods:
                beat = cell[f"beat:{m}"]
                beat_counts[m][gi] += beat
                total += beat
            beat_total[gi] += total
            if "baseline_minus_naive" in cell:
                bmn_sum[gi] += cell["baseline_minus_naive"]
    reps = config.replicates
    majority = []
    for gi in range(n_grid):
        counts = [(zone_counts[z][gi], z) for z in ("PT", "AZ", "NT")]
        top = max(c for c, _ in counts)
        winners = [z for c, z in counts if c == top]
        majority.append(winners[0] if len(winners) == 1 else "AZ")
    has_naive = "naive" in config.methods

    def floats(arr):
        return tuple(float(v) for v in arr)

    return ZoneSweepReport(
        setting=config.setting, grid=config.grid, methods=config.methods,
        zone=tuple(majority),
        zone_fractions={z: floats(zone_counts[z] / reps) for z in ("PT", "AZ", "NT")},
        mean_cls=floats(cls_sum / reps),
        mean_e0=float(np.mean([r["e0"] for r in rows])),
        mean_tau1=float(np.mean([r["tau1"] for r in rows])),
        mean_tau2=float(np.mean([r["tau2"] for r in rows])),
        mean_beat_count=floats(beat_total / reps),
        beat_fraction={m: floats(beat_counts[m] / reps) for m in config.methods},
        mean_baseline_minus_naive=floats(bmn_sum / reps) if has_naive else None,
        replicates=reps)


def render_table(csv_text: str, decimals: int = 4) -> str:
    """Align a report CSV as a fixed-width text table."""
    rows = [r for r in csv.reader(io.StringIO(csv_text)) if r]
    if not rows:
        return ""
    formatted = []
    for r in rows:
        out = []
        for cell in r:
            try:
                out.append(f"{float(cell):.{decimals}f}")
            except ValueError:
                out.append(cell)
        formatted.append(out)
    ncols = max(len(r) for r in formatted)
    widths = [max(len(r[i]) if i < len(r) else 0 for r in formatted)
              for i in range(ncols)]
    lines = ["  ".join((r[i] if i < len(r) else "").rjust(widths[i])
                       for i in range(ncols)).rstrip()
             for r in formatted]
    return "\n".join(lines) + "\n"
