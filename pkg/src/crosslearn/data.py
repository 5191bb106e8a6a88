"""Datasets, task/loss kinds, fold plans and CSV persistence.

Conventions: features are an (n, p) float matrix; the label column is the
last column of any CSV file; classification labels are dense integers
starting at 0. All containers are frozen and their arrays marked
read-only, so they can be shared freely between concurrent workers.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from . import rng


class LossKind(enum.Enum):
    ZERO_ONE = "zero-one"
    SQUARED = "squared"


@dataclass(frozen=True)
class TaskKind:
    """Binary / multiclass / regression task descriptor.

    `n_classes` is 2 for binary, K >= 3 for multiclass and None for
    regression.
    """

    kind: str
    n_classes: int | None = None

    def __post_init__(self):
        if self.kind not in ("binary", "multiclass", "regression"):
            raise ValidationError(f"unknown task kind: {self.kind!r}")
        if self.kind == "binary" and self.n_classes != 2:
            raise ValidationError("binary task must have exactly 2 classes")
        if self.kind == "multiclass" and (self.n_classes is None or self.n_classes < 3):
            raise ValidationError("multiclass task needs n_classes >= 3")
        if self.kind == "regression" and self.n_classes is not None:
            raise ValidationError("regression task has no classes")

    @property
    def is_classification(self) -> bool:
        return self.kind != "regression"

    def default_loss(self) -> LossKind:
        return LossKind.ZERO_ONE if self.is_classification else LossKind.SQUARED

    @staticmethod
    def binary() -> "TaskKind":
        return TaskKind("binary", 2)

    @staticmethod
    def multiclass(k: int) -> "TaskKind":
        return TaskKind("multiclass", k)

    @staticmethod
    def regression() -> "TaskKind":
        return TaskKind("regression")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """A labeled feature matrix together with its task kind."""

    features: np.ndarray                  # (n, p) float64
    labels: np.ndarray                    # (n,) int64 for classification, float64 otherwise
    task: TaskKind
    column_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValidationError("features must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(X)):
            raise ValidationError("features contain non-finite values")
        y = np.asarray(self.labels)
        if y.shape != (X.shape[0],):
            raise ValidationError("labels must be a vector of length n")
        if self.task.is_classification:
            yi = y.astype(np.int64)
            if not np.array_equal(yi, y):
                raise ValidationError("classification labels must be integers")
            k = self.task.n_classes
            if yi.min() < 0 or yi.max() >= k:
                raise ValidationError(
                    f"classification labels must lie in 0..{k - 1}, "
                    f"got range [{yi.min()}, {yi.max()}]"
                )
            y = yi
        else:
            y = y.astype(np.float64)
            if not np.all(np.isfinite(y)):
                raise ValidationError("regression labels contain non-finite values")
        if self.column_names is not None and len(self.column_names) != X.shape[1]:
            raise ValidationError("column_names length must equal p")
        object.__setattr__(self, "features", _freeze(X))
        object.__setattr__(self, "labels", _freeze(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.task, self.column_names)


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every sample to one of k cross-validation folds."""

    k: int
    assignments: np.ndarray   # (n,) fold index in 0..k-1
    seed: int
    stratified: bool = True   # False when stratification was requested but impossible

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1:
            raise ValidationError("assignments must be a vector")
        counts = np.bincount(a, minlength=self.k)
        if len(counts) != self.k or counts.min() == 0:
            raise ValidationError("every fold index in 0..k-1 must appear")
        if counts.max() - counts.min() > 1:
            raise ValidationError("fold sizes may differ by at most 1")
        object.__setattr__(self, "assignments", _freeze(a))

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (train_idx, test_idx) for one fold."""
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Build a deterministic k-fold plan, stratified per class where possible.

    Falls back to an unstratified plan (flagged on the result) when some
    class has fewer members than folds.
    """
    n = dataset.n
    if not 2 <= k <= n:
        raise ValidationError(f"need 2 <= k <= n, got k={k}, n={n}")
    g = rng.stream(seed, rng.FOLDS)
    assign = np.empty(n, dtype=np.int64)
    stratified = False
    if dataset.task.is_classification:
        counts = np.bincount(dataset.labels, minlength=dataset.task.n_classes)
        stratified = all(c == 0 or c >= k for c in counts)
    if stratified:
        # Deal shuffled class members round-robin, continuing the deal
        # across classes so overall fold sizes stay within one.
        pos = 0
        for cls in range(dataset.task.n_classes):
            idx = np.flatnonzero(dataset.labels == cls)
            g.shuffle(idx)
            assign[idx] = (pos + np.arange(len(idx))) % k
            pos += len(idx)
    else:
        idx = g.permutation(n)
        assign[idx] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assign, seed=seed, stratified=stratified)


def mean_loss(predictions: np.ndarray, truth: np.ndarray, loss: LossKind) -> float:
    """Average 0-1 or squared-error loss of predictions against truth."""
    pred = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(truth, dtype=np.float64)
    if pred.shape != y.shape or pred.ndim != 1 or pred.size < 1:
        raise ValidationError("predictions and truth must be equal-length vectors")
    if not np.all(np.isfinite(pred)):
        raise ValidationError("predictions contain non-finite values")
    if loss is LossKind.ZERO_ONE:
        return float(np.mean(pred != y))
    return float(np.mean((pred - y) ** 2))


# ---------------------------------------------------------------------------
# CSV persistence: UTF-8, comma separated, header row, label column last.

def load_csv(path: str, task: TaskKind) -> Dataset:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            if len(header) < 2:
                raise ParseError(f"{path}: need at least one feature column and a label column")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                    )
                try:
                    rows.append([float(c) for c in row])
                except ValueError as exc:
                    raise ParseError(f"{path}: row {lineno}: {exc}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    mat = np.asarray(rows, dtype=np.float64)
    X, y = mat[:, :-1], mat[:, -1]
    if task.kind == "multiclass" and task.n_classes is None:
        raise ValidationError("multiclass task must carry n_classes")
    if task.is_classification:
        yi = y.astype(np.int64)
        if not np.array_equal(yi, y):
            raise ParseError(f"{path}: classification labels must be integers")
        y = yi
    try:
        return Dataset(X, y, task, column_names=tuple(header[:-1]))
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}") from None


def infer_multiclass(path: str) -> TaskKind:
    """Peek at a CSV's label column and build a MultiClass task kind."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        labels = {row[-1] for row in reader if row}
    try:
        k = int(max(float(v) for v in labels)) + 1
    except ValueError:
        raise ParseError(f"{path}: non-numeric label column") from None
    return TaskKind.multiclass(k)


def save_csv(dataset: Dataset, path: str) -> None:
    names = dataset.column_names or tuple(f"x{i + 1}" for i in range(dataset.p))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(names) + ["y"])
            classification = dataset.task.is_classification
            for i in range(dataset.n):
                row = [repr(float(v)) for v in dataset.features[i]]
                row.append(str(int(dataset.labels[i])) if classification
                           else repr(float(dataset.labels[i])))
                writer.writerow(row)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None


def split_rows(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffle and split into (train, test); stratified for classification."""
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must lie in (0, 1)")
    g = rng.stream(seed, rng.SPLIT)
    n = dataset.n
    if dataset.task.is_classification:
        test_idx = []
        for cls in range(dataset.task.n_classes):
            idx = np.flatnonzero(dataset.labels == cls)
            g.shuffle(idx)
            n_test = int(round(len(idx) * test_fraction))
            test_idx.append(idx[:n_test])
        test_mask = np.zeros(n, dtype=bool)
        test_mask[np.concatenate(test_idx)] = True
    else:
        idx = g.permutation(n)
        test_mask = np.zeros(n, dtype=bool)
        test_mask[idx[: int(round(n * test_fraction))]] = True
    if test_mask.all() or not test_mask.any():
        raise ValidationError("split produced an empty side")
    return dataset.subset(~test_mask), dataset.subset(test_mask)
