"""Stratified cross-validation and training-time measurements."""
from __future__ import annotations

import csv
import hashlib
import io
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from ..classifier import Hyperparams, predict_many, train
from ..data_io import Dataset, SyntheticSpec, generate
from ..errors import DataError, DomainError
from .kde import KDEClassifier

__all__ = [
    "METHODS",
    "BenchReport",
    "FoldResult",
    "TimingReport",
    "run_bench",
    "run_timing",
    "stratified_folds",
]

METHODS = ("srde", "kde", "knn0")
CSV_COLUMNS = ("method", "fold", "accuracy", "train_ms", "predict_ms")


def stratified_folds(labels, folds: int, seed: int) -> np.ndarray:
    """Fold id for every sample; each class is shuffled and dealt round-robin."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if folds < 2:
        raise DomainError("cross-validation needs at least 2 folds")
    if folds > counts.min():
        raise DomainError(
            f"{folds} folds exceed the smallest class size {int(counts.min())}"
        )
    rng = np.random.default_rng(seed)
    assign = np.empty(labels.shape[0], dtype=int)
    offset = 0
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        assign[idx] = (np.arange(idx.size) + offset) % folds
        offset += idx.size
    return assign


class _SRDE:
    def __init__(self, hp: Hyperparams):
        self.hp = hp

    def fit(self, x, y):
        self.model = train(x, y, self.hp)
        return self

    def predict(self, x):
        return predict_many(self.model, x)


def _make(method: str, hp: Hyperparams, bandwidth):
    if method == "srde":
        return _SRDE(hp)
    if method == "knn0":
        return _SRDE(Hyperparams(hp.k, 0, hp.theta))
    if method == "kde":
        return KDEClassifier(bandwidth)
    raise DomainError(f"unknown method {method!r}; choose from {METHODS}")


@dataclass(frozen=True)
class FoldResult:
    method: str
    fold: int
    accuracy: float
    train_ms: float
    predict_ms: float


@dataclass
class BenchReport:
    rows: list
    folds: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def fold_hash(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.folds, dtype=np.int64).tobytes()).hexdigest()

    @property
    def methods(self) -> list:
        return list(dict.fromkeys(r.method for r in self.rows))

    def mean_accuracy(self, method: str) -> float:
        return float(np.mean([r.accuracy for r in self.rows if r.method == method]))

    def fold_accuracies(self, method: str) -> list:
        return [r.accuracy for r in self.rows if r.method == method]

    def to_csv(self, include_timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            timing = [f"{r.train_ms:.3f}", f"{r.predict_ms:.3f}"] if include_timing else ["", ""]
            w.writerow([r.method, r.fold, repr(r.accuracy)] + timing)
        return buf.getvalue()

    def format_table(self, include_timing: bool = True) -> str:
        cfg = " ".join(f"{k}={v}" for k, v in self.config.items())
        lines = [f"config: {cfg}", f"fold assignment sha256: {self.fold_hash}", ""]
        head = f"{'method':<8}{'mean acc':>10}{'min':>8}{'max':>8}"
        if include_timing:
            head += f"{'train ms':>12}{'predict ms':>12}"
        lines.append(head)
        for m in self.methods:
            acc = self.fold_accuracies(m)
            line = f"{m:<8}{np.mean(acc):>10.4f}{min(acc):>8.4f}{max(acc):>8.4f}"
            if include_timing:
                tr = sum(r.train_ms for r in self.rows if r.method == m)
                pr = sum(r.predict_ms for r in self.rows if r.method == m)
                line += f"{tr:>12.2f}{pr:>12.2f}"
            lines.append(line)
        return "\n".join(lines)


def run_bench(dataset: Dataset, folds: int = 5, methods=METHODS, seed: int = 0,
              hyperparams: Hyperparams | None = None, bandwidth="auto") -> BenchReport:
    """Cross-validate each method on the same stratified folds."""
    if not dataset.labeled:
        raise DataError("benchmarking needs a labeled dataset")
    hp = hyperparams or Hyperparams()
    methods = list(methods)
    for m in methods:
        _make(m, hp, bandwidth)
    assign = stratified_folds(dataset.labels, folds, seed)
    x, y = dataset.points, dataset.labels
    rows = []
    for method in methods:
        for f in range(folds):
            test = assign == f
            clf = _make(method, hp, bandwidth)
            t0 = time.perf_counter()
            clf.fit(x[~test], y[~test])
            t1 = time.perf_counter()
            pred = np.asarray(clf.predict(x[test]))
            t2 = time.perf_counter()
            acc = float(np.mean(pred == y[test]))
            rows.append(FoldResult(method, f, acc, 1e3 * (t1 - t0), 1e3 * (t2 - t1)))
    config = {"k": hp.k, "q": hp.q, "theta": hp.theta, "folds": folds, "seed": seed}
    return BenchReport(rows, assign, config)


@dataclass
class TimingReport:
    sizes: list
    seconds: list
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None

    def format_table(self) -> str:
        lines = [f"{'n':>10}{'train s':>14}"]
        lines += [f"{n:>10}{t:>14.6f}" for n, t in zip(self.sizes, self.seconds)]
        if self.r_squared is not None:
            lines.append(f"linear fit: t = {self.slope:.4e} * n + {self.intercept:.4e}, "
                         f"R^2 = {self.r_squared:.4f}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "train_s"])
        for n, t in zip(self.sizes, self.seconds):
            w.writerow([n, repr(t)])
        return buf.getvalue()


def _linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def run_timing(sizes, m: int = 4, seed: int = 0, repeats: int = 5,
               hyperparams: Hyperparams | None = None) -> TimingReport:
    """Median wall-clock training time on two-class synthetic data of each size."""
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise DomainError("need at least one dataset size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError("dataset sizes must be strictly ascending")
    hp = hyperparams or Hyperparams()
    means = [np.zeros(m), np.full(m, 3.0)]
    seconds = []
    for n in sizes:
        data, _ = generate(SyntheticSpec("gaussian_mixture", m, n, seed, means=means))
        train(data.points, data.labels, hp)  # warm-up
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            train(data.points, data.labels, hp)
            runs.append(time.perf_counter() - t0)
        seconds.append(statistics.median(runs))
    report = TimingReport(sizes, seconds)
    if len(sizes) >= 2:
        report.slope, report.intercept, report.r_squared = _linear_fit(sizes, seconds)
    return report
