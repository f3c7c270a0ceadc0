"""Metrics, cross-validation, seed-averaged benchmarking, and learning curves.

The benchmark protocol: for every (seed, fold, model) triple a fresh model is
built, the fold's training rows are streamed in their original order, and the
final R-squared on the held-out rows is recorded. Aggregates are the mean and
standard deviation over all seed x fold runs. On drift datasets the held-out
rows can be restricted to the post-drift segment (scoring adaptation) or the
pre-drift segment (scoring stability).

Everything is deterministic: per-run RNG seeds are derived from the protocol
seed, the fold index, and the model label, never from global state.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .datagen import Dataset
from .ingestion import fit_standardizer
from .registry import make_regressor


class ZeroVarianceError(ValueError):
    """R-squared is undefined when the true targets are constant."""


class EvalSide(Enum):
    FULL = "full"
    NEW_TREND = "new_trend"
    OLD_TREND = "old_trend"


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot.

    Negative whenever the predictor underperforms the constant mean model.
    """
    y_true = np.atleast_1d(np.asarray(y_true, dtype=float))
    y_pred = np.atleast_1d(np.asarray(y_pred, dtype=float))
    if y_true.shape != y_pred.shape or y_true.size < 2:
        raise ValueError("need two equal-length vectors of at least 2 entries")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError("all true targets are identical")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def kfold_split(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic shuffled k-fold partition of range(n).

    Fold sizes differ by at most one. Both index arrays are sorted
    ascending, so streaming a train split preserves the original row order
    (and with it any drift structure).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"cannot split {n} rows into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    splits = []
    for chunk in np.array_split(perm, k):
        test = np.sort(chunk)
        train = np.sort(np.setdiff1d(perm, chunk, assume_unique=True))
        splits.append((train, test))
    return splits


@dataclass(frozen=True)
class ModelSpec:
    """A registry model name, its hyperparameters, and a report label."""

    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def display(self) -> str:
        return self.label if self.label is not None else self.name


@dataclass(frozen=True)
class Protocol:
    """Benchmark protocol: seeds x folds, evaluation side, preprocessing."""

    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    folds: int = 5
    eval_side: EvalSide = EvalSide.FULL
    standardize: bool = False
    checkpoint_step: int | None = None

    def __post_init__(self):
        if len(self.seeds) < 1:
            raise ValueError("need at least one seed")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.checkpoint_step is not None and self.checkpoint_step < 1:
            raise ValueError("checkpoint_step must be >= 1")


@dataclass(frozen=True)
class RunResult:
    model: str
    seed: int
    fold: int
    r2_final: float
    runtime_ms: float


@dataclass
class EvalRecord:
    """One learning-curve checkpoint."""

    points_seen: int
    r2: float
    mse: float


@dataclass
class BenchmarkReport:
    """All per-run results plus the protocol echo."""

    results: list[RunResult]
    model_order: list[str]

    def rows_for(self, model: str) -> list[RunResult]:
        return [r for r in self.results if r.model == model]

    def summary(self) -> dict[str, tuple[float, float, int]]:
        """Per-model (mean R2, std R2, run count), models in report order."""
        out = {}
        for model in self.model_order:
            scores = np.array([r.r2_final for r in self.rows_for(model)])
            out[model] = (float(scores.mean()), float(scores.std()), scores.size)
        return out

    def to_csv(self) -> str:
        lines = ["model,seed,fold,r2"]
        for r in self.results:
            lines.append(f"{r.model},{r.seed},{r.fold},{float(r.r2_final)!r}")
        return "\n".join(lines) + "\n"

    def timings_csv(self) -> str:
        """Wall-clock per run; split off because timings are not reproducible."""
        lines = ["model,seed,fold,runtime_ms"]
        for r in self.results:
            lines.append(f"{r.model},{r.seed},{r.fold},{float(r.runtime_ms)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "BenchmarkReport":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "model,seed,fold,r2":
            raise ValueError("not a benchmark results file")
        results, order = [], []
        for ln in lines[1:]:
            model, seed, fold, r2 = ln.split(",")
            if model not in order:
                order.append(model)
            results.append(RunResult(model, int(seed), int(fold), float(r2), 0.0))
        return cls(results=results, model_order=order)


def render_table(report: BenchmarkReport) -> str:
    """Human-readable summary; non-positive mean R2 renders as N/A."""
    rows = [("model", "mean r2", "std r2", "runs")]
    for model, (mean, std, n) in report.summary().items():
        shown = "N/A" if mean <= 0.0 else f"{mean:.5f}"
        rows.append((model, shown, f"{std:.5f}", str(n)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    out = []
    for i, row in enumerate(rows):
        out.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
        if i == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def _run_seed(spec: ModelSpec, seed: int, fold: int) -> int:
    """Stable per-run RNG seed: depends on the label, never enumeration order."""
    tag = zlib.crc32(spec.display.encode("utf-8"))
    base = int(spec.params.get("rng_seed", 0))
    ss = np.random.SeedSequence([base, tag, seed, fold])
    return int(ss.generate_state(1)[0])


def _filter_test(test_idx: np.ndarray, dataset: Dataset, side: EvalSide) -> np.ndarray:
    if side is EvalSide.FULL:
        return test_idx
    if not dataset.has_drift:
        raise ValueError(f"eval_side={side.value} requires a drift dataset")
    if side is EvalSide.NEW_TREND:
        return test_idx[test_idx >= dataset.drift_index]
    return test_idx[test_idx < dataset.drift_index]


def run_benchmark(
    model_specs: list[ModelSpec], dataset: Dataset, protocol: Protocol
) -> BenchmarkReport:
    """Stream every model through every (seed, fold) split of the dataset."""
    labels = [s.display for s in model_specs]
    if len(set(labels)) != len(labels):
        raise ValueError("model labels must be unique within one benchmark")
    results = []
    for seed in protocol.seeds:
        for fold, (train_idx, test_idx) in enumerate(
            kfold_split(dataset.n_points, protocol.folds, seed)
        ):
            test_idx = _filter_test(test_idx, dataset, protocol.eval_side)
            X_train, y_train = dataset.X[train_idx], dataset.y[train_idx]
            X_test, y_test = dataset.X[test_idx], dataset.y[test_idx]
            if protocol.standardize:
                scaler = fit_standardizer(X_train)
                X_train = scaler.transform(X_train)
                X_test = scaler.transform(X_test)
            for spec in model_specs:
                model = make_regressor(
                    spec.name, spec.params, run_seed=_run_seed(spec, seed, fold)
                )
                model.init(dataset.n_dims, n_hint=X_train.shape[0])
                t0 = time.perf_counter()
                model.observe_batch(X_train, y_train)
                model.finalize()
                elapsed_ms = (time.perf_counter() - t0) * 1e3
                r2 = r_squared(y_test, model.predict(X_test))
                results.append(RunResult(spec.display, seed, fold, r2, elapsed_ms))
    return BenchmarkReport(results=results, model_order=labels)


def learning_curve(
    spec: ModelSpec,
    X_train,
    y_train,
    X_test,
    y_test,
    checkpoint_step: int,
    run_seed: int = 0,
) -> list[EvalRecord]:
    """R2/MSE on a fixed test set after every ``checkpoint_step`` training rows.

    Checkpoints are probed on a finalized clone, so the streamed model keeps
    its exact mid-stream state; a trailing partial chunk yields one final
    record at the full stream length.
    """
    if checkpoint_step < 1:
        raise ValueError("checkpoint_step must be >= 1")
    X_train = np.atleast_2d(np.asarray(X_train, dtype=float))
    y_train = np.atleast_1d(np.asarray(y_train, dtype=float))
    X_test = np.atleast_2d(np.asarray(X_test, dtype=float))
    y_test = np.atleast_1d(np.asarray(y_test, dtype=float))
    n = X_train.shape[0]
    model = make_regressor(spec.name, spec.params, run_seed=run_seed)
    model.init(X_train.shape[1], n_hint=n)
    records, fed = [], 0
    while fed < n:
        upto = min(fed + checkpoint_step, n)
        model.observe_batch(X_train[fed:upto], y_train[fed:upto])
        fed = upto
        probe = model.clone()
        probe.finalize()
        y_hat = probe.predict(X_test)
        records.append(
            EvalRecord(
                points_seen=fed,
                r2=r_squared(y_test, y_hat),
                mse=float(np.mean((y_test - y_hat) ** 2)),
            )
        )
    return records


def average_curves(curves: list[list[EvalRecord]]) -> list[EvalRecord]:
    """Pointwise mean of several curves, truncated to the shortest one."""
    if not curves:
        raise ValueError("no curves to average")
    length = min(len(c) for c in curves)
    out = []
    for i in range(length):
        pts = {c[i].points_seen for c in curves}
        if len(pts) != 1:
            raise ValueError("curves disagree on checkpoint positions")
        out.append(
            EvalRecord(
                points_seen=pts.pop(),
                r2=float(np.mean([c[i].r2 for c in curves])),
                mse=float(np.mean([c[i].mse for c in curves])),
            )
        )
    return out
