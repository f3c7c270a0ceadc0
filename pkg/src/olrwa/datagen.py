"""Deterministic synthetic regression streams, with and without concept drift.

Every dataset is a pure function of its spec: the seed drives the true model
draw, the feature matrix, and the additive Gaussian target noise, in that
order. Drift streams follow one linear model up to the drift index and the
exactly negated model (weights and intercept) from there on; row order is the
stream order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np


class Scenario(Enum):
    NORMAL = "normal"
    TIME_DRIFT = "time_drift"
    CONFIDENCE_DRIFT = "confidence_drift"
    CONVERGENCE = "convergence"


DRIFT_SCENARIOS = (Scenario.TIME_DRIFT, Scenario.CONFIDENCE_DRIFT)


@dataclass(frozen=True)
class DatasetSpec:
    """Shape and randomness of one synthetic dataset."""

    n_points: int
    n_dims: int
    noise_std: float = 0.0
    scenario: Scenario = Scenario.NORMAL
    drift_fraction: float = 0.5
    seed: int = 0
    feature_range: tuple[float, float] = (-10.0, 10.0)
    weight_range: tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self):
        if self.n_points < 1 or self.n_dims < 1:
            raise ValueError("n_points and n_dims must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.scenario in DRIFT_SCENARIOS and not (0.0 < self.drift_fraction < 1.0):
            raise ValueError("drift_fraction must lie strictly inside (0, 1)")
        for name, rng in (("feature_range", self.feature_range),
                          ("weight_range", self.weight_range)):
            if len(rng) != 2 or not rng[0] < rng[1]:
                raise ValueError(f"{name} must be an increasing (lo, hi) pair")


@dataclass
class Dataset:
    """Feature matrix, targets, and (for synthetic data) the generating model."""

    X: np.ndarray
    y: np.ndarray
    true_weights_pre: np.ndarray | None = None
    true_intercept_pre: float | None = None
    true_weights_post: np.ndarray | None = None
    true_intercept_post: float | None = None
    drift_index: int | None = None

    @property
    def n_points(self) -> int:
        return self.X.shape[0]

    @property
    def n_dims(self) -> int:
        return self.X.shape[1]

    @property
    def has_drift(self) -> bool:
        return self.drift_index is not None


def _draw_model(rng: np.random.Generator, spec: DatasetSpec):
    lo, hi = spec.weight_range
    w = rng.uniform(lo, hi, size=spec.n_dims)
    b = float(rng.uniform(lo, hi))
    return w, b


def _draw_features(rng: np.random.Generator, spec: DatasetSpec) -> np.ndarray:
    lo, hi = spec.feature_range
    return rng.uniform(lo, hi, size=(spec.n_points, spec.n_dims))


def gen_linear(spec: DatasetSpec) -> Dataset:
    """One stationary linear model plus Gaussian target noise."""
    if spec.scenario not in (Scenario.NORMAL, Scenario.CONVERGENCE):
        raise ValueError(f"gen_linear cannot build scenario {spec.scenario.value}")
    rng = np.random.default_rng(spec.seed)
    w, b = _draw_model(rng, spec)
    X = _draw_features(rng, spec)
    noise = rng.normal(0.0, spec.noise_std, size=spec.n_points)
    return Dataset(
        X=X,
        y=X @ w + b + noise,
        true_weights_pre=w,
        true_intercept_pre=b,
    )


def gen_drift(spec: DatasetSpec) -> Dataset:
    """A stream that reverses direction at floor(drift_fraction * N).

    Rows before the drift index follow (w, b); rows at and after it follow
    (-w, -b). Noise is drawn for the whole stream in row order, so the flip
    is the only discontinuity.
    """
    if spec.scenario not in DRIFT_SCENARIOS:
        raise ValueError(f"gen_drift cannot build scenario {spec.scenario.value}")
    rng = np.random.default_rng(spec.seed)
    w, b = _draw_model(rng, spec)
    X = _draw_features(rng, spec)
    noise = rng.normal(0.0, spec.noise_std, size=spec.n_points)
    idx = int(spec.drift_fraction * spec.n_points)
    y = np.empty(spec.n_points)
    y[:idx] = X[:idx] @ w + b + noise[:idx]
    y[idx:] = X[idx:] @ (-w) + (-b) + noise[idx:]
    return Dataset(
        X=X,
        y=y,
        true_weights_pre=w,
        true_intercept_pre=b,
        true_weights_post=-w,
        true_intercept_post=-b,
        drift_index=idx,
    )


def generate(spec: DatasetSpec) -> Dataset:
    """Dispatch on the spec's scenario."""
    if spec.scenario in DRIFT_SCENARIOS:
        return gen_drift(spec)
    return gen_linear(spec)


def save_csv(dataset: Dataset, path, header: bool = True) -> None:
    """Write features-then-target rows as plain comma-separated text.

    Floats are written with repr() and therefore reload bit-exactly through
    the CSV loader.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            cols = [f"x{i + 1}" for i in range(dataset.n_dims)] + ["y"]
            fh.write(",".join(cols) + "\n")
        for row, target in zip(dataset.X, dataset.y):
            cells = [repr(float(v)) for v in row] + [repr(float(target))]
            fh.write(",".join(cells) + "\n")


def sidecar_metadata(spec: DatasetSpec, dataset: Dataset) -> dict:
    """Provenance record written next to generated CSVs."""
    meta = {
        "seed": spec.seed,
        "n_points": spec.n_points,
        "n_dims": spec.n_dims,
        "noise_std": float(spec.noise_std),
        "scenario": spec.scenario.value,
        "feature_range": [float(v) for v in spec.feature_range],
        "weight_range": [float(v) for v in spec.weight_range],
        "true_weights_pre": [float(v) for v in dataset.true_weights_pre],
        "true_intercept_pre": float(dataset.true_intercept_pre),
    }
    if dataset.has_drift:
        meta["drift_index"] = int(dataset.drift_index)
        meta["drift_fraction"] = float(spec.drift_fraction)
        meta["true_weights_post"] = [float(v) for v in dataset.true_weights_post]
        meta["true_intercept_post"] = float(dataset.true_intercept_post)
    return meta
