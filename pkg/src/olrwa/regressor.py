"""Online weighted-average linear regression (OLR-WA).

The model keeps a single base hyperplane summarizing everything seen so far.
Each incoming mini-batch is fitted by pseudo-inverse, the base and incremental
plane normals are blended into two weighted-average candidate directions (one
per side of the planes' intersection), candidate planes are anchored at the
intersection point, and the candidate with the lower mean squared error on the
batch plus a synthetic sample of the past is adopted. With equal weights this
behaves like an exponentially weighted moving average of the fit; skewing the
weights trades adaptation speed against stability.

State is O(M): one plane, per-feature bounds, counters, and an RNG.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .baselines import OnlineRegressor
from .linalg import (
    AugmentedHyperplane,
    DegenerateAverageError,
    LinearModel,
    PlaneOverlap,
    Point,
    VerticalHyperplaneError,
    ZeroNormalError,
    EPS_PARALLEL,
    EPS_COINCIDE,
    define_hyperplane,
    hyperplane_to_model,
    intersection_point,
    model_to_hyperplane,
    mse,
    pinv_fit,
    weighted_average_vector,
)


class NotParallelError(ValueError):
    """weighted_mid_point requires parallel, non-coincident planes."""


class WeightMode(Enum):
    EQUAL = "equal"
    DYNAMIC = "dynamic"
    TIME_BASED = "time_based"
    CONFIDENCE_BASED = "confidence_based"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightScheme:
    """Base/incremental weight pair plus the policy that produces it.

    Weights are normalized to sum to one before use, so only their ratio
    matters; scaling both by the same positive factor yields the same model.
    ``DYNAMIC`` recomputes the base weight as points_seen * w_inc / K before
    each update, making the base count as many votes as the points it stands
    for.
    """

    mode: WeightMode = WeightMode.EQUAL
    w_base: float = 0.5
    w_inc: float = 0.5

    def __post_init__(self):
        if not (self.w_base > 0 and self.w_inc > 0):
            raise ValueError("weights must be positive")
        if self.mode is WeightMode.EQUAL and self.w_base != self.w_inc:
            raise ValueError("equal mode requires w_base == w_inc")

    @classmethod
    def equal(cls) -> "WeightScheme":
        return cls(WeightMode.EQUAL, 0.5, 0.5)

    @classmethod
    def dynamic(cls, w_inc: float = 0.01) -> "WeightScheme":
        return cls(WeightMode.DYNAMIC, w_inc, w_inc)

    @classmethod
    def time_based(cls, w_base: float = 0.1, w_inc: float = 2.0) -> "WeightScheme":
        return cls(WeightMode.TIME_BASED, w_base, w_inc)

    @classmethod
    def confidence_based(cls, w_base: float = 2.0, w_inc: float = 0.1) -> "WeightScheme":
        return cls(WeightMode.CONFIDENCE_BASED, w_base, w_inc)

    @classmethod
    def custom(cls, w_base: float, w_inc: float) -> "WeightScheme":
        return cls(WeightMode.CUSTOM, w_base, w_inc)

    def resolve(self, points_seen: int, batch_size: int) -> tuple[float, float]:
        """Normalized (w_base, w_inc) for one update."""
        wb, wi = self.w_base, self.w_inc
        if self.mode is WeightMode.DYNAMIC:
            wb = max(points_seen, 1) * wi / batch_size
        total = wb + wi
        return wb / total, wi / total


@dataclass(frozen=True)
class OlrWaConfig:
    """Hyperparameters of the online weighted-average regressor.

    base_fraction: share of the training stream used to fit the initial base
    plane (floor 1 point); base_count overrides it with an absolute count.
    The effective mini-batch size is max(user_batch, n_features *
    batch_multiplier) so the pseudo-inverse always sees at least as many rows
    as feature dimensions.
    """

    weight_scheme: WeightScheme = field(default_factory=WeightScheme.equal)
    base_fraction: float = 0.1
    base_count: int | None = None
    user_batch: int = 1
    batch_multiplier: int = 5
    sample_size_factor: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.base_fraction <= 1.0):
            raise ValueError("base_fraction must lie in (0, 1]")
        if self.base_count is not None and self.base_count < 1:
            raise ValueError("base_count must be >= 1")
        if self.user_batch < 1 or self.batch_multiplier < 1:
            raise ValueError("user_batch and batch_multiplier must be >= 1")
        if self.sample_size_factor < 1:
            raise ValueError("sample_size_factor must be >= 1")


@dataclass
class MiniBatch:
    """One streaming unit: K feature rows with their targets."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if self.X.shape[0] != self.y.shape[0] or self.X.shape[0] < 1:
            raise ValueError("X rows and y length must match and be >= 1")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("mini-batch must be finite")

    @property
    def size(self) -> int:
        return self.X.shape[0]


@dataclass
class OlrWaState:
    """Mutable model state: base plane, feature bounds, counters, RNG.

    Single-owner: drive one state from one thread at a time. ``clone()``
    produces a fully independent copy (including the RNG position).
    """

    config: OlrWaConfig
    dims: int
    base_plane: AugmentedHyperplane
    feature_lo: np.ndarray
    feature_hi: np.ndarray
    points_seen: int
    rng: np.random.Generator
    degenerate_updates: int = 0

    def clone(self) -> "OlrWaState":
        return copy.deepcopy(self)

    def model(self) -> LinearModel:
        return hyperplane_to_model(self.base_plane)


def effective_batch_size(user_batch: int, n_features: int, multiplier: int) -> int:
    """Mini-batch size max(U, M * Z): never fewer rows than M * Z."""
    if user_batch < 1 or n_features < 1 or multiplier < 1:
        raise ValueError("all arguments must be >= 1")
    return max(user_batch, n_features * multiplier)


def init_base(X, y, config: OlrWaConfig) -> OlrWaState:
    """Fit the initial base plane by pseudo-inverse and record feature bounds."""
    model = pinv_fit(X, y)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return OlrWaState(
        config=config,
        dims=X.shape[1],
        base_plane=model_to_hyperplane(model),
        feature_lo=X.min(axis=0),
        feature_hi=X.max(axis=0),
        points_seen=X.shape[0],
        rng=np.random.default_rng(config.rng_seed),
    )


def coincide(h1: AugmentedHyperplane, h2: AugmentedHyperplane) -> bool:
    """True iff the planes are the same point set within tolerance."""
    if 1.0 - abs(float(h1.normal @ h2.normal)) >= EPS_PARALLEL:
        return False
    foot = -h1.offset * h1.normal
    return abs(float(h2.residual(foot))) <= EPS_COINCIDE


def weighted_mid_point(
    h_base: AugmentedHyperplane,
    h_inc: AugmentedHyperplane,
    w_base: float,
    w_inc: float,
) -> Point:
    """Weighted average of the two planes' feet of perpendicular from the origin.

    Only defined for parallel, non-intersecting planes; equal weights give the
    exact geometric midpoint, unequal weights pull the point toward the
    heavier plane. The foot -offset * normal is invariant under flipping a
    plane's (normal, offset) sign, so no explicit sign alignment is needed.
    """
    if 1.0 - abs(float(h_base.normal @ h_inc.normal)) >= EPS_PARALLEL:
        raise NotParallelError("planes intersect; no midpoint is defined")
    p_base = -h_base.offset * h_base.normal
    p_inc = -h_inc.offset * h_inc.normal
    total = w_base + w_inc
    return Point(coords=(w_base * p_base + w_inc * p_inc) / total)


def sample_and_combine(state: OlrWaState, batch: MiniBatch) -> MiniBatch:
    """Batch rows plus a synthetic reconstruction of the past.

    Draws sample_size_factor * K feature rows uniformly from the running
    per-dimension bounds (via the state RNG, so replay is deterministic) and
    labels them exactly with the current base model: the synthetic rows have
    zero residual under the base plane.
    """
    if state.points_seen <= 0:
        raise ValueError("state has seen no points yet")
    n_synth = state.config.sample_size_factor * batch.size
    X_synth = state.rng.uniform(
        state.feature_lo, state.feature_hi, size=(n_synth, state.dims)
    )
    y_synth = state.model().predict(X_synth)
    return MiniBatch(
        X=np.vstack([batch.X, X_synth]),
        y=np.concatenate([batch.y, y_synth]),
    )


def candidate_planes(
    v_base, v_inc, w_base: float, w_inc: float, anchor: Point
) -> tuple[AugmentedHyperplane | None, AugmentedHyperplane | None]:
    """The two weighted-average planes through ``anchor``.

    Candidate 1 blends the normals as given; candidate 2 negates the base
    normal first, covering the second side of the intersection. A candidate
    whose averaged direction degenerates is returned as None.
    """
    planes = []
    for vb in (v_base, -np.asarray(v_base, dtype=float)):
        try:
            avg = weighted_average_vector(vb, v_inc, w_base, w_inc)
            planes.append(define_hyperplane(avg, anchor))
        except (DegenerateAverageError, ZeroNormalError):
            planes.append(None)
    return planes[0], planes[1]


def _absorb(state: OlrWaState, batch: MiniBatch) -> None:
    state.feature_lo = np.minimum(state.feature_lo, batch.X.min(axis=0))
    state.feature_hi = np.maximum(state.feature_hi, batch.X.max(axis=0))
    state.points_seen += batch.size


def update(state: OlrWaState, batch: MiniBatch) -> OlrWaState:
    """One weighted-average merge of the base plane with a mini-batch fit.

    Coinciding fits leave the plane untouched. Otherwise both candidate
    planes are anchored at the planes' intersection point (or at the weighted
    midpoint when parallel) and scored by MSE on the batch combined with a
    synthetic sample of the past; the lower-error candidate becomes the new
    base. A vertical candidate scores +inf; if both candidates are unusable
    the plane is kept and ``degenerate_updates`` is bumped. Bounds and the
    point counter always absorb the batch.
    """
    if batch.X.shape[1] != state.dims:
        raise ValueError(
            f"batch has {batch.X.shape[1]} features, state expects {state.dims}"
        )
    inc_plane = model_to_hyperplane(pinv_fit(batch.X, batch.y))
    base_plane = state.base_plane

    if coincide(base_plane, inc_plane):
        _absorb(state, batch)
        return state

    w_base, w_inc = state.config.weight_scheme.resolve(state.points_seen, batch.size)

    anchor = intersection_point(base_plane, inc_plane)
    if anchor is PlaneOverlap.COINCIDENT:  # unreachable after coincide(), kept safe
        _absorb(state, batch)
        return state
    if anchor is PlaneOverlap.PARALLEL:
        anchor = weighted_mid_point(base_plane, inc_plane, w_base, w_inc)

    cand_1, cand_2 = candidate_planes(
        base_plane.normal, inc_plane.normal, w_base, w_inc, anchor
    )
    combined = sample_and_combine(state, batch)

    def score(plane: AugmentedHyperplane | None) -> float:
        if plane is None:
            return math.inf
        try:
            return mse(plane, combined.X, combined.y)
        except VerticalHyperplaneError:
            return math.inf

    err_1, err_2 = score(cand_1), score(cand_2)
    if math.isinf(err_1) and math.isinf(err_2):
        state.degenerate_updates += 1
        _absorb(state, batch)
        return state

    # Ties keep candidate 1; exact float ties are measure-zero in practice.
    state.base_plane = cand_1 if err_1 <= err_2 else cand_2
    _absorb(state, batch)
    return state


def predict(state: OlrWaState, X) -> np.ndarray:
    """Predict targets from the current base plane."""
    return state.model().predict(X)


# --- snapshot serialization -------------------------------------------------
#
# Flat key=value lines. Floats are written with repr() and therefore
# round-trip exactly; the RNG position is captured via the bit-generator
# state integers.

_SCHEME_KEYS = ("weight_mode", "w_base", "w_inc")


def _fmt_vector(v: np.ndarray) -> str:
    return ",".join(repr(float(x)) for x in v)


def _parse_vector(s: str) -> np.ndarray:
    return np.array([float(tok) for tok in s.split(",")], dtype=float)


def save_state(state: OlrWaState) -> str:
    """Serialize a state (including config and RNG position) to key=value lines."""
    cfg = state.config
    bg = state.rng.bit_generator.state
    lines = [
        "format=olrwa-state-v1",
        f"dims={state.dims}",
        f"normal={_fmt_vector(state.base_plane.normal)}",
        f"offset={float(state.base_plane.offset)!r}",
        f"feature_lo={_fmt_vector(state.feature_lo)}",
        f"feature_hi={_fmt_vector(state.feature_hi)}",
        f"points_seen={state.points_seen}",
        f"degenerate_updates={state.degenerate_updates}",
        f"weight_mode={cfg.weight_scheme.mode.value}",
        f"w_base={float(cfg.weight_scheme.w_base)!r}",
        f"w_inc={float(cfg.weight_scheme.w_inc)!r}",
        f"base_fraction={float(cfg.base_fraction)!r}",
        f"base_count={'' if cfg.base_count is None else cfg.base_count}",
        f"user_batch={cfg.user_batch}",
        f"batch_multiplier={cfg.batch_multiplier}",
        f"sample_size_factor={cfg.sample_size_factor}",
        f"rng_seed={cfg.rng_seed}",
        f"rng_bit_generator={bg['bit_generator']}",
        f"rng_state={bg['state']['state']}",
        f"rng_inc={bg['state']['inc']}",
        f"rng_has_uint32={bg['has_uint32']}",
        f"rng_uinteger={bg['uinteger']}",
    ]
    return "\n".join(lines) + "\n"


def load_state(text: str) -> OlrWaState:
    """Rebuild a state from :func:`save_state` output. Round-trip exact."""
    kv: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        kv[key] = value
    if kv.get("format") != "olrwa-state-v1":
        raise ValueError(f"unrecognized snapshot format {kv.get('format')!r}")

    scheme = WeightScheme(
        mode=WeightMode(kv["weight_mode"]),
        w_base=float(kv["w_base"]),
        w_inc=float(kv["w_inc"]),
    )
    config = OlrWaConfig(
        weight_scheme=scheme,
        base_fraction=float(kv["base_fraction"]),
        base_count=int(kv["base_count"]) if kv["base_count"] else None,
        user_batch=int(kv["user_batch"]),
        batch_multiplier=int(kv["batch_multiplier"]),
        sample_size_factor=int(kv["sample_size_factor"]),
        rng_seed=int(kv["rng_seed"]),
    )
    if kv["rng_bit_generator"] != "PCG64":
        raise ValueError(f"unsupported bit generator {kv['rng_bit_generator']!r}")
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": int(kv["rng_state"]), "inc": int(kv["rng_inc"])},
        "has_uint32": int(kv["rng_has_uint32"]),
        "uinteger": int(kv["rng_uinteger"]),
    }
    return OlrWaState(
        config=config,
        dims=int(kv["dims"]),
        base_plane=AugmentedHyperplane(
            normal=_parse_vector(kv["normal"]), offset=float(kv["offset"])
        ),
        feature_lo=_parse_vector(kv["feature_lo"]),
        feature_hi=_parse_vector(kv["feature_hi"]),
        points_seen=int(kv["points_seen"]),
        rng=rng,
        degenerate_updates=int(kv["degenerate_updates"]),
    )


class OlrWa(OnlineRegressor):
    """Streaming wrapper exposing the shared online-regressor interface.

    Buffers incoming rows until the base size is reached, fits the base
    plane, then consumes full mini-batches of the effective size as they
    accumulate. A trailing partial batch stays buffered: updates always see
    complete mini-batches.
    """

    name = "olrwa"

    def __init__(self, config: OlrWaConfig | None = None):
        self.config = config if config is not None else OlrWaConfig()
        self.state: OlrWaState | None = None
        self._pending: list[tuple[np.ndarray, np.ndarray]] = []
        self._pending_rows = 0
        self._n_features: int | None = None
        self._batch_size: int | None = None
        self._base_size: int | None = None

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        self._n_features = int(n_features)
        self._batch_size = effective_batch_size(
            self.config.user_batch, n_features, self.config.batch_multiplier
        )
        if self.config.base_count is not None:
            self._base_size = self.config.base_count
        elif n_hint is not None:
            self._base_size = max(1, int(self.config.base_fraction * n_hint))
        else:
            self._base_size = self._batch_size
        self.state = None
        self._pending = []
        self._pending_rows = 0

    def observe_batch(self, X, y) -> None:
        if self._n_features is None:
            raise RuntimeError("call init() before observing data")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        self._pending.append((X, y))
        self._pending_rows += X.shape[0]
        self._drain()

    def _take(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        Xs, ys, got = [], [], 0
        while got < n:
            X, y = self._pending.pop(0)
            need = n - got
            if X.shape[0] <= need:
                Xs.append(X)
                ys.append(y)
                got += X.shape[0]
            else:
                Xs.append(X[:need])
                ys.append(y[:need])
                self._pending.insert(0, (X[need:], y[need:]))
                got = n
        self._pending_rows -= n
        return np.vstack(Xs), np.concatenate(ys)

    def _drain(self) -> None:
        if self.state is None and self._pending_rows >= self._base_size:
            X, y = self._take(self._base_size)
            self.state = init_base(X, y, self.config)
        if self.state is None:
            return
        while self._pending_rows >= self._batch_size:
            X, y = self._take(self._batch_size)
            update(self.state, MiniBatch(X=X, y=y))

    def finalize(self) -> None:
        """No-op: trailing rows smaller than one mini-batch are not consumed."""

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.state is None:
            return np.zeros(X.shape[0])  # cold start mirrors zero initialization
        return predict(self.state, X)

    def snapshot(self) -> str:
        if self.state is None:
            raise RuntimeError("no fitted state to snapshot")
        return save_state(self.state)
