"""Classic online regressors behind one streaming interface.

All learners operate on the bias-augmented input (x, 1) with a single
parameter vector theta (bias last) initialized to zeros, and predict
``theta . (x, 1)``. The interface is:

    init(n_features, n_hint=None)  -- allocate zeroed state
    observe_batch(X, y)            -- consume training rows in stream order
    finalize()                     -- run any configured replay passes
    predict(X)                     -- current predictions
    snapshot()                     -- key=value text dump of the state

Pure gradient steppers (SGD and its lasso/ridge variants, mini-batch GD) may
be configured with multiple epochs: the first pass happens online as rows
arrive and the remaining passes replay the buffered stream in order at
finalize(). LMS, RLS and passive-aggressive are single-pass unless their
``replay`` flag opts them into the same protocol.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import LinearModel, pinv_fit


class PaVariant(Enum):
    I = "I"
    II = "II"
    III = "III"


@dataclass(frozen=True)
class RegressorConfig:
    """Shared hyperparameter bag; each learner reads the fields it uses.

    learning_rate: gradient step size (SGD family, mini-batch GD, LMS).
    epochs: passes over the observed stream for the gradient steppers.
    reg_lambda: L1/L2 penalty strength for the lasso/ridge variants.
    batch_size: mini-batch row count for mini-batch GD.
    forgetting: RLS discount on past covariance, in (0, 1].
    init_delta: RLS initial covariance scale, P0 = delta * I.
    aggressiveness / epsilon_tube / pa_variant: passive-aggressive knobs.
    use_bias: learn an intercept via input augmentation (the PA norm then
        includes the bias coordinate; disable for textbook comparisons).
    replay: opt the single-pass learners (LMS, RLS, PA) into epoch replay.
    """

    learning_rate: float = 0.01
    epochs: int = 1
    reg_lambda: float = 0.0
    batch_size: int = 16
    forgetting: float = 1.0
    init_delta: float = 1e4
    aggressiveness: float = 0.1
    epsilon_tube: float = 0.1
    pa_variant: PaVariant = PaVariant.III
    use_bias: bool = True
    replay: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (0.0 < self.forgetting <= 1.0):
            raise ValueError("forgetting must lie in (0, 1]")
        if self.init_delta <= 0:
            raise ValueError("init_delta must be positive")
        if self.aggressiveness <= 0:
            raise ValueError("aggressiveness must be positive")
        if self.epsilon_tube < 0:
            raise ValueError("epsilon_tube must be non-negative")


class OnlineRegressor:
    """Interface shared by every learner in this package."""

    name = "online"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        raise NotImplementedError

    def observe_batch(self, X, y) -> None:
        raise NotImplementedError

    def finalize(self) -> None:
        """Hook for end-of-stream work (replay passes, batch fits)."""

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def snapshot(self) -> str:
        raise NotImplementedError

    def clone(self) -> "OnlineRegressor":
        """Independent deep copy, used for mid-stream checkpoint evaluation."""
        return copy.deepcopy(self)


def _as_rows(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: {X.shape[0]} vs {y.shape[0]}")
    return X, y


class _ThetaRegressor(OnlineRegressor):
    """Common plumbing for learners whose state is the augmented theta vector."""

    def __init__(self, config: RegressorConfig | None = None):
        self.config = config if config is not None else RegressorConfig()
        self.theta: np.ndarray | None = None
        self._n_features: int | None = None

    @property
    def _aug(self) -> bool:
        return self.config.use_bias

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        self._n_features = int(n_features)
        dim = n_features + 1 if self._aug else n_features
        self.theta = np.zeros(dim)
        assert not self.theta.any(), "learners start from the all-zeros vector"

    def _augment(self, X: np.ndarray) -> np.ndarray:
        if not self._aug:
            return X
        return np.column_stack([X, np.ones(X.shape[0])])

    def predict(self, X) -> np.ndarray:
        if self.theta is None:
            raise RuntimeError("call init() before predicting")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._augment(X) @ self.theta

    def snapshot(self) -> str:
        lines = [
            f"model={self.name}",
            f"theta={','.join(repr(float(t)) for t in self.theta)}",
            f"use_bias={int(self._aug)}",
        ]
        return "\n".join(lines) + "\n"


class _ReplayMixin:
    """Buffer the stream and re-run it for epochs > 1 at finalize()."""

    def _init_buffer(self) -> None:
        self._buffer: list[tuple[np.ndarray, np.ndarray]] = []
        self._finalized = False

    def _remember(self, X: np.ndarray, y: np.ndarray) -> None:
        self._buffer.append((X, y))

    def _replay_passes(self) -> int:
        raise NotImplementedError

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        raise NotImplementedError

    def finalize(self) -> None:
        if self._finalized:
            return
        self._finalized = True
        for _ in range(self._replay_passes() - 1):
            for X, y in self._buffer:
                self._consume(X, y)


class SgdRegressor(_ReplayMixin, _ThetaRegressor):
    """Single-point stochastic gradient descent on the squared error."""

    name = "sgd"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        super().init(n_features, n_hint)
        self._init_buffer()

    def _replay_passes(self) -> int:
        return self.config.epochs

    def _penalty(self, weights: np.ndarray) -> np.ndarray:
        return np.zeros_like(weights)

    def _step(self, xa: np.ndarray, target: float) -> None:
        err = target - float(self.theta @ xa)
        g = 2.0 * err * xa
        if self._aug:
            # the intercept is never penalized
            g[:-1] -= 2.0 * self.config.reg_lambda * self._penalty(self.theta[:-1])
        else:
            g -= 2.0 * self.config.reg_lambda * self._penalty(self.theta)
        self.theta = self.theta + self.config.learning_rate * g

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        Xa = self._augment(X)
        for i in range(Xa.shape[0]):
            self._step(Xa[i], float(y[i]))

    def observe_batch(self, X, y) -> None:
        X, y = _as_rows(X, y)
        self._remember(X, y)
        self._consume(X, y)

    def update_one(self, x, target: float) -> None:
        """Single-point update outside the streaming interface (tests, demos)."""
        X, y = _as_rows(np.atleast_2d(x), [target])
        self._consume(X, y)


class OnlineLasso(SgdRegressor):
    """SGD with an L1 penalty on the weights (intercept untouched)."""

    name = "lasso"

    def _penalty(self, weights: np.ndarray) -> np.ndarray:
        return np.sign(weights)  # sign(0) = 0: standard subgradient choice


class OnlineRidge(SgdRegressor):
    """SGD with an L2 penalty on the weights (intercept untouched)."""

    name = "ridge"

    def _penalty(self, weights: np.ndarray) -> np.ndarray:
        return weights


class MiniBatchGd(_ReplayMixin, _ThetaRegressor):
    """Gradient descent on mini-batch mean squared error.

    Rows accumulate until ``batch_size`` is reached, then one averaged
    gradient step runs; replay passes at finalize() re-run the same batches
    (including a trailing short batch, averaged over its own size).
    """

    name = "mbgd"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        super().init(n_features, n_hint)
        self._init_buffer()
        self._held: list[tuple[np.ndarray, np.ndarray]] = []
        self._held_rows = 0

    def _replay_passes(self) -> int:
        return self.config.epochs

    def step_batch(self, X, y) -> None:
        """One averaged gradient step on the given rows."""
        X, y = _as_rows(X, y)
        Xa = self._augment(X)
        resid = y - Xa @ self.theta
        g = (2.0 / Xa.shape[0]) * (resid @ Xa)
        self.theta = self.theta + self.config.learning_rate * g

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        self._held.append((X, y))
        self._held_rows += X.shape[0]
        k = self.config.batch_size
        while self._held_rows >= k:
            Xs, ys, got = [], [], 0
            while got < k:
                bx, by = self._held.pop(0)
                take = min(k - got, bx.shape[0])
                Xs.append(bx[:take])
                ys.append(by[:take])
                if take < bx.shape[0]:
                    self._held.insert(0, (bx[take:], by[take:]))
                got += take
            self._held_rows -= k
            self.step_batch(np.vstack(Xs), np.concatenate(ys))

    def _flush_tail(self) -> None:
        if self._held:
            X = np.vstack([b[0] for b in self._held])
            y = np.concatenate([b[1] for b in self._held])
            self._held, self._held_rows = [], 0
            self.step_batch(X, y)

    def observe_batch(self, X, y) -> None:
        X, y = _as_rows(X, y)
        self._remember(X, y)
        self._consume(X, y)

    def finalize(self) -> None:
        if self._finalized:
            return
        self._flush_tail()
        super().finalize()
        self._flush_tail()


class LmsFilter(_ReplayMixin, _ThetaRegressor):
    """Widrow-Hoff least-mean-squares: one error-descent step per sample.

    Identical step to plain SGD, but honestly streaming: a single pass, no
    buffered replay unless ``replay`` is set.
    """

    name = "lms"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        super().init(n_features, n_hint)
        self._init_buffer()

    def _replay_passes(self) -> int:
        return self.config.epochs if self.config.replay else 1

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        eta = self.config.learning_rate
        Xa = self._augment(X)
        for i in range(Xa.shape[0]):
            xa = Xa[i]
            err = float(self.theta @ xa) - float(y[i])
            self.theta = self.theta - 2.0 * eta * err * xa

    def observe_batch(self, X, y) -> None:
        X, y = _as_rows(X, y)
        if self.config.replay:
            self._remember(X, y)
        self._consume(X, y)

    def update_one(self, x, target: float) -> None:
        X, y = _as_rows(np.atleast_2d(x), [target])
        self._consume(X, y)


class RecursiveLeastSquares(_ReplayMixin, _ThetaRegressor):
    """Exponentially-weighted recursive least squares.

    Keeps the inverse-covariance surrogate P (started at delta * I) and folds
    each sample in without matrix inversion. With forgetting = 1 the estimate
    converges to the ordinary least-squares solution. P is re-symmetrized
    every step to damp float drift; a near-singular gain denominator sets
    ``ill_conditioned`` instead of rescaling anything.
    """

    name = "rls"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        super().init(n_features, n_hint)
        self._init_buffer()
        self.P = self.config.init_delta * np.eye(self.theta.size)
        self.ill_conditioned = False

    def _replay_passes(self) -> int:
        return self.config.epochs if self.config.replay else 1

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        lam = self.config.forgetting
        Xa = self._augment(X)
        for i in range(Xa.shape[0]):
            xa = Xa[i]
            Px = self.P @ xa
            denom = lam + float(xa @ Px)
            if denom < 1e-12:
                self.ill_conditioned = True
            self.P = (self.P - np.outer(Px, Px) / denom) / lam
            self.P = (self.P + self.P.T) / 2.0
            innovation = float(y[i]) - float(xa @ self.theta)
            self.theta = self.theta + self.P @ xa * innovation

    def observe_batch(self, X, y) -> None:
        X, y = _as_rows(X, y)
        if self.config.replay:
            self._remember(X, y)
        self._consume(X, y)

    def update_one(self, x, target: float) -> None:
        X, y = _as_rows(np.atleast_2d(x), [target])
        self._consume(X, y)


class PassiveAggressive(_ReplayMixin, _ThetaRegressor):
    """Epsilon-insensitive passive-aggressive regression.

    No update while the absolute residual stays inside the epsilon tube;
    otherwise the step multiplier tau is the tube-excess loss divided by
    ||x||^2 (variant I), the same capped at C (variant II), or divided by
    ||x||^2 + 1/(2C) (variant III). With use_bias the squared norm includes
    the bias coordinate.
    """

    name = "pa"

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        super().init(n_features, n_hint)
        self._init_buffer()

    def _replay_passes(self) -> int:
        return self.config.epochs if self.config.replay else 1

    def _consume(self, X: np.ndarray, y: np.ndarray) -> None:
        c = self.config.aggressiveness
        eps = self.config.epsilon_tube
        variant = self.config.pa_variant
        Xa = self._augment(X)
        for i in range(Xa.shape[0]):
            xa = Xa[i]
            err = float(y[i]) - float(self.theta @ xa)
            loss = abs(err) - eps
            if loss <= 0.0:
                continue  # passive phase
            sq = float(xa @ xa)
            if variant is PaVariant.I:
                tau = loss / sq
            elif variant is PaVariant.II:
                tau = min(c, loss / sq)
            else:
                tau = loss / (sq + 1.0 / (2.0 * c))
            self.theta = self.theta + np.sign(err) * tau * xa

    def observe_batch(self, X, y) -> None:
        X, y = _as_rows(X, y)
        if self.config.replay:
            self._remember(X, y)
        self._consume(X, y)

    def update_one(self, x, target: float) -> None:
        X, y = _as_rows(np.atleast_2d(x), [target])
        self._consume(X, y)


class BatchLeastSquares(OnlineRegressor):
    """Accuracy reference: buffer everything, solve once at finalize()."""

    name = "batch"

    def __init__(self, config: RegressorConfig | None = None):
        self.config = config if config is not None else RegressorConfig()
        self.model: LinearModel | None = None
        self._rows: list[tuple[np.ndarray, np.ndarray]] = []
        self._n_features: int | None = None

    def init(self, n_features: int, n_hint: int | None = None) -> None:
        self._n_features = int(n_features)
        self.model = None
        self._rows = []

    def observe_batch(self, X, y) -> None:
        self._rows.append(_as_rows(X, y))

    def finalize(self) -> None:
        if not self._rows:
            return
        X = np.vstack([r[0] for r in self._rows])
        y = np.concatenate([r[1] for r in self._rows])
        self.model = pinv_fit(X, y)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.model is None:
            return np.zeros(X.shape[0])
        return self.model.predict(X)

    def snapshot(self) -> str:
        if self.model is None:
            return "model=batch\nfitted=0\n"
        coeffs = ",".join(repr(float(w)) for w in self.model.weights)
        return (
            f"model=batch\nfitted=1\nweights={coeffs}\n"
            f"intercept={float(self.model.intercept)!r}\n"
        )
