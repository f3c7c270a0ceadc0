"""Least-squares fitting and hyperplane algebra in augmented (feature, target) space.

A linear model ``y = w . x + b`` over M features is, equivalently, the
hyperplane ``w . x - y + b = 0`` in the (M+1)-dimensional space whose last
axis is the target. All geometric operations in this module work on that
augmented representation: unit normal vector plus scalar offset, with the
plane defined as ``normal . z + offset = 0``.

Canonical form: normals are unit length, and planes built from a
:class:`LinearModel` are oriented so the target component of the normal is
negative. Two planes/representations ``(n, d)`` and ``(-n, -d)`` describe the
same point set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Tolerances for degenerate-case detection. These sit far below data noise
# and far above float rounding; nothing downstream is sensitive to the exact
# values.
EPS_PARALLEL = 1e-9  # on 1 - |cos(angle between normals)|
EPS_COINCIDE = 1e-9  # plane-equation residual
EPS_VERTICAL = 1e-9  # |target component| below which a plane has no slope form
EPS_ZERO_NORMAL = 1e-15
EPS_DEGENERATE_AVERAGE = 1e-12


class VerticalHyperplaneError(ValueError):
    """The plane's normal has no target component: it cannot be written as y = w.x + b."""


class ZeroNormalError(ValueError):
    """A direction vector with (near-)zero norm cannot define a hyperplane."""


class DegenerateAverageError(ValueError):
    """Weighted average of two unit vectors collapsed to (near-)zero."""


class PlaneOverlap(Enum):
    """Degenerate outcomes of intersecting two hyperplanes."""

    PARALLEL = "parallel"
    COINCIDENT = "coincident"


def _require_finite(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass
class LinearModel:
    """Regression coefficients: per-feature slopes plus an intercept."""

    weights: np.ndarray
    intercept: float

    def __post_init__(self):
        self.weights = np.atleast_1d(_require_finite(self.weights, "weights"))
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ValueError("weights must be a vector of length >= 1")
        self.intercept = float(_require_finite(self.intercept, "intercept"))

    @property
    def n_features(self) -> int:
        return self.weights.size

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.weights + self.intercept


@dataclass
class AugmentedHyperplane:
    """Unit normal and offset of a plane in (feature, target) space.

    The plane is ``normal . z + offset = 0`` for z in (M+1)-space; the last
    normal component belongs to the target axis.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = np.atleast_1d(_require_finite(self.normal, "normal"))
        if self.normal.size < 2:
            raise ValueError("normal must live in (M+1)-space with M >= 1")
        norm = float(np.linalg.norm(self.normal))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"normal must be unit length, got |n| = {norm!r}")
        self.offset = float(_require_finite(self.offset, "offset"))

    @property
    def n_features(self) -> int:
        return self.normal.size - 1

    def is_vertical(self, eps: float = EPS_VERTICAL) -> bool:
        return abs(float(self.normal[-1])) <= eps

    def residual(self, z) -> np.ndarray:
        """Signed plane-equation residual ``normal . z + offset`` for point(s) z."""
        z = np.asarray(z, dtype=float)
        return z @ self.normal + self.offset


@dataclass
class Point:
    """A point in augmented (feature, target) space."""

    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.atleast_1d(_require_finite(self.coords, "coords"))


def pinv_fit(X, y) -> LinearModel:
    """Minimum-norm least-squares fit of the bias-augmented system [X | 1] (w, b) ~ y.

    Uses an SVD-backed solve, so rank-deficient systems (fewer rows than
    parameters, or collinear columns) return the minimum-norm solution.
    """
    X = np.atleast_2d(_require_finite(X, "X"))
    y = np.atleast_1d(_require_finite(y, "y"))
    if X.ndim != 2 or y.ndim != 1:
        raise ValueError("X must be a K x M matrix and y a length-K vector")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"row mismatch: X has {X.shape[0]} rows, y has {y.shape[0]}")
    if X.shape[0] < 1:
        raise ValueError("need at least one observation")
    A = np.column_stack([X, np.ones(X.shape[0])])
    theta, *_ = np.linalg.lstsq(A, y, rcond=None)
    return LinearModel(weights=theta[:-1], intercept=float(theta[-1]))


def model_to_hyperplane(m: LinearModel) -> AugmentedHyperplane:
    """Rewrite y = w.x + b as the canonical plane (w, -1).z + b = 0, normalized.

    The resulting normal always has a strictly negative target component, so
    the canonical orientation holds by construction.
    """
    v = np.append(m.weights, -1.0)
    scale = float(np.linalg.norm(v))
    return AugmentedHyperplane(normal=v / scale, offset=m.intercept / scale)


def hyperplane_to_model(h: AugmentedHyperplane) -> LinearModel:
    """Inverse of :func:`model_to_hyperplane`.

    Raises VerticalHyperplaneError when the target component of the normal is
    (near-)zero, i.e. the plane is not the graph of any linear function of
    the features.
    """
    n_t = float(h.normal[-1])
    if abs(n_t) <= EPS_VERTICAL:
        raise VerticalHyperplaneError(
            f"target component {n_t!r} of the normal is below {EPS_VERTICAL}"
        )
    return LinearModel(weights=-h.normal[:-1] / n_t, intercept=-h.offset / n_t)


def intersection_point(
    h1: AugmentedHyperplane, h2: AugmentedHyperplane
) -> Point | PlaneOverlap:
    """A point common to both planes, or the degenerate relation between them.

    Non-parallel planes: returns the minimum-norm solution of the two plane
    equations (unique for M = 1; an arbitrary-but-deterministic point on the
    intersection set for M >= 2). Parallel normals: returns
    ``PlaneOverlap.COINCIDENT`` when the planes are the same point set within
    tolerance, else ``PlaneOverlap.PARALLEL``.
    """
    cos = float(h1.normal @ h2.normal)
    if 1.0 - abs(cos) < EPS_PARALLEL:
        foot = -h1.offset * h1.normal  # closest point of h1 to the origin
        if abs(float(h2.residual(foot))) <= EPS_COINCIDE:
            return PlaneOverlap.COINCIDENT
        return PlaneOverlap.PARALLEL
    A = np.vstack([h1.normal, h2.normal])
    b = np.array([-h1.offset, -h2.offset])
    z, *_ = np.linalg.lstsq(A, b, rcond=None)
    return Point(coords=z)


def define_hyperplane(normal, p: Point) -> AugmentedHyperplane:
    """Plane through point p orthogonal to ``normal`` (any nonzero length).

    The direction is normalized and, when the target component is positive,
    flipped together with the offset so equal inputs up to positive scaling
    produce one canonical representation.
    """
    normal = np.atleast_1d(_require_finite(normal, "normal"))
    norm = float(np.linalg.norm(normal))
    if norm <= EPS_ZERO_NORMAL:
        raise ZeroNormalError(f"cannot define a hyperplane from |normal| = {norm!r}")
    unit = normal / norm
    offset = -float(unit @ p.coords)
    if float(unit[-1]) > 0.0:
        unit, offset = -unit, -offset
    return AugmentedHyperplane(normal=unit, offset=offset)


def weighted_average_vector(v_base, v_inc, w_base: float, w_inc: float) -> np.ndarray:
    """Convex-style average (w_b v_b + w_i v_i) / (w_b + w_i) of two unit vectors.

    The result is deliberately NOT renormalized: only its direction matters
    downstream, and :func:`define_hyperplane` renormalizes. Raises
    DegenerateAverageError when opposing inputs with matching weights cancel.
    """
    v_base = _require_finite(v_base, "v_base")
    v_inc = _require_finite(v_inc, "v_inc")
    for name, v in (("v_base", v_base), ("v_inc", v_inc)):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
            raise ValueError(f"{name} must be unit length")
    if w_base <= 0 or w_inc <= 0:
        raise ValueError("weights must be positive")
    avg = (w_base * v_base + w_inc * v_inc) / (w_base + w_inc)
    if float(np.linalg.norm(avg)) <= EPS_DEGENERATE_AVERAGE:
        raise DegenerateAverageError("averaged direction vanished (antipodal inputs)")
    return avg


def mse(model_or_plane, X, y) -> float:
    """Mean squared prediction error over a batch.

    Accepts either a LinearModel or a (non-vertical) AugmentedHyperplane;
    the latter propagates VerticalHyperplaneError.
    """
    if isinstance(model_or_plane, AugmentedHyperplane):
        model = hyperplane_to_model(model_or_plane)
    else:
        model = model_or_plane
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise ValueError("X and y must hold the same positive number of rows")
    resid = y - model.predict(X)
    return float(np.mean(resid * resid))
