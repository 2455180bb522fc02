"""Density-based classification with localized SRDE fits.

Training only records a global shift/scale that puts every stored instance
inside a box of diagonal < 1; all fitting happens at query time.  For a query
``v`` and class ``j`` the k nearest class members are mapped into a frame
whose k-th neighbor sits at radius ``theta``; the fitted ``lam_0`` is a
density *conditional* on that neighborhood and in *scaled* units, so it is
converted back with

    f_j(v) = (k / |S_j|) * lam_0 * (theta / R_j) ** m

where ``R_j`` is the k-th neighbor distance.  Classes are compared through
``L_j(v) = |S_j| f_j(v) / sum_h |S_h| f_h(v)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_Q, DensityEstimate, _check_order, _check_theta, density_at_origin
from .errors import DataError, DomainError
from .neighbors import KNNIndex, build_frame

__all__ = [
    "DEFAULT_K",
    "DEFAULT_THETA",
    "ClassLikelihood",
    "ClassifierModel",
    "Hyperparams",
    "LikelihoodReport",
    "PointDensityEstimator",
    "class_density",
    "global_normalization",
    "likelihoods",
    "local_density",
    "predict",
    "predict_many",
    "train",
]

log = logging.getLogger(__name__)

DEFAULT_K = 25
DEFAULT_THETA = 0.45
SCALE_MARGIN = 1e-6
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Hyperparams:
    k: int = DEFAULT_K
    q: int = DEFAULT_Q
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "q", _check_order(self.q))
        object.__setattr__(self, "theta", _check_theta(self.theta))


def global_normalization(points: np.ndarray):
    """Coordinate-wise minimum and ``1 / (diagonal * (1 + 1e-6))`` of the bounding box.

    The bounding-box diagonal bounds every pairwise distance, so after
    ``(x - shift) * scale`` all pairwise distances are below 1.  One pass.
    """
    points = np.asarray(points, dtype=float)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    if not diag > 0:
        raise DataError("all training points are identical; the data has no extent")
    return lo, 1.0 / (diag * (1.0 + SCALE_MARGIN))


def local_density(index: KNNIndex, query: np.ndarray, hp: Hyperparams) -> DensityEstimate:
    """SRDE density of the indexed points at ``query``, in the index's coordinates.

    The returned value is the unconditional density: ``lam_0`` corrected for
    both the neighborhood mass ``k/n`` and the frame scaling.
    """
    n = len(index)
    m = index.points.shape[1]
    k = hp.k
    if k > n:
        warnings.warn(f"only {n} points available, using k={n} instead of {k}",
                      RuntimeWarning, stacklevel=3)
        k = n
    idx, dist = index.query(query, k)
    flags = ()
    if dist[-1] <= 0:
        # duplicates of the query: widen to the nearest strictly positive distance
        all_d = index.all_distances(query)
        positive = all_d[all_d > 0]
        if positive.size == 0:
            return DensityEstimate(math.inf, math.inf, math.nan, None, None, k, ("infinite",))
        R = float(positive.min())
        dist = np.sort(all_d[all_d <= R])
        k = dist.size
        flags = ("widened",)
    frame = build_frame(dist, hp.theta, k, origin=query)
    est = density_at_origin(frame.radii, m, hp.q, hp.theta)
    value = (k / n) * est.lambda0 * (hp.theta / frame.kth_distance) ** m
    return DensityEstimate(value, est.lambda0, est.log_likelihood, est.coefficients, frame, k, flags)


@dataclass
class ClassifierModel:
    """Trained SRDE classifier; immutable in practice once built by :func:`train`."""

    classes: list
    class_points: dict
    global_shift: np.ndarray
    global_scale: float
    hyperparams: Hyperparams
    m: int
    _indexes: dict = field(default_factory=dict, repr=False, compare=False)
    search: str = "brute"

    def __post_init__(self):
        for label in self.classes:
            pts = np.asarray(self.class_points[label], dtype=float)
            self._indexes[label] = KNNIndex(self.normalize(pts), method=self.search)

    def normalize(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.global_shift) * self.global_scale

    def class_size(self, label) -> int:
        return len(self._indexes[label])

    @property
    def sizes(self) -> dict:
        return {c: self.class_size(c) for c in self.classes}


def train(points, labels, hyperparams: Hyperparams | None = None, search: str = "brute") -> ClassifierModel:
    """Record the global normalization and partition the data by class."""
    hp = hyperparams or Hyperparams()
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DataError("training data must be a non-empty (n, m) array")
    if not np.all(np.isfinite(points)):
        raise DataError("training data contains non-finite values")
    labels = np.asarray(labels)
    if labels.shape != (points.shape[0],):
        raise DataError("need exactly one label per training point")
    classes, inverse = np.unique(labels, return_inverse=True)
    if classes.size < 2:
        raise DataError(f"training data needs at least 2 classes, found {classes.size}")
    shift, scale = global_normalization(points)
    class_points = {}
    for c, label in enumerate(classes.tolist()):
        pts = points[inverse == c]
        if pts.shape[0] < hp.k:
            log.warning("class %r has %d < k=%d instances", label, pts.shape[0], hp.k)
        class_points[label] = pts
    return ClassifierModel(classes.tolist(), class_points, shift, scale, hp, points.shape[1],
                           search=search)


def class_density(model: ClassifierModel, label, query) -> DensityEstimate:
    """Unconditional density of class ``label`` at ``query``, in normalized coordinates."""
    if label not in model._indexes:
        raise DomainError(f"unknown class label {label!r}")
    query = np.asarray(query, dtype=float).reshape(-1)
    if query.shape[0] != model.m:
        raise DomainError(f"query has dimension {query.shape[0]}, model expects {model.m}")
    return local_density(model._indexes[label], model.normalize(query), model.hyperparams)


@dataclass(frozen=True)
class ClassLikelihood:
    label: object
    raw_density: float
    weighted: float
    likelihood: float


@dataclass(frozen=True)
class LikelihoodReport:
    per_class: list
    predicted: object
    flags: tuple = ()

    @property
    def values(self) -> np.ndarray:
        return np.array([c.likelihood for c in self.per_class])


def _first_max(values: np.ndarray) -> int:
    """Index of the maximum; values within a relative 1e-9 of it count as tied."""
    top = np.max(values)
    return int(np.flatnonzero(values >= top * (1.0 - TIE_RTOL))[0])


def likelihoods(model: ClassifierModel, query) -> LikelihoodReport:
    raw = np.array([class_density(model, c, query).value for c in model.classes])
    sizes = np.array([model.class_size(c) for c in model.classes], dtype=float)
    weighted = sizes * raw
    flags = ()
    if np.any(np.isinf(weighted)):
        hit = np.isinf(weighted)
        L = hit / hit.sum()
        best = int(np.flatnonzero(hit)[0])
        flags = ("infinite_density",)
    else:
        total = weighted.sum()
        if total > 0:
            L = weighted / total
            best = _first_max(L)
        else:
            L = np.full(len(raw), 1.0 / len(raw))
            best = int(np.argmax(sizes))
            flags = ("zero_density",)
    rows = [ClassLikelihood(c, float(r), float(w), float(l))
            for c, r, w, l in zip(model.classes, raw, weighted, L)]
    return LikelihoodReport(rows, model.classes[best], flags)


def predict(model: ClassifierModel, query):
    return likelihoods(model, query).predicted


def predict_many(model: ClassifierModel, queries) -> list:
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    return [predict(model, v) for v in queries]


class PointDensityEstimator:
    """SRDE density of a single unlabeled point set, reported in original units."""

    def __init__(self, points, hyperparams: Hyperparams | None = None, search: str = "brute"):
        self.hyperparams = hyperparams or Hyperparams()
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise DataError("density estimation needs a non-empty (n, m) array")
        self.m = points.shape[1]
        self.global_shift, self.global_scale = global_normalization(points)
        self._index = KNNIndex((points - self.global_shift) * self.global_scale, method=search)

    @property
    def n(self) -> int:
        return len(self._index)

    def estimate(self, query) -> DensityEstimate:
        """Estimate at ``query``; ``value`` is in original coordinates.

        The normalized-space density is multiplied by ``global_scale**m``,
        the Jacobian of ``x -> (x - shift) * scale``.
        """
        query = np.asarray(query, dtype=float).reshape(-1)
        if query.shape[0] != self.m:
            raise DomainError(f"query has dimension {query.shape[0]}, data has dimension {self.m}")
        est = local_density(self._index, (query - self.global_shift) * self.global_scale,
                            self.hyperparams)
        jac = self.global_scale ** self.m
        return DensityEstimate(est.value * jac, est.lambda0, est.log_likelihood,
                               est.coefficients, est.frame, est.k, est.flags)

    def kth_distance(self, est: DensityEstimate) -> float:
        """k-th neighbor distance of ``est`` in original units."""
        return est.frame.kth_distance / self.global_scale

    def __call__(self, query) -> float:
        return self.estimate(query).value
