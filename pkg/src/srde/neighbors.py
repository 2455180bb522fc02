"""Exact k-nearest-neighbor search and the per-query local frame."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, DegenerateFrameError, DomainError

__all__ = ["KNNIndex", "LocalFrame", "build_frame", "knn"]


def _distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = points - query
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _as_query(points: np.ndarray, query) -> np.ndarray:
    query = np.asarray(query, dtype=float).reshape(-1)
    if query.shape[0] != points.shape[1]:
        raise DomainError(
            f"query has dimension {query.shape[0]} but the data has dimension {points.shape[1]}"
        )
    return query


def _select(idx: np.ndarray, dist: np.ndarray, k: int):
    """The k smallest distances, ties resolved by lower index."""
    order = np.lexsort((idx, dist))[:k]
    return idx[order], dist[order]


def knn(points, query, k: int):
    """Exhaustive k-nearest-neighbor scan.

    Returns ``(indices, distances)`` sorted by ascending distance; equal
    distances are ordered by index.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DataError("neighbor search needs a non-empty (n, m) array")
    query = _as_query(points, query)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"k must be in [1, {n}], got {k}")
    dist = _distances(points, query)
    if k < n:
        kth = np.partition(dist, k - 1)[k - 1]
        cand = np.flatnonzero(dist <= kth)
    else:
        cand = np.arange(n)
    return _select(cand, dist[cand], k)


class KNNIndex:
    """Exact neighbor search over a fixed point set.

    ``method="brute"`` scans every point; ``method="kdtree"`` prunes with a
    k-d tree and then re-ranks the candidates with the same distance formula
    and tie rule as the scan, so both give identical answers.
    """

    def __init__(self, points, method: str = "brute"):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise DataError("neighbor index needs a non-empty (n, m) array")
        if method not in ("brute", "kdtree"):
            raise ValueError(f"unknown search method {method!r}")
        self.method = method
        self._tree = cKDTree(self.points) if method == "kdtree" else None

    def __len__(self):
        return self.points.shape[0]

    def query(self, query, k: int):
        if self._tree is None:
            return knn(self.points, query, k)
        query = _as_query(self.points, query)
        n = len(self)
        if not 1 <= k <= n:
            raise DomainError(f"k must be in [1, {n}], got {k}")
        d_tree, _ = self._tree.query(query, k=k)
        radius = float(np.atleast_1d(d_tree)[-1])
        # widen the ball so rounding differences cannot drop a tied point
        cand = np.asarray(
            self._tree.query_ball_point(query, radius * (1 + 1e-9) + 1e-300), dtype=np.intp
        )
        dist = _distances(self.points[cand], query)
        return _select(cand, dist, k)

    def all_distances(self, query) -> np.ndarray:
        return _distances(self.points, _as_query(self.points, query))


@dataclass(frozen=True)
class LocalFrame:
    """Translation to a query plus isotropic scaling into the theta-ball.

    An original distance ``d`` maps to the scaled radius ``d / scale``; the
    k-th neighbor lands exactly on ``theta``.
    """

    origin: np.ndarray
    scale: float
    theta: float
    k: int
    kth_distance: float
    radii: np.ndarray

    def to_scaled(self, distances):
        return np.asarray(distances, dtype=float) / self.scale


def build_frame(distances, theta: float, k: int | None = None, origin=None) -> LocalFrame:
    """Frame that places the last (largest) of ``distances`` at radius ``theta``."""
    d = np.asarray(distances, dtype=float).reshape(-1)
    if k is None:
        k = d.size
    if d.size != k or k < 1:
        raise DomainError(f"expected {k} neighbor distances, got {d.size}")
    if not 0.0 < theta < 0.5:
        raise DomainError(f"theta must lie in (0, 0.5), got {theta!r}")
    if np.any(np.diff(d) < 0) or np.any(d < 0) or not np.all(np.isfinite(d)):
        raise DomainError("neighbor distances must be finite, non-negative and ascending")
    R = float(d[-1])
    if R <= 0:
        raise DegenerateFrameError("all neighbors coincide with the query point")
    scale = R / theta
    radii = np.minimum(d / scale, theta)
    radii[-1] = theta
    radii.setflags(write=False)
    if origin is not None:
        origin = np.asarray(origin, dtype=float).reshape(-1)
    return LocalFrame(origin, scale, float(theta), int(k), R, radii)
