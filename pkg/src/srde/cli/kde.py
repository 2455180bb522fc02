"""Gaussian product-kernel density estimation, used as the comparison baseline."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from ..errors import DataError, DomainError

__all__ = ["KDEClassifier", "gaussian_kde_density", "kde_log_density", "silverman_bandwidth"]


def silverman_bandwidth(instances) -> np.ndarray:
    """Per-dimension rule-of-thumb bandwidth ``sigma_d * n**(-1/(m+4))``."""
    x = np.atleast_2d(np.asarray(instances, dtype=float))
    n, m = x.shape
    if n < 2:
        raise DataError("automatic bandwidth needs at least two instances")
    sd = x.std(axis=0, ddof=1)
    if np.any(sd <= 0):
        raise DataError("automatic bandwidth undefined for a constant coordinate")
    return sd * n ** (-1.0 / (m + 4))


def _bandwidth(x: np.ndarray, bandwidth) -> np.ndarray:
    if isinstance(bandwidth, str):
        if bandwidth != "auto":
            raise DomainError(f"bandwidth must be positive or 'auto', got {bandwidth!r}")
        return silverman_bandwidth(x)
    h = np.broadcast_to(np.asarray(bandwidth, dtype=float), (x.shape[1],)).copy()
    if not np.all(h > 0):
        raise DomainError(f"bandwidth must be positive, got {bandwidth!r}")
    return h


def kde_log_density(instances, queries, bandwidth="auto") -> np.ndarray:
    """Log of the product-kernel KDE at each row of ``queries``."""
    x = np.atleast_2d(np.asarray(instances, dtype=float))
    v = np.atleast_2d(np.asarray(queries, dtype=float))
    if v.shape[1] != x.shape[1]:
        raise DomainError(f"query dimension {v.shape[1]} != data dimension {x.shape[1]}")
    h = _bandwidth(x, bandwidth)
    log_norm = -np.sum(np.log(h)) - 0.5 * x.shape[1] * math.log(2 * math.pi) - math.log(x.shape[0])
    out = np.empty(v.shape[0])
    # chunk to bound memory at O(chunk * n)
    chunk = max(1, 2_000_000 // max(1, x.shape[0]))
    for s in range(0, v.shape[0], chunk):
        z = (v[s:s + chunk, None, :] - x[None, :, :]) / h
        out[s:s + chunk] = logsumexp(-0.5 * np.sum(z * z, axis=2), axis=1) + log_norm
    return out


def gaussian_kde_density(instances, query, bandwidth="auto") -> float:
    """``(1/n) sum_i prod_d N(v_d; s_id, h_d**2)`` at a single query."""
    query = np.asarray(query, dtype=float).reshape(1, -1)
    return float(np.exp(kde_log_density(instances, query, bandwidth)[0]))


class KDEClassifier:
    """Prior-weighted KDE class densities; predicts the largest ``|S_j| f_j(v)``."""

    def __init__(self, bandwidth="auto"):
        self.bandwidth = bandwidth

    def fit(self, points, labels):
        points = np.asarray(points, dtype=float)
        labels = np.asarray(labels)
        self.classes_ = np.unique(labels).tolist()
        self._data = [points[labels == c] for c in self.classes_]
        self._bw = [_bandwidth(x, self.bandwidth) for x in self._data]
        return self

    def predict(self, queries) -> list:
        scores = np.column_stack([
            math.log(x.shape[0]) + kde_log_density(x, queries, h)
            for x, h in zip(self._data, self._bw)
        ])
        return [self.classes_[i] for i in np.argmax(scores, axis=1)]
