"""Super-radius based density estimation (SRDE).

Around the origin of a local frame the radial profile of the density is
expanded as a truncated power series ``g(r) = sum_j lam_j r**j``.  In terms of
the super-radius ``z = r**m`` this gives

    f_Z(z) = (beta / m) * sum_j lam_j z**(j/m)
    F_Z(z) = beta * sum_j lam_j z**(1 + j/m) / (m + j)

on ``[0, theta**m]``.  The coefficients are fitted by maximum likelihood under
the constraint ``F_Z(theta**m) = 1``, and ``lam_0`` is then the estimate of the
density at the origin.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, FitError
from .geometry import dimension

__all__ = [
    "DEFAULT_Q",
    "MAX_ORDER",
    "DensityEstimate",
    "RadiusSample",
    "SeriesCoefficients",
    "Fz_at",
    "constant_series",
    "density_at_origin",
    "fit_function_series",
    "fit_series",
    "fz_at",
    "log_likelihood",
]

DEFAULT_Q = 2
MAX_ORDER = 8
GRID_POINTS = 256

_N_STARTS = 5
_MAX_ITER = 500
_GTOL = 1e-8
_DECREMENT_TOL = 1e-12
_BARRIER_MU0 = 1.0
_BARRIER_MU_MIN = 1e-12


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta < 0.5:
        raise DomainError(f"theta must lie in (0, 0.5), got {theta!r}")
    return theta


def _check_order(q: int) -> int:
    if isinstance(q, bool) or int(q) != q or q < 0:
        raise DomainError(f"series order q must be a non-negative integer, got {q!r}")
    if q > MAX_ORDER:
        raise DomainError(f"series order q={q} exceeds the supported maximum {MAX_ORDER}")
    return int(q)


def _powers(r: np.ndarray, q: int) -> np.ndarray:
    """Columns ``r**0 .. r**q`` built by repeated multiplication."""
    out = np.empty((r.shape[0], q + 1))
    out[:, 0] = 1.0
    for j in range(1, q + 1):
        out[:, j] = out[:, j - 1] * r
    return out


@dataclass(frozen=True)
class SeriesCoefficients:
    """Fitted coefficients ``lam_0 .. lam_q`` of the radial series.

    ``lambdas[0]`` is the density estimate at the origin of the (scaled)
    local frame.
    """

    lambdas: np.ndarray
    m: int
    theta: float

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        if lam.size == 0 or not np.all(np.isfinite(lam)):
            raise DomainError("coefficients must be a non-empty vector of finite reals")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "m", dimension(self.m).m)
        object.__setattr__(self, "theta", _check_theta(self.theta))
        _check_order(lam.size - 1)

    @property
    def q(self) -> int:
        return self.lambdas.size - 1

    @property
    def lambda0(self) -> float:
        return float(self.lambdas[0])

    @property
    def beta(self) -> float:
        return dimension(self.m).surface_coeff

    @property
    def z_max(self) -> float:
        return self.theta ** self.m

    def radial(self, r):
        """Evaluate ``sum_j lam_j r**j`` (Horner)."""
        r = np.asarray(r, dtype=float)
        acc = np.zeros_like(r)
        for lam in self.lambdas[::-1]:
            acc = acc * r + lam
        return acc

    def normalization(self) -> float:
        """``F_Z(theta**m)``; equals 1 for a properly constrained fit."""
        j = np.arange(self.q + 1)
        m = self.m
        return float(self.beta * np.sum(self.lambdas * self.theta ** (m + j) / (m + j)))

    def grid_minimum(self, points: int = GRID_POINTS) -> float:
        """Smallest value of the radial series on a uniform grid over ``[0, theta]``."""
        return float(np.min(self.radial(np.linspace(0.0, self.theta, points))))

    def to_dict(self) -> dict:
        return {"lambdas": [float(v) for v in self.lambdas], "m": self.m, "theta": self.theta}

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesCoefficients":
        return cls(np.asarray(d["lambdas"], dtype=float), int(d["m"]), float(d["theta"]))


@dataclass(frozen=True)
class RadiusSample:
    """Distances of the neighbors from the origin of the scaled local frame."""

    radii: np.ndarray

    def __post_init__(self):
        r = np.array(self.radii, dtype=float).reshape(-1)
        if r.size < 1:
            raise DomainError("a radius sample needs at least one radius")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise DomainError("radii must be finite and non-negative")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    @property
    def n(self) -> int:
        return self.radii.size


@dataclass(frozen=True)
class DensityEstimate:
    """Pointwise density estimate plus the fit that produced it.

    ``value`` is expressed in whatever coordinates the producer documents;
    ``lambda0`` is always the raw coefficient in the scaled local frame.
    """

    value: float
    lambda0: float
    log_likelihood: float
    coefficients: Optional[SeriesCoefficients]
    frame: Optional[object] = None
    k: Optional[int] = None
    flags: tuple = field(default_factory=tuple)


def constant_series(m: int, theta: float) -> SeriesCoefficients:
    """The q=0 series, fully determined by the normalization constraint."""
    ctx = dimension(m)
    theta = _check_theta(theta)
    return SeriesCoefficients(np.array([m / (ctx.surface_coeff * theta**m)]), m, theta)


def _z_domain(coeffs: SeriesCoefficients, z):
    z = np.asarray(z, dtype=float)
    zmax = coeffs.z_max
    if np.any(~np.isfinite(z)) or np.any(z < 0) or np.any(z > zmax * (1 + 1e-12)):
        raise DomainError(f"z must lie in [0, theta**m] = [0, {zmax!r}]")
    return z


def fz_at(coeffs: SeriesCoefficients, z):
    """Density of the super-radius, ``(beta/m) sum_j lam_j z**(j/m)``."""
    z = _z_domain(coeffs, z)
    r = z ** (1.0 / coeffs.m)
    out = coeffs.beta / coeffs.m * coeffs.radial(r)
    return float(out) if out.ndim == 0 else out


def Fz_at(coeffs: SeriesCoefficients, z):
    """Distribution function of the super-radius, ``beta sum_j lam_j z**(1+j/m)/(m+j)``."""
    z = _z_domain(coeffs, z)
    m = coeffs.m
    r = z ** (1.0 / m)
    acc = np.zeros_like(z)
    for j in range(coeffs.q, -1, -1):
        acc = acc * r + coeffs.lambdas[j] / (m + j)
    out = coeffs.beta * z * acc
    return float(out) if out.ndim == 0 else out


def log_likelihood(coeffs: SeriesCoefficients, radii) -> float:
    """``sum_i ln(sum_j lam_j r_i**j)``; ``-inf`` outside the positive region.

    The constant ``beta/m`` is left out, which does not move the maximizer.
    """
    p = coeffs.radial(np.asarray(radii, dtype=float))
    if np.any(p <= 0):
        return -math.inf
    return float(np.sum(np.log(p)))


class _Problem:
    """Log-likelihood reparametrized in ``w = lam_1..lam_q``.

    The constraint is solved for ``lam_0 = a - b . w`` so that the series at
    radius r reads ``a + (r**j - b_j) . w``.
    """

    def __init__(self, r: np.ndarray, m: int, q: int, theta: float):
        beta = dimension(m).surface_coeff
        j = np.arange(1, q + 1)
        self.a = m / (beta * theta**m)
        self.b = m * theta**j / (m + j)
        self.D = _powers(r, q)[:, 1:] - self.b
        grid = np.linspace(0.0, theta, GRID_POINTS)
        self.G = _powers(grid, q)[:, 1:] - self.b
        self.q = q

    def lambdas(self, w: np.ndarray) -> np.ndarray:
        return np.concatenate([[self.a - self.b @ w], w])

    def objective(self, w: np.ndarray, mu: float) -> float:
        p = self.a + self.D @ w
        if np.any(p <= 0):
            return -math.inf
        val = float(np.sum(np.log(p)))
        if mu > 0:
            pg = self.a + self.G @ w
            if np.any(pg <= 0):
                return -math.inf
            val += mu * float(np.sum(np.log(pg)))
        return val

    def derivatives(self, w: np.ndarray, mu: float):
        p = self.a + self.D @ w
        Dp = self.D / p[:, None]
        grad = Dp.sum(axis=0)
        neg_hess = Dp.T @ Dp
        if mu > 0:
            pg = self.a + self.G @ w
            Gp = self.G / pg[:, None]
            grad = grad + mu * Gp.sum(axis=0)
            neg_hess = neg_hess + mu * (Gp.T @ Gp)
        return grad, neg_hess

    def maximize(self, w0: np.ndarray, mu: float = 0.0, max_iter: int = _MAX_ITER,
                 gtol: float = _GTOL):
        """Damped Newton ascent from a feasible start; returns ``(w, converged)``."""
        w = np.array(w0, dtype=float)
        f = self.objective(w, mu)
        if not math.isfinite(f):
            raise FitError("optimizer start is outside the positive region")
        limit = 1e12 * self.a
        for _ in range(max_iter):
            grad, neg_hess = self.derivatives(w, mu)
            if np.linalg.norm(grad) < gtol:
                return w, True
            step = np.linalg.lstsq(neg_hess, grad, rcond=None)[0]
            decrement = float(grad @ step)
            # half the decrement is the predicted ascent of a full step
            if not decrement > _DECREMENT_TOL:
                return w, True
            t = 1.0
            while True:
                w_new = w + t * step
                f_new = self.objective(w_new, mu)
                if f_new >= f + 0.25 * t * decrement:
                    break
                t *= 0.5
                if t < 1e-14:
                    # no further ascent representable in floating point
                    return w, True
            w, f = w_new, f_new
            if np.max(np.abs(self.b * w)) > limit:
                return w, False
        return w, False

    def grid_positive(self, w: np.ndarray) -> bool:
        return bool(np.all(self.a + self.G @ w > 0))


def _starts(problem: _Problem, n_starts: int, seed: int) -> list:
    """q=0 solution followed by seeded perturbations shrunk into the feasible region."""
    q = problem.q
    starts = [np.zeros(q)]
    rng = np.random.default_rng(seed)
    # perturb each term by roughly 10% of lam_0 at the outer radius
    scale = 0.1 * problem.a / np.maximum(problem.b, 1e-300)
    for _ in range(n_starts - 1):
        w = rng.standard_normal(q) * scale
        for _ in range(60):
            if problem.grid_positive(w) and math.isfinite(problem.objective(w, 0.0)):
                break
            w = 0.5 * w
        else:
            w = np.zeros(q)
        starts.append(w)
    return starts


def fit_series(sample, m: int, q: int = DEFAULT_Q, theta: float = 0.45, *,
               n_starts: int = _N_STARTS, seed: int = 0) -> SeriesCoefficients:
    """Maximum-likelihood fit of the truncated radial series.

    Maximizes ``sum_i ln(sum_j lam_j r_i**j)`` subject to the unit-integral
    constraint on ``f_Z``.  The constraint is eliminated through ``lam_0`` and
    the remaining problem, concave in ``lam_1..lam_q``, is solved by damped
    Newton ascent from ``n_starts`` feasible starts.  If the optimum turns
    negative anywhere on a 256-point grid over ``[0, theta]`` the fit is redone
    with a vanishing log-barrier on that grid.

    Parameters
    ----------
    sample : RadiusSample or array_like
        Radii in the scaled frame, all within ``[0, theta]``.
    m : int
        Dimension of the original space.
    q : int
        Truncation order, 0..8.
    theta : float
        Frame radius, in (0, 0.5).

    Returns
    -------
    SeriesCoefficients
    """
    if not isinstance(sample, RadiusSample):
        sample = RadiusSample(sample)
    ctx = dimension(m)
    theta = _check_theta(theta)
    q = _check_order(q)
    r = sample.radii
    if np.any(r > theta * (1 + 1e-12)):
        raise DomainError(f"radius {float(r.max())!r} exceeds theta={theta!r}")
    r = np.minimum(r, theta)
    if q == 0:
        return constant_series(ctx.m, theta)
    if sample.n < q + 1:
        warnings.warn(
            f"fitting a series of order {q} to only {sample.n} radii; "
            "higher coefficients are poorly determined",
            RuntimeWarning,
            stacklevel=2,
        )

    problem = _Problem(r, ctx.m, q, theta)
    best_w, best_f = None, -math.inf
    for w0 in _starts(problem, n_starts, seed):
        w, converged = problem.maximize(w0)
        f = problem.objective(w, 0.0)
        if converged and problem.grid_positive(w) and f > best_f:
            best_w, best_f = w, f

    if best_w is None:
        # the sample-only optimum dips below zero between samples
        w = np.zeros(q)
        mu = _BARRIER_MU0
        while mu >= _BARRIER_MU_MIN:
            w, _ = problem.maximize(w, mu=mu)
            mu *= 0.1
        if problem.grid_positive(w):
            best_w, best_f = w, problem.objective(w, 0.0)

    # the constant series is always feasible and never beaten by a worse fit
    base = np.zeros(q)
    if best_w is None or best_f < problem.objective(base, 0.0):
        best_w, best_f = base, problem.objective(base, 0.0)

    if not math.isfinite(best_f):
        raise FitError("no series positive at every sample radius was found")
    # an active positivity bound can round to <= 0 in coefficient form; blend
    # in a vanishing share of the constant series, which is strictly positive
    for t in (0.0, 1e-12, 1e-10, 1e-8, 1e-6):
        coeffs = SeriesCoefficients(problem.lambdas((1.0 - t) * best_w), ctx.m, theta)
        if coeffs.grid_minimum() > 0 and np.all(coeffs.radial(r) > 0):
            return coeffs
    raise FitError("fitted series is not a positive density on [0, theta]")


def density_at_origin(sample, m: int, q: int = DEFAULT_Q, theta: float = 0.45,
                      **fit_kwargs) -> DensityEstimate:
    """Fit the series and report ``lam_0`` as the density at the frame origin."""
    if not isinstance(sample, RadiusSample):
        sample = RadiusSample(sample)
    coeffs = fit_series(sample, m, q, theta, **fit_kwargs)
    return DensityEstimate(
        value=coeffs.lambda0,
        lambda0=coeffs.lambda0,
        log_likelihood=log_likelihood(coeffs, sample.radii),
        coefficients=coeffs,
    )


def fit_function_series(radii, values, m: int, q: int = DEFAULT_Q, theta: float = 0.45, *,
                        eps: float = 1e-8, max_iter: int = 100) -> np.ndarray:
    """Least-absolute-deviation fit of ``h(s_i) ~ sum_j lam_j ||s_i||**j``.

    Solved by iteratively reweighted least squares with residual floor
    ``eps``.  ``lam_0`` estimates ``h`` at the origin.  Rank-deficient designs
    (e.g. all radii equal) warn and return the minimum-norm solution.
    """
    r = np.asarray(radii, dtype=float).reshape(-1)
    h = np.asarray(values, dtype=float).reshape(-1)
    dimension(m)
    theta = _check_theta(theta)
    q = _check_order(q)
    if r.size == 0:
        raise DomainError("function-value fit needs at least one sample")
    if r.shape != h.shape:
        raise DomainError(f"{r.size} radii but {h.size} function values")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(h))):
        raise DomainError("radii and values must be finite")
    if np.any(r < 0) or np.any(r > theta * (1 + 1e-12)):
        raise DomainError(f"radii must lie in [0, theta={theta!r}]")

    X = _powers(r, q)
    if np.linalg.matrix_rank(X) < q + 1:
        warnings.warn(
            "design matrix is rank deficient; returning the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    lam = np.linalg.lstsq(X, h, rcond=None)[0]
    for _ in range(max_iter):
        resid = np.abs(h - X @ lam)
        sw = 1.0 / np.sqrt(np.maximum(resid, eps))
        lam_new = np.linalg.lstsq(X * sw[:, None], h * sw, rcond=None)[0]
        done = np.linalg.norm(lam_new - lam) <= 1e-13 * (1.0 + np.linalg.norm(lam))
        lam = lam_new
        if done:
            break
    return lam
