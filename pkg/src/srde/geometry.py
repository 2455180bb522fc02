"""Sphere constants in m dimensions and the super-radius transform.

The unit-ball volume ``pi**(m/2) / Gamma(m/2 + 1)`` is the constant that links
the density of the super-radius ``Z = ||s||**m`` at zero to the density of the
sample itself at the origin::

    f_Z(0) = V_m(1) * f_X(0)

and ``beta = 2 pi**(m/2) / Gamma(m/2)`` is the matching surface-area
coefficient (``beta * r**(m-1)`` is the area of the radius-r sphere).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "DimensionContext",
    "dimension",
    "gamma",
    "sphere_volume",
    "super_radius",
    "theorem1_factor",
    "unit_ball_volume",
]


def gamma(x: float) -> float:
    """Gamma function for positive real arguments."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"gamma is only defined here for finite x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class DimensionContext:
    """Precomputed sphere coefficients for an m-dimensional space.

    Attributes
    ----------
    m : int
        Dimension of the vector space.
    volume_coeff : float
        Volume of the unit ball, ``pi**(m/2) / Gamma(m/2 + 1)``.
    surface_coeff : float
        ``beta = 2 pi**(m/2) / Gamma(m/2)``; equals ``m * volume_coeff``.
    """

    m: int
    volume_coeff: float = field(init=False)
    surface_coeff: float = field(init=False)

    def __post_init__(self):
        m = self.m
        if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
            raise DomainError(f"dimension must be a positive integer, got {m!r}")
        object.__setattr__(self, "m", int(m))
        half_pow = math.pi ** (m / 2.0)
        object.__setattr__(self, "volume_coeff", half_pow / gamma(m / 2.0 + 1.0))
        object.__setattr__(self, "surface_coeff", 2.0 * half_pow / gamma(m / 2.0))

    @property
    def beta(self) -> float:
        return self.surface_coeff


@lru_cache(maxsize=64)
def dimension(m: int) -> DimensionContext:
    """Cached :class:`DimensionContext` for dimension ``m``."""
    return DimensionContext(m)


def sphere_volume(ctx: DimensionContext, r: float) -> float:
    """Volume of the m-ball of radius ``r``."""
    if not r >= 0:
        raise DomainError(f"radius must be non-negative, got {r!r}")
    return ctx.volume_coeff * float(r) ** ctx.m


def unit_ball_volume(m: int) -> float:
    return dimension(m).volume_coeff


def theorem1_factor(ctx: DimensionContext) -> float:
    """Ratio ``f_Z(0) / f_X(0)``, i.e. the unit-ball volume."""
    return ctx.volume_coeff


def super_radius(s, origin, ctx: DimensionContext) -> float:
    """``||s - origin|| ** m``."""
    s = np.asarray(s, dtype=float).reshape(-1)
    origin = np.asarray(origin, dtype=float).reshape(-1)
    if s.shape != (ctx.m,) or origin.shape != (ctx.m,):
        raise DomainError(
            f"expected points of dimension {ctx.m}, got {s.shape[0]} and {origin.shape[0]}"
        )
    return float(np.linalg.norm(s - origin)) ** ctx.m
