import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srde.errors import DomainError
from srde.geometry import (
    DimensionContext,
    gamma,
    sphere_volume,
    super_radius,
    theorem1_factor,
)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (5.0, 24.0)])
def test_gamma_known_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan"), float("inf")])
def test_gamma_rejects_bad_arguments(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_gamma_half_integers_match_double_factorial():
    # Gamma(n + 1/2) = (2n)! / (4**n n!) * sqrt(pi)
    for n in range(12):
        exact = math.factorial(2 * n) / (4**n * math.factorial(n)) * math.sqrt(math.pi)
        assert gamma(n + 0.5) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize(
    "m, r, expected",
    [(2, 1.0, math.pi), (3, 1.0, 4 * math.pi / 3), (1, 0.45, 0.9)],
)
def test_sphere_volume(m, r, expected):
    assert sphere_volume(DimensionContext(m), r) == pytest.approx(expected, rel=1e-12)


def test_sphere_volume_negative_radius():
    with pytest.raises(DomainError):
        sphere_volume(DimensionContext(2), -0.1)


@pytest.mark.parametrize("m, expected", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_factor(m, expected):
    ctx = DimensionContext(m)
    assert theorem1_factor(ctx) == pytest.approx(expected, rel=1e-12)
    assert theorem1_factor(ctx) == sphere_volume(ctx, 1.0)


@pytest.mark.parametrize("m", range(1, 21))
def test_volume_coeff_times_m_is_surface_coeff(m):
    ctx = DimensionContext(m)
    assert theorem1_factor(ctx) * m == pytest.approx(ctx.surface_coeff, rel=1e-12)
    assert ctx.volume_coeff > 0 and math.isfinite(ctx.surface_coeff)


@pytest.mark.parametrize("m", [0, -2, 1.5, True])
def test_dimension_must_be_positive_integer(m):
    with pytest.raises(DomainError):
        DimensionContext(m)


def test_super_radius_examples():
    assert super_radius([0.3, 0.4], [0, 0], DimensionContext(2)) == pytest.approx(0.25)
    assert super_radius([1, 2, 3], [1, 2, 3], DimensionContext(3)) == 0.0
    assert super_radius([0.45], [0.0], DimensionContext(1)) == pytest.approx(0.45)


def test_super_radius_dimension_mismatch():
    with pytest.raises(DomainError):
        super_radius([1.0, 2.0], [0.0, 0.0, 0.0], DimensionContext(2))


@given(
    st.integers(1, 6),
    st.floats(0.0, 10.0, allow_nan=False),
    st.floats(0.0, 10.0, allow_nan=False),
)
def test_super_radius_monotone_in_distance(m, d1, d2):
    ctx = DimensionContext(m)
    origin = np.zeros(m)
    e = np.zeros(m)
    e[0] = 1.0
    z1, z2 = super_radius(d1 * e, origin, ctx), super_radius(d2 * e, origin, ctx)
    if d1 < d2:
        assert z1 <= z2
    elif d1 > d2:
        assert z1 >= z2


@pytest.mark.parametrize("m", [1, 2, 3])
def test_super_radius_density_near_zero(m):
    """Empirical density of Z = ||s||**m at 0 for uniform samples in the theta-ball."""
    theta, n = 0.4, 100_000
    rng = np.random.default_rng(2024 + m)
    g = rng.standard_normal((n, m))
    s = g / np.linalg.norm(g, axis=1)[:, None] * (theta * rng.random(n) ** (1 / m))[:, None]
    ctx = DimensionContext(m)
    z = np.linalg.norm(s, axis=1) ** m
    width = theta**m / 50
    empirical = np.count_nonzero(z <= width) / (n * width)
    expected = theorem1_factor(ctx) / sphere_volume(ctx, theta)
    assert empirical == pytest.approx(expected, rel=0.05)
