import math

import numpy as np
import pytest

from srde.cli.kde import KDEClassifier, gaussian_kde_density, silverman_bandwidth
from srde.data_io import SyntheticSpec, generate
from srde.errors import DomainError


def test_kernel_peak():
    assert gaussian_kde_density([[0.0]], [0.0], 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert gaussian_kde_density([[0.0]], [0.0], 1.0) == pytest.approx(0.39894, abs=1e-5)


def test_symmetric_pair_is_average():
    one = gaussian_kde_density([[0.7]], [0.0], 0.5)
    pair = gaussian_kde_density([[0.7], [-0.7]], [0.0], 0.5)
    assert pair == pytest.approx(one)


def test_product_kernel_matches_formula(rng):
    s = rng.standard_normal((7, 3))
    v = rng.standard_normal(3)
    h = np.array([0.3, 0.8, 1.1])
    expected = np.mean(np.prod(np.exp(-((v - s) ** 2) / (2 * h**2)) / (h * math.sqrt(2 * math.pi)), axis=1))
    assert gaussian_kde_density(s, v, h) == pytest.approx(expected, rel=1e-12)


def test_silverman_rule(rng):
    s = rng.standard_normal((400, 2)) * [1.0, 3.0]
    h = silverman_bandwidth(s)
    np.testing.assert_allclose(h, s.std(axis=0, ddof=1) * 400 ** (-1 / 6))


def test_gaussian_mode_auto_bandwidth():
    data, _ = generate(SyntheticSpec("gaussian", 2, 10000, 0))
    est = gaussian_kde_density(data.points, [0.0, 0.0])
    assert est == pytest.approx(1 / (2 * math.pi), rel=0.15)


@pytest.mark.parametrize("h", [0.0, -1.0, [1.0, 0.0]])
def test_bandwidth_must_be_positive(h):
    with pytest.raises(DomainError):
        gaussian_kde_density([[0.0, 0.0], [1.0, 1.0]], [0.0, 0.0], h)


def test_far_query_does_not_underflow():
    val = gaussian_kde_density([[0.0]], [100.0], 1.0)
    assert val == 0.0 or val > 0


def test_kde_classifier_separated(rng):
    a = rng.standard_normal((200, 2))
    b = rng.standard_normal((200, 2)) + 5
    clf = KDEClassifier().fit(np.vstack([a, b]), np.array(["a"] * 200 + ["b"] * 200))
    assert clf.predict([[0.0, 0.0], [5.0, 5.0]]) == ["a", "b"]
