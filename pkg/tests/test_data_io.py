import hashlib
import math

import numpy as np
import pytest

from conftest import two_gaussians
from srde.classifier import Hyperparams, likelihoods, train
from srde.core import SeriesCoefficients
from srde.data_io import (
    FAMILIES,
    Dataset,
    SyntheticSpec,
    generate,
    load_coefficients,
    load_csv,
    load_model,
    save_coefficients,
    save_csv,
    save_model,
)
from srde.errors import ChecksumError, DataError, ModelFormatError, VersionError


# -- CSV ------------------------------------------------------------------------


def test_load_csv_labeled(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,label\n0,0,a\n1,1,b")
    d = load_csv(p)
    assert (d.n, d.m) == (2, 2)
    assert d.labels.tolist() == ["a", "b"]
    assert d.feature_names == ("x", "y") or list(d.feature_names) == ["x", "y"]


def test_load_csv_unlabeled(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y\n0,0\n1,2.5\n")
    d = load_csv(p)
    assert not d.labeled and d.points[1, 1] == 2.5


@pytest.mark.parametrize(
    "body, where",
    [("x,label\n1,a\nNaN,b\n", r"bad\.csv:3:"), ("x,label\n1,a\nfoo,b\n", r"bad\.csv:3:"),
     ("x,y\n1,2\n3\n", r"bad\.csv:3:"), ("x,y\n1,2\ninf,0\n", r"bad\.csv:3:")],
)
def test_load_csv_rejects_bad_rows(tmp_path, body, where):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=where):
        load_csv(p)


def test_load_csv_missing_and_empty(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")
    p = tmp_path / "empty.csv"
    p.write_text("x,y\n")
    with pytest.raises(DataError):
        load_csv(p)


def test_csv_round_trip_is_exact(tmp_path, rng):
    d = Dataset(rng.standard_normal((50, 3)), np.array(["u", "v"] * 25))
    save_csv(d, tmp_path / "r.csv")
    back = load_csv(tmp_path / "r.csv")
    np.testing.assert_array_equal(back.points, d.points)
    np.testing.assert_array_equal(back.labels, d.labels)


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.array([[0.0, np.nan]]))
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 2)), np.array(["a", "b"]))


# -- generators -------------------------------------------------------------------


SPECS = [
    SyntheticSpec("uniform_ball", 2, 1000, 4, radius=0.4),
    SyntheticSpec("gaussian", 3, 1000, 4, mean=[1.0, 2.0, 3.0], sigma=0.5),
    SyntheticSpec("gaussian_mixture", 2, 1000, 4, means=[[0, 0], [4, 1]], sigmas=[1.0, 0.5],
                  weights=[0.3, 0.7]),
    SyntheticSpec("radial_linear", 2, 1000, 4, radius=2.0),
]


@pytest.mark.parametrize("spec", SPECS, ids=FAMILIES)
def test_generate_is_byte_identical(spec, tmp_path):
    a, _ = generate(spec)
    b, _ = generate(spec)
    save_csv(a, tmp_path / "a.csv")
    save_csv(b, tmp_path / "b.csv")
    ha = hashlib.sha256((tmp_path / "a.csv").read_bytes()).hexdigest()
    hb = hashlib.sha256((tmp_path / "b.csv").read_bytes()).hexdigest()
    assert ha == hb


def test_generate_seed_changes_data():
    a, _ = generate(SyntheticSpec("gaussian", 2, 10, 0))
    b, _ = generate(SyntheticSpec("gaussian", 2, 10, 1))
    assert not np.array_equal(a.points, b.points)


def test_uniform_ball_oracle():
    data, oracle = generate(SyntheticSpec("uniform_ball", 2, 500, 0, radius=0.4))
    assert oracle([0.1, -0.2]) == pytest.approx(1 / (math.pi * 0.16))
    assert oracle([0.5, 0.0]) == 0.0
    assert np.all(np.linalg.norm(data.points, axis=1) <= 0.4)


def test_gaussian_oracle_mode():
    _, oracle = generate(SyntheticSpec("gaussian", 2, 10, 0))
    assert oracle([0.0, 0.0]) == pytest.approx(1 / (2 * math.pi))


def test_mixture_oracle_is_component_average(rng):
    means = [[0.0, 0.0], [3.0, -1.0]]
    _, mix = generate(SyntheticSpec("gaussian_mixture", 2, 10, 0, means=means, weights=[0.5, 0.5]))
    _, g0 = generate(SyntheticSpec("gaussian", 2, 10, 0, mean=means[0]))
    _, g1 = generate(SyntheticSpec("gaussian", 2, 10, 0, mean=means[1]))
    x = rng.uniform(-3, 5, size=(100, 2))
    np.testing.assert_allclose(mix(x), 0.5 * (g0(x) + g1(x)), rtol=1e-14)


def test_mixture_labels_are_component_indices():
    data, _ = generate(SyntheticSpec("gaussian_mixture", 1, 200, 0, means=[[0.0], [100.0]]))
    assert set(data.labels.tolist()) == {"0", "1"}
    assert np.all((data.points[:, 0] > 50) == (data.labels == "1"))


@pytest.mark.parametrize(
    "spec",
    [
        SyntheticSpec("gaussian", 2, 10, 0, sigma=0.0),
        SyntheticSpec("gaussian_mixture", 2, 10, 0, means=[[0, 0], [1, 1]], weights=[0.5, 0.6]),
        SyntheticSpec("gaussian_mixture", 2, 10, 0, means=[[0, 0], [1, 1]], sigmas=[1.0, -1.0]),
        SyntheticSpec("uniform_ball", 2, 10, 0, radius=-1.0),
        SyntheticSpec("gaussian", 0, 10, 0),
        SyntheticSpec("poisson", 2, 10, 0),
    ],
)
def test_generate_rejects_bad_parameters(spec):
    with pytest.raises(DataError):
        generate(spec)


@pytest.mark.parametrize("spec", SPECS, ids=FAMILIES)
def test_oracle_integrates_to_one(spec):
    _, oracle = generate(spec)
    data, _ = generate(SyntheticSpec(**{**spec.__dict__, "n": 5000}))
    lo = data.points.min(axis=0) - 0.5
    hi = data.points.max(axis=0) + 0.5
    rng = np.random.default_rng(123)
    x = lo + (hi - lo) * rng.random((1_000_000, spec.m))
    integral = float(np.prod(hi - lo) * oracle(x).mean())
    assert integral == pytest.approx(1.0, rel=0.02)


def test_radial_linear_radii_follow_cdf():
    data, _ = generate(SyntheticSpec("radial_linear", 2, 20000, 0, radius=1.0))
    t = np.linalg.norm(data.points, axis=1)
    for x in (0.25, 0.5, 0.75):
        assert np.mean(t <= x) == pytest.approx(3 * x**2 - 2 * x**3, abs=0.015)


# -- persistence ------------------------------------------------------------------


@pytest.fixture
def model():
    x, y = two_gaussians(60, seed=2, means=((0.0, 0.0), (2.0, 1.0)))
    return train(x, y, Hyperparams(10, 2, 0.4))


def test_model_round_trip(model, tmp_path, rng):
    path = tmp_path / "m.srde"
    save_model(model, path)
    back = load_model(path)
    assert back.hyperparams == model.hyperparams
    assert back.global_scale == model.global_scale
    np.testing.assert_array_equal(back.global_shift, model.global_shift)
    for q in rng.uniform(-2, 4, size=(100, 2)):
        a, b = likelihoods(model, q), likelihoods(back, q)
        assert a.predicted == b.predicted
        np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-12)


def test_model_version_mismatch(model, tmp_path):
    path = tmp_path / "m.srde"
    save_model(model, path)
    text = path.read_text()
    path.write_text(text.replace("SRDE-FILE model 1", "SRDE-FILE model 2", 1))
    with pytest.raises(VersionError):
        load_model(path)


def test_model_truncated(model, tmp_path):
    path = tmp_path / "m.srde"
    save_model(model, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ChecksumError):
        load_model(path)


def test_model_tampered_body(model, tmp_path):
    path = tmp_path / "m.srde"
    save_model(model, path)
    path.write_text(path.read_text().replace('"k": 10', '"k": 11'))
    with pytest.raises(ChecksumError):
        load_model(path)


def test_model_wrong_kind(tmp_path):
    path = tmp_path / "c.srde"
    save_coefficients(SeriesCoefficients([1.0, 0.1], 2, 0.4), path)
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_coefficients_round_trip(tmp_path):
    c = SeriesCoefficients([2.0, -0.5, 0.125], 3, 0.45)
    save_coefficients(c, tmp_path / "c.srde")
    back = load_coefficients(tmp_path / "c.srde")
    np.testing.assert_array_equal(back.lambdas, c.lambdas)
    assert (back.m, back.theta) == (3, 0.45)
