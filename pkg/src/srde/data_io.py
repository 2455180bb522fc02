"""Datasets: CSV ingestion, seeded synthetic generators and model persistence.

Synthetic data come from ``numpy.random.default_rng(seed)`` (PCG64 bit
generator, numpy's documented default).  Every family has a closed-form
density that the generator hands back as an oracle.

Draw order, per family (all normals are ``standard_normal``):

* ``uniform_ball``: an (n, m) normal block for directions, then n uniforms
  ``u``; radius ``radius * u**(1/m)``.
* ``gaussian``: an (n, m) normal block, scaled by ``sigma`` and shifted.
* ``gaussian_mixture``: n component draws via ``rng.choice(p=weights)``,
  then one (n, m) normal block.
* ``radial_linear``: an (n, m) normal block for directions, then n uniforms
  inverted through the radial CDF ``(m+1) t**m - m t**(m+1)`` by bisection.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .classifier import ClassifierModel, Hyperparams
from .core import SeriesCoefficients
from .errors import ChecksumError, DataError, ModelFormatError, VersionError
from .geometry import dimension

__all__ = [
    "Dataset",
    "FAMILIES",
    "SyntheticSpec",
    "generate",
    "load_coefficients",
    "load_csv",
    "load_model",
    "save_coefficients",
    "save_csv",
    "save_model",
]

FORMAT_VERSION = 1
_MAGIC = "SRDE-FILE"
_FOOTER = "# sha256 "


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DataError("a dataset needs a non-empty (n, m) point array")
        if not np.all(np.isfinite(pts)):
            raise DataError("dataset contains non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=str)
            if labels.shape != (pts.shape[0],):
                raise DataError(f"{labels.size} labels for {pts.shape[0]} points")
            object.__setattr__(self, "labels", labels)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != pts.shape[1]:
                raise DataError(f"{len(names)} feature names for {pts.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def subset(self, idx) -> "Dataset":
        return Dataset(self.points[idx], None if self.labels is None else self.labels[idx],
                       self.feature_names)


def load_csv(path) -> Dataset:
    """Read a headed CSV; a final column named ``label`` holds class labels."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        has_label = bool(header) and header[-1] == "label"
        n_feat = len(header) - int(has_label)
        if n_feat < 1:
            raise DataError(f"{path}: no feature columns")
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row[:n_feat]]
            except ValueError:
                raise DataError(f"{path}:{line_no}: non-numeric feature value") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"{path}:{line_no}: non-finite feature value")
            rows.append(vals)
            if has_label:
                labels.append(row[-1].strip())
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows), np.array(labels, dtype=str) if has_label else None,
                   tuple(header[:n_feat]))


def save_csv(dataset: Dataset, path) -> None:
    names = dataset.feature_names or tuple(f"x{i}" for i in range(dataset.m))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + (["label"] if dataset.labeled else []))
        for i, row in enumerate(dataset.points):
            cells = [repr(float(v)) for v in row]
            if dataset.labeled:
                cells.append(dataset.labels[i])
            w.writerow(cells)


# -- synthetic data -----------------------------------------------------------

FAMILIES = ("uniform_ball", "gaussian", "gaussian_mixture", "radial_linear")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic family.

    ``center``/``radius`` apply to ``uniform_ball`` and ``radial_linear``;
    ``mean``/``sigma`` to ``gaussian``; ``means``/``sigmas``/``weights`` to
    ``gaussian_mixture`` (whose samples are labeled by component index).
    """

    family: str
    m: int
    n: int
    seed: int = 0
    center: Optional[Sequence[float]] = None
    radius: float = 1.0
    mean: Optional[Sequence[float]] = None
    sigma: float = 1.0
    means: Optional[Sequence[Sequence[float]]] = None
    sigmas: Optional[Sequence[float]] = None
    weights: Optional[Sequence[float]] = None


def _vec(v, m, name):
    out = np.zeros(m) if v is None else np.asarray(v, dtype=float).reshape(-1)
    if out.shape != (m,):
        raise DataError(f"{name} must have {m} components")
    return out


def _directions(rng, n, m):
    g = rng.standard_normal((n, m))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    return g / norms[:, None]


class DensityOracle:
    """Exact density of a synthetic family; accepts one point or an (n, m) array."""

    def __init__(self, m, fn, description):
        self.m = m
        self._fn = fn
        self.description = description

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.m:
            raise DataError(f"oracle expects dimension {self.m}, got {x.shape[1]}")
        out = self._fn(x)
        return float(out[0]) if single else out

    def __repr__(self):
        return f"DensityOracle({self.description})"


def _gauss_pdf(x, mean, sigma):
    m = x.shape[1]
    d2 = np.sum((x - mean) ** 2, axis=1)
    return np.exp(-0.5 * d2 / sigma**2) / (2 * math.pi * sigma**2) ** (m / 2)


def _radial_linear_inverse(u, m, iters=60):
    """Solve ``(m+1) t**m - m t**(m+1) = u`` on [0, 1] by vectorized bisection."""
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = (m + 1) * mid**m - m * mid ** (m + 1) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def generate(spec: SyntheticSpec):
    """Draw a dataset from ``spec``; returns ``(Dataset, DensityOracle)``."""
    m, n = spec.m, spec.n
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DataError(f"m must be a positive integer, got {m!r}")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DataError(f"n must be a positive integer, got {n!r}")
    rng = np.random.default_rng(spec.seed)
    vol = dimension(m).volume_coeff
    beta = dimension(m).surface_coeff

    if spec.family == "uniform_ball":
        if not spec.radius > 0:
            raise DataError("ball radius must be positive")
        c, rad = _vec(spec.center, m, "center"), float(spec.radius)
        u_dir = _directions(rng, n, m)
        r = rad * rng.random(n) ** (1.0 / m)
        pts = c + u_dir * r[:, None]
        level = 1.0 / (vol * rad**m)

        def fn(x):
            return np.where(np.linalg.norm(x - c, axis=1) <= rad, level, 0.0)

        return Dataset(pts), DensityOracle(m, fn, f"uniform ball r={rad}")

    if spec.family == "radial_linear":
        if not spec.radius > 0:
            raise DataError("ball radius must be positive")
        c, rad = _vec(spec.center, m, "center"), float(spec.radius)
        u_dir = _directions(rng, n, m)
        t = _radial_linear_inverse(rng.random(n), m)
        pts = c + u_dir * (rad * t)[:, None]
        peak = m * (m + 1) / (beta * rad**m)

        def fn(x):
            r = np.linalg.norm(x - c, axis=1)
            return np.where(r <= rad, peak * (1.0 - r / rad), 0.0)

        return Dataset(pts), DensityOracle(m, fn, f"radial linear r={rad}")

    if spec.family == "gaussian":
        if not spec.sigma > 0:
            raise DataError("sigma must be positive")
        mu, s = _vec(spec.mean, m, "mean"), float(spec.sigma)
        pts = mu + s * rng.standard_normal((n, m))
        return Dataset(pts), DensityOracle(m, lambda x: _gauss_pdf(x, mu, s), f"gaussian sigma={s}")

    if spec.family == "gaussian_mixture":
        if spec.means is None:
            raise DataError("a mixture needs component means")
        means = np.asarray(spec.means, dtype=float)
        if means.ndim != 2 or means.shape[1] != m:
            raise DataError(f"means must be a (components, {m}) array")
        kc = means.shape[0]
        sigmas = np.ones(kc) if spec.sigmas is None else np.asarray(spec.sigmas, dtype=float)
        weights = np.full(kc, 1.0 / kc) if spec.weights is None else np.asarray(spec.weights, dtype=float)
        if sigmas.shape != (kc,) or np.any(sigmas <= 0):
            raise DataError("need one positive sigma per component")
        if weights.shape != (kc,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise DataError("mixture weights must be non-negative and sum to 1")
        comp = rng.choice(kc, size=n, p=weights)
        pts = means[comp] + sigmas[comp, None] * rng.standard_normal((n, m))

        def fn(x):
            return sum(w * _gauss_pdf(x, mu, s) for w, mu, s in zip(weights, means, sigmas))

        labels = np.array([str(c) for c in comp], dtype=str)
        return Dataset(pts, labels), DensityOracle(m, fn, f"gaussian mixture of {kc}")

    raise DataError(f"unknown family {spec.family!r}; expected one of {FAMILIES}")


# -- persistence ----------------------------------------------------------------

def _dump(kind: str, payload: dict) -> str:
    body = json.dumps(payload, indent=1, sort_keys=True)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return f"{_MAGIC} {kind} {FORMAT_VERSION}\n{body}\n{_FOOTER}{digest}\n"


def _load(path, kind: str) -> dict:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    header, _, rest = text.partition("\n")
    parts = header.split()
    if len(parts) != 3 or parts[0] != _MAGIC or parts[1] != kind:
        raise ModelFormatError(f"{path}: not an srde {kind} file")
    if parts[2] != str(FORMAT_VERSION):
        raise VersionError(f"{path}: format version {parts[2]!r}, this build reads {FORMAT_VERSION}")
    body, sep, footer = rest.rstrip("\n").rpartition("\n")
    if not sep or not footer.startswith(_FOOTER):
        raise ChecksumError(f"{path}: missing checksum footer (file truncated?)")
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != footer[len(_FOOTER):].strip():
        raise ChecksumError(f"{path}: checksum mismatch")
    return json.loads(body)


def save_model(model: ClassifierModel, path) -> None:
    """Write a versioned, checksummed JSON model file."""
    hp = model.hyperparams
    payload = {
        "classes": list(model.classes),
        "class_points": {c: np.asarray(model.class_points[c]).tolist() for c in model.classes},
        "global_shift": np.asarray(model.global_shift).tolist(),
        "global_scale": model.global_scale,
        "hyperparams": {"k": hp.k, "q": hp.q, "theta": hp.theta},
        "m": model.m,
        "search": model.search,
    }
    Path(path).write_text(_dump("model", payload), encoding="utf-8")


def load_model(path) -> ClassifierModel:
    d = _load(path, "model")
    try:
        return ClassifierModel(
            classes=list(d["classes"]),
            class_points={c: np.asarray(d["class_points"][c], dtype=float) for c in d["classes"]},
            global_shift=np.asarray(d["global_shift"], dtype=float),
            global_scale=float(d["global_scale"]),
            hyperparams=Hyperparams(**d["hyperparams"]),
            m=int(d["m"]),
            search=d.get("search", "brute"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed model payload ({exc})") from exc


def save_coefficients(coeffs: SeriesCoefficients, path) -> None:
    Path(path).write_text(_dump("coefficients", coeffs.to_dict()), encoding="utf-8")


def load_coefficients(path) -> SeriesCoefficients:
    d = _load(path, "coefficients")
    try:
        return SeriesCoefficients.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed coefficient payload ({exc})") from exc
