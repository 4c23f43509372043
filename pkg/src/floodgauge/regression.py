"""Regression families mapping entropy deviation to attack strength.

Five model families are supported, each predicting strength Y from
deviation X:

    linear        Y = b0 + b1*X
    polynomial    Y = b0 + b1*X + ... + bd*X^d
    logarithmic   Y = b0*ln(X) + b1
    power         Y = b0 * X^b1
    exponential   Y = b0 * exp(b1*X)

Linear, polynomial and logarithmic models are fit by ordinary least
squares on the raw responses. Power and exponential models are fit by
OLS on log-transformed responses and back-transformed, so their
coefficients minimise squared error in log space, not in the original
units. The fit_method field records which route produced a model.
"""

from __future__ import annotations

import datetime
import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateDataError, DomainError, InputError
from .fileio import read_json, write_json
from .metrics import ResidualSeries

MODEL_FAMILIES = ("linear", "polynomial", "logarithmic", "power", "exponential")

DEFAULT_POLY_DEGREE = 2
MAX_POLY_DEGREE = 6

RAW_OLS = "raw_ols"
LOG_LINEARIZED = "log_linearized"


@dataclass(frozen=True)
class ModelKind:
    """A family tag plus, for polynomials, the degree."""

    tag: str
    degree: int | None = None

    def __post_init__(self) -> None:
        if self.tag not in MODEL_FAMILIES:
            raise InputError(
                f"unknown model family {self.tag!r}, expected one of {MODEL_FAMILIES}"
            )
        if self.tag == "polynomial":
            if self.degree is None:
                object.__setattr__(self, "degree", DEFAULT_POLY_DEGREE)
            elif not 1 <= self.degree <= MAX_POLY_DEGREE:
                raise InputError(
                    f"polynomial degree must be in 1..{MAX_POLY_DEGREE}, got {self.degree}"
                )
        elif self.degree is not None:
            raise InputError(f"degree only applies to polynomial, not {self.tag}")


@dataclass(frozen=True)
class CalibrationSample:
    """One (deviation, strength) pair."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.x) or not math.isfinite(self.y):
            raise InputError(f"calibration sample must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class CalibrationDataset:
    """Ordered calibration samples; at least two are required."""

    samples: tuple[CalibrationSample, ...]

    def __post_init__(self) -> None:
        if len(self.samples) < 2:
            raise InputError(
                f"calibration needs >= 2 samples, got {len(self.samples)}"
            )

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "CalibrationDataset":
        return cls(tuple(CalibrationSample(float(x), float(y)) for x, y in pairs))

    @property
    def xs(self) -> list[float]:
        return [s.x for s in self.samples]

    @property
    def ys(self) -> list[float]:
        return [s.y for s in self.samples]

    def digest(self) -> str:
        text = "\n".join(f"{s.x!r},{s.y!r}" for s in self.samples)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class FittedModel:
    """Coefficients of one fitted family, b0 first."""

    kind: ModelKind
    coefficients: tuple[float, ...]
    fit_method: str
    trained_on: str
    condition_number: float | None = None


def _simple_ols(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Closed-form least squares of y on x: (intercept, slope)."""
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    sxx = math.fsum((x - mean_x) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateDataError("all x values are equal")
    sxy = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return mean_y - slope * mean_x, slope


def _require_positive(values: Sequence[float], axis: str, family: str) -> None:
    for i, v in enumerate(values):
        if v <= 0:
            raise DomainError(
                f"{family} fit needs {axis} > 0, got {axis}={v!r} at sample {i}"
            )


def _fit_polynomial(data: CalibrationDataset, degree: int) -> tuple[tuple[float, ...], float]:
    xs = np.asarray(data.xs, dtype=float)
    ys = np.asarray(data.ys, dtype=float)
    if len(set(data.xs)) < degree + 1:
        raise DegenerateDataError(
            f"polynomial degree {degree} needs >= {degree + 1} distinct x values"
        )
    # center and scale before building the Vandermonde basis; raw powers
    # of nearby x values make the normal equations needlessly ill-conditioned
    mu = float(xs.mean())
    sigma = float(xs.std())
    z = (xs - mu) / sigma
    v = np.vander(z, degree + 1, increasing=True)
    condition = float(np.linalg.cond(v))
    q, r = np.linalg.qr(v)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * 1e-13:
        raise DegenerateDataError(
            f"polynomial basis is rank deficient for degree {degree}"
        )
    beta_z = np.linalg.solve(r, q.T @ ys)
    # rewrite p(z) with z = (x - mu)/sigma as a polynomial in raw x
    sub = np.array([-mu / sigma, 1.0 / sigma])
    coeffs = np.array([beta_z[degree]])
    for k in range(degree - 1, -1, -1):
        coeffs = npoly.polyadd(npoly.polymul(coeffs, sub), np.array([beta_z[k]]))
    return tuple(float(c) for c in coeffs), condition


def fit(data: CalibrationDataset, kind: ModelKind) -> FittedModel:
    """Fit one family to the calibration data.

    Raises DomainError when a sample lies outside the family's domain
    (x <= 0 for logarithmic and power, y <= 0 for power and exponential)
    and DegenerateDataError when the data cannot pin the coefficients
    down.
    """
    xs = data.xs
    ys = data.ys
    digest = data.digest()
    if kind.tag == "linear":
        b0, b1 = _simple_ols(xs, ys)
        return FittedModel(kind, (b0, b1), RAW_OLS, digest)
    if kind.tag == "polynomial":
        coeffs, condition = _fit_polynomial(data, kind.degree)
        return FittedModel(kind, coeffs, RAW_OLS, digest, condition_number=condition)
    if kind.tag == "logarithmic":
        _require_positive(xs, "x", "logarithmic")
        intercept, slope = _simple_ols([math.log(x) for x in xs], ys)
        return FittedModel(kind, (slope, intercept), RAW_OLS, digest)
    if kind.tag == "power":
        _require_positive(xs, "x", "power")
        _require_positive(ys, "y", "power")
        intercept, slope = _simple_ols(
            [math.log(x) for x in xs], [math.log(y) for y in ys]
        )
        return FittedModel(kind, (math.exp(intercept), slope), LOG_LINEARIZED, digest)
    if kind.tag == "exponential":
        _require_positive(ys, "y", "exponential")
        intercept, slope = _simple_ols(xs, [math.log(y) for y in ys])
        return FittedModel(kind, (math.exp(intercept), slope), LOG_LINEARIZED, digest)
    raise InputError(f"unknown model family {kind.tag!r}")


def predict(model: FittedModel, x: float) -> float:
    """Evaluate the model at one deviation value."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"prediction input must be finite, got {x!r}")
    c = model.coefficients
    tag = model.kind.tag
    if tag == "linear":
        return c[0] + c[1] * x
    if tag == "polynomial":
        acc = 0.0
        for coef in reversed(c):
            acc = acc * x + coef
        return acc
    if tag == "logarithmic":
        if x <= 0:
            raise DomainError(f"logarithmic model needs x > 0, got {x!r}")
        return c[0] * math.log(x) + c[1]
    if tag == "power":
        if x <= 0:
            raise DomainError(f"power model needs x > 0, got {x!r}")
        return c[0] * x ** c[1]
    if tag == "exponential":
        return c[0] * math.exp(c[1] * x)
    raise InputError(f"unknown model family {tag!r}")


def predict_many(model: FittedModel, xs: Sequence[float]) -> list[float]:
    return [predict(model, x) for x in xs]


def residuals(model: FittedModel, data: CalibrationDataset) -> ResidualSeries:
    """Residuals over the dataset, predicted minus observed."""
    return ResidualSeries.from_values(
        [predict(model, s.x) - s.y for s in data.samples]
    )


def save_model(path, model: FittedModel) -> None:
    """Write the model as JSON; floats keep full round-trip precision."""
    write_json(
        path,
        {
            "kind": model.kind.tag,
            "degree": model.kind.degree,
            "coefficients": list(model.coefficients),
            "fit_method": model.fit_method,
            "trained_on": model.trained_on,
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    )


def load_model(path) -> FittedModel:
    obj = read_json(path)
    try:
        kind = ModelKind(obj["kind"], obj.get("degree"))
        coefficients = tuple(float(c) for c in obj["coefficients"])
        fit_method = obj["fit_method"]
        trained_on = obj["trained_on"]
    except (KeyError, TypeError, ValueError, InputError) as exc:
        raise InputError(f"{path}: malformed model file: {exc}") from exc
    if fit_method not in (RAW_OLS, LOG_LINEARIZED):
        raise InputError(f"{path}: unknown fit_method {fit_method!r}")
    expected = (kind.degree + 1) if kind.tag == "polynomial" else 2
    if len(coefficients) != expected:
        raise InputError(
            f"{path}: {kind.tag} model needs {expected} coefficients, "
            f"got {len(coefficients)}"
        )
    return FittedModel(kind, coefficients, fit_method, trained_on)
