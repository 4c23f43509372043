"""Reference calibration sweep and its published metric summary.

The package ships the calibration measurements of a 400-client,
100-zombie flooding testbed swept over aggregate attack strengths of
10 to 100 Mbps in 5 Mbps steps, together with the metric summary
published for the five model families on that sweep. Refitting the
families to the sweep must land within tolerance of the published
numbers; the reproduce-table2 command automates exactly that check.

The published summary carries one NMSE column, which corresponds to
the ``nmse_table2`` variant (mean squared error over the sample
standard deviation of the observed strengths).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .pipeline import ModelComparisonReport, compare_models
from .regression import DEFAULT_POLY_DEGREE, CalibrationDataset

REFERENCE_STRENGTHS_MBPS = tuple(float(v) for v in range(10, 101, 5))

REFERENCE_DEVIATIONS = (
    0.149,
    0.169,
    0.184,
    0.192,
    0.199,
    0.197,
    0.195,
    0.195,
    0.208,
    0.212,
    0.233,
    0.241,
    0.244,
    0.253,
    0.279,
    0.280,
    0.299,
    0.296,
    0.319,
)

EXPECTED_BEST_FAMILY = "polynomial"

# published per-family summary; keys match FitReport field names
REFERENCE_SUMMARY: dict[str, dict[str, float]] = {
    "linear": {
        "r_squared": 0.95,
        "cc": 0.97,
        "sse": 708.13,
        "mse": 37.27,
        "rmse": 6.10,
        "nmse_table2": 1.32,
        "eta": 0.95,
        "mae_index": 0.78,
    },
    "polynomial": {
        "r_squared": 0.96,
        "cc": 0.98,
        "sse": 566.31,
        "mse": 29.81,
        "rmse": 5.46,
        "nmse_table2": 1.06,
        "eta": 0.96,
        "mae_index": 0.81,
    },
    "logarithmic": {
        "r_squared": 0.96,
        "cc": 0.98,
        "sse": 596.96,
        "mse": 31.42,
        "rmse": 5.61,
        "nmse_table2": 1.12,
        "eta": 0.96,
        "mae_index": 0.80,
    },
    "power": {
        "r_squared": 0.89,
        "cc": 0.94,
        "sse": 2643.90,
        "mse": 139.15,
        "rmse": 11.80,
        "nmse_table2": 4.95,
        "eta": 0.81,
        "mae_index": 0.59,
    },
    "exponential": {
        "r_squared": 0.84,
        "cc": 0.92,
        "sse": 3995.70,
        "mse": 210.30,
        "rmse": 14.50,
        "nmse_table2": 7.47,
        "eta": 0.72,
        "mae_index": 0.51,
    },
}

SUMMARY_METRICS = (
    "r_squared",
    "cc",
    "sse",
    "mse",
    "rmse",
    "nmse_table2",
    "eta",
    "mae_index",
)

# published values are rounded; squared-error magnitudes get a relative
# band, bounded indices an absolute one
_RELATIVE_TOLERANCE = {"sse": 0.05, "mse": 0.05, "rmse": 0.05}
_ABSOLUTE_TOLERANCE = {
    "r_squared": 0.01,
    "cc": 0.01,
    "mae_index": 0.01,
    "nmse_table2": 0.05,
    "eta": 0.01,
}
_ETA_WIDE_FAMILIES = ("power", "exponential")
_ETA_WIDE_TOLERANCE = 0.02


def reference_dataset() -> CalibrationDataset:
    """The bundled sweep as a ready-to-fit calibration dataset."""
    return CalibrationDataset.from_pairs(
        zip(REFERENCE_DEVIATIONS, REFERENCE_STRENGTHS_MBPS)
    )


def tolerance_for(family: str, metric: str) -> tuple[str, float]:
    """Tolerance kind ("abs" or "rel") and width for one summary cell."""
    if metric in _RELATIVE_TOLERANCE:
        return "rel", _RELATIVE_TOLERANCE[metric]
    if metric == "eta" and family in _ETA_WIDE_FAMILIES:
        return "abs", _ETA_WIDE_TOLERANCE
    return "abs", _ABSOLUTE_TOLERANCE[metric]


@dataclass(frozen=True)
class MetricCheck:
    """Comparison of one computed summary cell against its published value."""

    family: str
    metric: str
    computed: float
    published: float
    tolerance_kind: str
    tolerance: float
    ok: bool


@dataclass(frozen=True)
class ReproductionResult:
    """Outcome of refitting the families to the reference sweep."""

    checks: tuple[MetricCheck, ...]
    comparison: ModelComparisonReport
    expected_best: str
    best_ok: bool

    @property
    def ok(self) -> bool:
        return self.best_ok and all(c.ok for c in self.checks)


def _check_cell(family: str, metric: str, computed: float) -> MetricCheck:
    published = REFERENCE_SUMMARY[family][metric]
    kind, tol = tolerance_for(family, metric)
    if math.isnan(computed):
        ok = False
    elif kind == "rel":
        ok = abs(computed - published) <= tol * abs(published)
    else:
        ok = abs(computed - published) <= tol
    return MetricCheck(family, metric, computed, published, kind, tol, ok)


def check_reference_reproduction(
    degree: int = DEFAULT_POLY_DEGREE, criterion: str = "eta"
) -> ReproductionResult:
    """Refit all families to the bundled sweep and compare to the summary.

    Every family/metric cell is checked at its tolerance, and the family
    ranked best by the criterion must match the published winner.
    """
    comparison = compare_models(reference_dataset(), degree=degree, criterion=criterion)
    checks: list[MetricCheck] = []
    for family in REFERENCE_SUMMARY:
        if family not in comparison.reports:
            reason = comparison.skipped.get(family, "not fitted")
            raise AssertionError(
                f"reference sweep must fit every family, {family} skipped: {reason}"
            )
        report = comparison.reports[family]
        for metric in SUMMARY_METRICS:
            checks.append(_check_cell(family, metric, getattr(report, metric)))
    return ReproductionResult(
        checks=tuple(checks),
        comparison=comparison,
        expected_best=EXPECTED_BEST_FAMILY,
        best_ok=comparison.best_model.tag == EXPECTED_BEST_FAMILY,
    )
