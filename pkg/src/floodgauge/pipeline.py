"""End-to-end flows: calibrate from labeled runs, compare, estimate.

Calibration condenses each labeled run (a known aggregate attack
strength) into one (deviation, strength) sample by averaging the
deviation over the run's flagged windows. Estimation applies a fitted
model to fresh detection events, clamping negative predictions to zero.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .detector import Baseline, DetectionEvent, evaluate_windows
from .entropy_core import compute_entropy, windowize
from .errors import (
    ConfigError,
    DegenerateDataError,
    DomainError,
    EmptyRunError,
    InputError,
)
from .fileio import atomic_write_text, format_float
from .metrics import (
    REPORT_CSV_HEADER,
    FitReport,
    evaluate,
    report_csv_row,
    report_to_dict,
)
from .regression import (
    MODEL_FAMILIES,
    CalibrationDataset,
    CalibrationSample,
    FittedModel,
    ModelKind,
    fit,
    predict,
)
from .traffic_sim import FlowRecordSeries

logger = logging.getLogger("floodgauge.pipeline")

CALIBRATION_CSV_HEADER = ("deviation", "strength_mbps")
ESTIMATES_CSV_HEADER = ("window_index", "deviation", "estimate_mbps", "clamped")

SELECTION_CRITERIA = ("eta", "r_squared", "sse")


@dataclass(frozen=True)
class StrengthEstimate:
    """Estimated aggregate attack strength for one flagged window."""

    window_index: int
    deviation: float
    estimated_strength_mbps: float
    clamped: bool


@dataclass(frozen=True)
class ModelComparisonReport:
    """Per-family fits and metrics plus the winning family."""

    reports: Mapping[str, FitReport]
    fitted: Mapping[str, FittedModel]
    skipped: Mapping[str, str]
    best_model: ModelKind
    selection_criterion: str


def run_events(
    series: FlowRecordSeries,
    baseline: Baseline,
    window_length_ms: float | None = None,
) -> list[DetectionEvent]:
    """Windowize a run, compute entropies, and score every window."""
    if window_length_ms is None:
        window_length_ms = series.window_length_ms
    windows = windowize(series.records, window_length_ms)
    if not windows:
        raise EmptyRunError("run contains no windows")
    entropies = [compute_entropy(w) for w in windows]
    return evaluate_windows(entropies, baseline)


def calibrate(
    labeled_runs: Sequence[tuple[float, FlowRecordSeries]],
    baseline: Baseline,
    window_length_ms: float | None = None,
) -> CalibrationDataset:
    """Build (deviation, strength) samples from labeled attack runs.

    Each run's deviation is the mean over its flagged windows; a run
    with no flagged window cannot contribute a sample and aborts the
    calibration. Samples come back sorted by strength.
    """
    samples = []
    for strength, series in labeled_runs:
        events = run_events(series, baseline, window_length_ms)
        flagged = [e.deviation for e in events if e.attack_flag]
        if not flagged:
            raise EmptyRunError(
                f"run at {strength} Mbps produced no flagged windows"
            )
        deviation = math.fsum(flagged) / len(flagged)
        samples.append(CalibrationSample(deviation, float(strength)))
    if not samples:
        raise EmptyRunError("calibration received no runs")
    samples.sort(key=lambda s: s.y)
    return CalibrationDataset(tuple(samples))


def _score(report: FitReport, criterion: str) -> float:
    value = getattr(report, {"r_squared": "r_squared", "eta": "eta", "sse": "sse"}[criterion])
    if math.isnan(value):
        return math.inf if criterion == "sse" else -math.inf
    return value


def compare_models(
    data: CalibrationDataset,
    degree: int | None = None,
    criterion: str = "eta",
) -> ModelComparisonReport:
    """Fit every family to the same data and rank them.

    Families whose domain the data violates are skipped with the reason
    recorded rather than failing the whole comparison. Ranking uses the
    chosen criterion (eta or r_squared maximised, sse minimised); ties
    keep the earlier family in MODEL_FAMILIES order.
    """
    if criterion not in SELECTION_CRITERIA:
        raise ConfigError(
            f"criterion must be one of {SELECTION_CRITERIA}, got {criterion!r}"
        )
    reports: dict[str, FitReport] = {}
    fitted: dict[str, FittedModel] = {}
    skipped: dict[str, str] = {}
    for tag in MODEL_FAMILIES:
        kind = ModelKind(tag, degree if tag == "polynomial" else None)
        try:
            model = fit(data, kind)
        except (DomainError, DegenerateDataError) as exc:
            skipped[tag] = str(exc)
            continue
        fitted[tag] = model
        reports[tag] = evaluate(data.ys, [predict(model, x) for x in data.xs])
    if not fitted:
        raise DegenerateDataError(
            "no model family could be fit: "
            + "; ".join(f"{tag}: {reason}" for tag, reason in skipped.items())
        )
    best_tag = None
    best_score = None
    for tag in MODEL_FAMILIES:
        if tag not in reports:
            continue
        score = _score(reports[tag], criterion)
        if best_tag is None:
            best_tag, best_score = tag, score
        elif criterion == "sse":
            if score < best_score:
                best_tag, best_score = tag, score
        elif score > best_score:
            best_tag, best_score = tag, score
    return ModelComparisonReport(
        reports=reports,
        fitted=fitted,
        skipped=skipped,
        best_model=fitted[best_tag].kind,
        selection_criterion=criterion,
    )


def estimate_strength(
    model: FittedModel, events: Sequence[DetectionEvent]
) -> list[StrengthEstimate]:
    """Estimate strength for every flagged event.

    Windows the model cannot evaluate (deviation outside its domain) are
    skipped with a warning. Negative predictions clamp to zero and are
    marked clamped.
    """
    estimates: list[StrengthEstimate] = []
    for event in events:
        if not event.attack_flag:
            continue
        try:
            raw = predict(model, event.deviation)
        except DomainError as exc:
            logger.warning(
                "window %d skipped: %s", event.window_index, exc
            )
            continue
        if raw < 0:
            estimates.append(
                StrengthEstimate(event.window_index, event.deviation, 0.0, True)
            )
        else:
            estimates.append(
                StrengthEstimate(event.window_index, event.deviation, raw, False)
            )
    return estimates


def calibration_csv_text(data: CalibrationDataset) -> str:
    lines = [",".join(CALIBRATION_CSV_HEADER)]
    lines.extend(
        f"{format_float(s.x)},{format_float(s.y)}" for s in data.samples
    )
    return "\n".join(lines) + "\n"


def write_calibration_csv(path, data: CalibrationDataset) -> None:
    atomic_write_text(path, calibration_csv_text(data))


def read_calibration_csv(path) -> CalibrationDataset:
    pairs: list[tuple[float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CALIBRATION_CSV_HEADER:
            raise InputError(
                f"{path}:1: expected header {','.join(CALIBRATION_CSV_HEADER)}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise InputError(f"{path}:{reader.line_num}: expected 2 fields")
            try:
                pairs.append((float(row[0]), float(row[1])))
            except ValueError as exc:
                raise InputError(f"{path}:{reader.line_num}: {exc}") from exc
    if len(pairs) < 2:
        raise InputError(f"{path}: calibration needs >= 2 samples, got {len(pairs)}")
    return CalibrationDataset.from_pairs(pairs)


def comparison_to_csv(report: ModelComparisonReport) -> str:
    lines = [REPORT_CSV_HEADER]
    lines.extend(
        report_csv_row(tag, report.reports[tag])
        for tag in MODEL_FAMILIES
        if tag in report.reports
    )
    return "\n".join(lines) + "\n"


def comparison_to_dict(report: ModelComparisonReport) -> dict:
    models: dict = {}
    for tag in MODEL_FAMILIES:
        if tag in report.reports:
            entry = report_to_dict(report.reports[tag])
            entry["coefficients"] = list(report.fitted[tag].coefficients)
            entry["fit_method"] = report.fitted[tag].fit_method
            models[tag] = entry
        elif tag in report.skipped:
            models[tag] = {"skipped": report.skipped[tag]}
    return {
        "criterion": report.selection_criterion,
        "best_model": {
            "tag": report.best_model.tag,
            "degree": report.best_model.degree,
        },
        "models": models,
    }


def estimates_csv_text(estimates: Sequence[StrengthEstimate]) -> str:
    lines = [",".join(ESTIMATES_CSV_HEADER)]
    for e in estimates:
        clamped = "true" if e.clamped else "false"
        lines.append(
            f"{e.window_index},{format_float(e.deviation)},"
            f"{format_float(e.estimated_strength_mbps)},{clamped}"
        )
    return "\n".join(lines) + "\n"


def write_estimates_csv(path, estimates: Sequence[StrengthEstimate]) -> None:
    atomic_write_text(path, estimates_csv_text(estimates))


def read_estimates_csv(path) -> list[StrengthEstimate]:
    estimates: list[StrengthEstimate] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ESTIMATES_CSV_HEADER:
            raise InputError(
                f"{path}:1: expected header {','.join(ESTIMATES_CSV_HEADER)}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise InputError(f"{path}:{reader.line_num}: expected 4 fields")
            if row[3] not in ("true", "false"):
                raise InputError(
                    f"{path}:{reader.line_num}: clamped must be true or false"
                )
            try:
                estimates.append(
                    StrengthEstimate(
                        int(row[0]), float(row[1]), float(row[2]), row[3] == "true"
                    )
                )
            except ValueError as exc:
                raise InputError(f"{path}:{reader.line_num}: {exc}") from exc
    return estimates
