"""Entropy-deviation flood detection and attack strength estimation.

The library windowizes per-flow byte counts, measures each window's
sample entropy, flags windows whose entropy deviates from a clean
baseline, and maps deviation to aggregate attack strength through
calibrated regression models.
"""

from .detector import (
    DEFAULT_THRESHOLD,
    Baseline,
    DetectionEvent,
    build_baseline,
    evaluate_window,
    evaluate_windows,
)
from .entropy_core import (
    EntropyValue,
    FlowRecord,
    WindowCounts,
    compute_entropy,
    normalized_entropy,
    windowize,
)
from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateVarianceError,
    DegenerateWindowError,
    DomainError,
    EmptyRunError,
    FloodgaugeError,
    InputError,
    InsufficientBaselineError,
)
from .metrics import FitReport, ResidualSeries, evaluate, residual_summary
from .pipeline import (
    ModelComparisonReport,
    StrengthEstimate,
    calibrate,
    compare_models,
    estimate_strength,
    run_events,
)
from .refdata import (
    REFERENCE_DEVIATIONS,
    REFERENCE_STRENGTHS_MBPS,
    REFERENCE_SUMMARY,
    check_reference_reproduction,
    reference_dataset,
)
from .regression import (
    MODEL_FAMILIES,
    CalibrationDataset,
    CalibrationSample,
    FittedModel,
    ModelKind,
    fit,
    load_model,
    predict,
    residuals,
    save_model,
)
from .traffic_sim import FlowRecordSeries, ScenarioConfig, simulate, sweep

__version__ = "1.0.0"

__all__ = [
    "Baseline",
    "CalibrationDataset",
    "CalibrationSample",
    "ConfigError",
    "DEFAULT_THRESHOLD",
    "DegenerateDataError",
    "DegenerateVarianceError",
    "DegenerateWindowError",
    "DetectionEvent",
    "DomainError",
    "EmptyRunError",
    "EntropyValue",
    "FitReport",
    "FittedModel",
    "FloodgaugeError",
    "FlowRecord",
    "FlowRecordSeries",
    "InputError",
    "InsufficientBaselineError",
    "MODEL_FAMILIES",
    "ModelComparisonReport",
    "ModelKind",
    "REFERENCE_DEVIATIONS",
    "REFERENCE_STRENGTHS_MBPS",
    "REFERENCE_SUMMARY",
    "ResidualSeries",
    "ScenarioConfig",
    "StrengthEstimate",
    "WindowCounts",
    "build_baseline",
    "calibrate",
    "check_reference_reproduction",
    "compare_models",
    "compute_entropy",
    "estimate_strength",
    "evaluate",
    "evaluate_window",
    "evaluate_windows",
    "fit",
    "load_model",
    "normalized_entropy",
    "predict",
    "reference_dataset",
    "residual_summary",
    "residuals",
    "run_events",
    "save_model",
    "simulate",
    "sweep",
    "windowize",
]
