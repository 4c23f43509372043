"""Threshold detector for entropy deviation from a clean-traffic baseline.

A baseline entropy is learned as the mean over attack-free training
windows. Live windows are flagged when their entropy deviates from the
baseline by more than a fixed threshold in bits.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from .entropy_core import EntropyValue
from .errors import InputError, InsufficientBaselineError
from .fileio import atomic_write_text, format_float, read_json, write_json

DEFAULT_THRESHOLD = 0.1
MIN_TRAINING_WINDOWS = 5

EVENTS_CSV_HEADER = ("window_index", "h_c", "deviation", "attack_flag")


@dataclass(frozen=True)
class Baseline:
    """Mean training entropy h_n plus the detection threshold."""

    h_n: float
    threshold: float
    training_windows: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.h_n) or self.h_n < 0:
            raise InputError(f"baseline entropy must be finite and >= 0, got {self.h_n}")
        if not math.isfinite(self.threshold) or self.threshold < 0:
            raise InputError(f"threshold must be >= 0, got {self.threshold}")
        if self.training_windows < MIN_TRAINING_WINDOWS:
            raise InsufficientBaselineError(
                f"baseline needs >= {MIN_TRAINING_WINDOWS} training windows, "
                f"got {self.training_windows}"
            )


@dataclass(frozen=True)
class DetectionEvent:
    """Outcome of checking one window against the baseline."""

    window_index: int
    h_c: float
    deviation: float
    attack_flag: bool


def build_baseline(
    entropies: Sequence[EntropyValue], threshold: float = DEFAULT_THRESHOLD
) -> Baseline:
    """Average training-window entropies into a baseline."""
    if len(entropies) < MIN_TRAINING_WINDOWS:
        raise InsufficientBaselineError(
            f"baseline needs >= {MIN_TRAINING_WINDOWS} training windows, "
            f"got {len(entropies)}"
        )
    h_n = math.fsum(e.value for e in entropies) / len(entropies)
    return Baseline(h_n, threshold, len(entropies))


def evaluate_window(
    h_c: EntropyValue, baseline: Baseline, window_index: int = 0
) -> DetectionEvent:
    """Compare one window's entropy against the baseline.

    The deviation is h_c - h_n and the flag is raised only when the
    deviation strictly exceeds the threshold: a window exactly at the
    threshold stays clean.
    """
    deviation = h_c.value - baseline.h_n
    return DetectionEvent(window_index, h_c.value, deviation, deviation > baseline.threshold)


def evaluate_windows(
    entropies: Sequence[EntropyValue], baseline: Baseline
) -> list[DetectionEvent]:
    return [evaluate_window(e, baseline, i) for i, e in enumerate(entropies)]


def save_baseline(path, baseline: Baseline) -> None:
    write_json(
        path,
        {
            "h_n": baseline.h_n,
            "threshold": baseline.threshold,
            "training_windows": baseline.training_windows,
        },
    )


def load_baseline(path) -> Baseline:
    obj = read_json(path)
    try:
        return Baseline(
            float(obj["h_n"]), float(obj["threshold"]), int(obj["training_windows"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed baseline file: {exc}") from exc


def events_csv_text(events: Sequence[DetectionEvent]) -> str:
    lines = [",".join(EVENTS_CSV_HEADER)]
    for e in events:
        flag = "true" if e.attack_flag else "false"
        lines.append(
            f"{e.window_index},{format_float(e.h_c)},{format_float(e.deviation)},{flag}"
        )
    return "\n".join(lines) + "\n"


def write_events_csv(path, events: Sequence[DetectionEvent]) -> None:
    atomic_write_text(path, events_csv_text(events))


def read_events_csv(path) -> list[DetectionEvent]:
    events: list[DetectionEvent] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != EVENTS_CSV_HEADER:
            raise InputError(f"{path}:1: expected header {','.join(EVENTS_CSV_HEADER)}")
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise InputError(f"{path}:{reader.line_num}: expected 4 fields")
            if row[3] not in ("true", "false"):
                raise InputError(
                    f"{path}:{reader.line_num}: attack_flag must be true or false"
                )
            try:
                events.append(
                    DetectionEvent(
                        int(row[0]), float(row[1]), float(row[2]), row[3] == "true"
                    )
                )
            except ValueError as exc:
                raise InputError(f"{path}:{reader.line_num}: {exc}") from exc
    return events
