"""Synthetic flow traffic for a flooding scenario.

Legitimate clients send Poisson-distributed byte volumes per window;
zombies flood at a fixed deterministic rate. The generator is seeded so
every run is reproducible, and a sweep derives one run per attack
strength from a base configuration.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .entropy_core import FlowRecord, flow_csv_text, read_flow_csv
from .errors import ConfigError, InputError
from .fileio import atomic_write_text, read_json, write_json

GENERATOR_NAME = "numpy-pcg64"
LEGIT_PREFIX = "legit-"
ZOMBIE_PREFIX = "zombie-"

_SEED_MASK = 0xFFFFFFFFFFFFFFFF
# beyond 2**53 byte counts lose integer precision in float draws
_MAX_BYTES_PER_WINDOW = 2**53


def _bytes_per_window(rate_mbps: float, window_length_ms: float) -> float:
    return rate_mbps * (window_length_ms / 1000.0) * 1e6 / 8.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one simulated run."""

    legit_clients: int = 400
    zombies: int = 100
    attack_rate_mbps_per_zombie: float = 0.1
    legit_mean_rate_mbps_per_client: float = 1.0
    window_length_ms: float = 200.0
    num_windows: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.legit_clients < 0:
            raise ConfigError(f"legit_clients must be >= 0, got {self.legit_clients}")
        if self.zombies < 0:
            raise ConfigError(f"zombies must be >= 0, got {self.zombies}")
        for name in ("attack_rate_mbps_per_zombie", "legit_mean_rate_mbps_per_client"):
            rate = getattr(self, name)
            if not math.isfinite(rate) or rate < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {rate}")
        if not math.isfinite(self.window_length_ms) or self.window_length_ms <= 0:
            raise ConfigError(
                f"window_length_ms must be positive, got {self.window_length_ms}"
            )
        if self.num_windows < 1:
            raise ConfigError(f"num_windows must be >= 1, got {self.num_windows}")
        for name in ("attack_rate_mbps_per_zombie", "legit_mean_rate_mbps_per_client"):
            per_window = _bytes_per_window(getattr(self, name), self.window_length_ms)
            if per_window > _MAX_BYTES_PER_WINDOW:
                raise ConfigError(
                    f"{name} yields {per_window:.3g} bytes per window, "
                    f"beyond the exact-integer range"
                )

    @property
    def attack_strength_mbps(self) -> float:
        """Aggregate attack rate over all zombies."""
        return self.zombies * self.attack_rate_mbps_per_zombie


@dataclass(frozen=True)
class FlowRecordSeries:
    """Flow records of one run plus the metadata needed to replay it."""

    records: tuple[FlowRecord, ...]
    metadata: dict

    def __post_init__(self) -> None:
        last = -1
        for rec in self.records:
            if rec.window_index < last:
                raise InputError("records must be ordered by window_index")
            last = rec.window_index

    @property
    def window_length_ms(self) -> float:
        try:
            return float(self.metadata["config"]["window_length_ms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError("metadata lacks config.window_length_ms") from exc

    @property
    def num_windows(self) -> int:
        try:
            return int(self.metadata["config"]["num_windows"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError("metadata lacks config.num_windows") from exc


def simulate(cfg: ScenarioConfig) -> FlowRecordSeries:
    """Generate one run of per-window flow byte counts.

    Legit client volumes are Poisson draws around the configured mean
    rate; every zombie sends the same rounded byte volume each window.
    Zero-byte draws produce no record.
    """
    seed = cfg.seed & _SEED_MASK
    rng = np.random.default_rng(seed)
    lam = _bytes_per_window(cfg.legit_mean_rate_mbps_per_client, cfg.window_length_ms)
    if cfg.legit_clients > 0:
        legit = rng.poisson(lam, size=(cfg.num_windows, cfg.legit_clients))
    else:
        legit = np.zeros((cfg.num_windows, 0), dtype=np.int64)
    zombie_bytes = int(
        round(_bytes_per_window(cfg.attack_rate_mbps_per_zombie, cfg.window_length_ms))
    )

    records: list[FlowRecord] = []
    for w in range(cfg.num_windows):
        for i in range(cfg.legit_clients):
            b = int(legit[w, i])
            if b > 0:
                records.append(FlowRecord(w, f"{LEGIT_PREFIX}{i:04d}", b))
        if zombie_bytes > 0:
            for i in range(cfg.zombies):
                records.append(FlowRecord(w, f"{ZOMBIE_PREFIX}{i:04d}", zombie_bytes))

    metadata = {
        "config": asdict(cfg),
        "generator": GENERATOR_NAME,
        "seed": seed,
        "flow_labels": {"legit": LEGIT_PREFIX, "zombie": ZOMBIE_PREFIX},
    }
    return FlowRecordSeries(tuple(records), metadata)


def sweep(
    base: ScenarioConfig, strengths_mbps: Sequence[float]
) -> list[tuple[float, FlowRecordSeries]]:
    """Simulate one run per aggregate attack strength.

    Each run keeps the base scenario but divides the requested aggregate
    strength evenly across the zombies. Child runs get independent seeds
    derived from the base seed and the run's position.
    """
    if base.zombies <= 0:
        raise ConfigError("sweep needs a scenario with zombies > 0")
    runs: list[tuple[float, FlowRecordSeries]] = []
    for i, strength in enumerate(strengths_mbps):
        if not math.isfinite(strength) or strength <= 0:
            raise ConfigError(f"sweep strengths must be positive, got {strength}")
        child_seed = int(
            np.random.SeedSequence([base.seed & _SEED_MASK, i]).generate_state(
                1, np.uint64
            )[0]
        )
        cfg = ScenarioConfig(
            legit_clients=base.legit_clients,
            zombies=base.zombies,
            attack_rate_mbps_per_zombie=strength / base.zombies,
            legit_mean_rate_mbps_per_client=base.legit_mean_rate_mbps_per_client,
            window_length_ms=base.window_length_ms,
            num_windows=base.num_windows,
            seed=child_seed,
        )
        runs.append((float(strength), simulate(cfg)))
    return runs


def _meta_path(csv_path) -> str:
    root, _ = os.path.splitext(os.fspath(csv_path))
    return root + ".meta.json"


def write_series(csv_path, series: FlowRecordSeries) -> None:
    """Write records as flow CSV plus a metadata sidecar JSON."""
    atomic_write_text(csv_path, flow_csv_text(series.records))
    write_json(_meta_path(csv_path), series.metadata)


def read_series(csv_path) -> FlowRecordSeries:
    """Read a flow CSV and its metadata sidecar back into a series."""
    records = read_flow_csv(csv_path)
    meta_path = _meta_path(csv_path)
    try:
        metadata = read_json(meta_path)
    except FileNotFoundError as exc:
        raise InputError(f"{meta_path}: metadata sidecar not found") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{meta_path}: invalid JSON: {exc}") from exc
    return FlowRecordSeries(tuple(records), metadata)
