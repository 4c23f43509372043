"""Command line interface.

Subcommands cover the full workflow: simulate traffic, learn a
baseline, calibrate deviation against known strengths, fit and compare
regression families, estimate strength for fresh detections, and check
the bundled reference sweep against its published summary.

Exit codes: 0 on success, 1 on domain or data errors (message on
stderr), 2 on usage errors (argparse).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from .detector import (
    DEFAULT_THRESHOLD,
    DetectionEvent,
    EVENTS_CSV_HEADER,
    build_baseline,
    load_baseline,
    read_events_csv,
    save_baseline,
)
from .entropy_core import compute_entropy, read_flow_csv, windowize
from .errors import ConfigError, FloodgaugeError, InputError
from .fileio import write_json
from .metrics import FitReport, report_to_dict
from .pipeline import (
    CALIBRATION_CSV_HEADER,
    calibrate,
    compare_models,
    comparison_to_csv,
    comparison_to_dict,
    estimate_strength,
    read_calibration_csv,
    write_calibration_csv,
    write_estimates_csv,
)
from .refdata import SUMMARY_METRICS, check_reference_reproduction
from .regression import (
    MODEL_FAMILIES,
    ModelKind,
    fit as fit_model,
    load_model,
    predict,
    save_model,
)
from .traffic_sim import ScenarioConfig, read_series, simulate, write_series

SEED_ENV_VAR = "FLOODGAUGE_SEED"

_METRIC_COLUMNS = (
    ("r2", "r_squared"),
    ("cc", "cc"),
    ("sse", "sse"),
    ("mse", "mse"),
    ("rmse", "rmse"),
    ("nmse_eq11", "nmse_eq11"),
    ("nmse_table2", "nmse_table2"),
    ("eta", "eta"),
    ("mae_index", "mae_index"),
)


def _fmt2(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.2f}"


def _table(rows: Sequence[Sequence[str]]) -> str:
    """Align rows into columns; first column left, the rest right."""
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells.extend(cell.rjust(w) for cell, w in zip(row[1:], widths[1:]))
        out.append("  ".join(cells).rstrip())
    return "\n".join(out)


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _load_run(path, window_length_ms: float | None) -> tuple[list, float]:
    """Read a flow CSV with or without its metadata sidecar.

    Returns the windowized counts and the window length used. Without a
    sidecar, --window-ms must supply the length.
    """
    try:
        series = read_series(path)
    except InputError:
        if window_length_ms is None:
            raise InputError(
                f"{path}: no metadata sidecar; pass --window-ms explicitly"
            )
        records = read_flow_csv(path)
        return windowize(records, window_length_ms), window_length_ms
    length = window_length_ms if window_length_ms is not None else series.window_length_ms
    return windowize(series.records, length), length


def _parse_run_arg(text: str) -> tuple[float, str]:
    strength, sep, path = text.partition("=")
    if not sep or not path:
        raise argparse.ArgumentTypeError(f"expected STRENGTH=PATH, got {text!r}")
    try:
        value = float(strength)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad strength in {text!r}")
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"strength must be positive, got {strength}")
    return value, path


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = ScenarioConfig(
        legit_clients=args.legit_clients,
        zombies=args.zombies,
        attack_rate_mbps_per_zombie=args.attack_rate,
        legit_mean_rate_mbps_per_client=args.legit_rate,
        window_length_ms=args.window_ms,
        num_windows=args.windows,
        seed=_resolve_seed(args.seed),
    )
    series = simulate(cfg)
    write_series(args.out, series)
    print(
        f"wrote {len(series.records)} flow records over {cfg.num_windows} windows "
        f"to {args.out} (seed {series.metadata['seed']})"
    )
    if cfg.zombies > 0 and cfg.attack_rate_mbps_per_zombie > 0:
        print(f"aggregate attack strength: {cfg.attack_strength_mbps:.2f} Mbps")
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    windows, _ = _load_run(args.flows, args.window_ms)
    entropies = [compute_entropy(w) for w in windows]
    baseline = build_baseline(entropies, threshold=args.threshold)
    save_baseline(args.out, baseline)
    print(
        f"baseline h_n={baseline.h_n:.4f} bits over {baseline.training_windows} "
        f"windows (threshold {baseline.threshold}) -> {args.out}"
    )
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    baseline = load_baseline(args.baseline)
    labeled = []
    for strength, path in args.run:
        series = read_series(path)
        labeled.append((strength, series))
    data = calibrate(labeled, baseline, window_length_ms=args.window_ms)
    write_calibration_csv(args.out, data)
    print(f"wrote {len(data.samples)} calibration samples to {args.out}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    data = read_calibration_csv(args.data)
    kind = ModelKind(args.model, args.degree)
    model = fit_model(data, kind)
    save_model(args.out, model)
    coeffs = ", ".join(f"b{i}={c:.6g}" for i, c in enumerate(model.coefficients))
    label = kind.tag if kind.degree is None else f"{kind.tag} degree {kind.degree}"
    print(f"fitted {label} via {model.fit_method}: {coeffs}")
    print(f"model written to {args.out}")
    return 0


def _print_report(report: FitReport) -> None:
    rows = [["metric", "value"]]
    for label, field in _METRIC_COLUMNS:
        rows.append([label, _fmt2(getattr(report, field))])
    rows.append(["mean_abs_error", _fmt2(report.mean_abs_error)])
    rows.append(["samples", str(report.sample_count)])
    print(_table(rows))


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = read_calibration_csv(args.data)
    from .metrics import evaluate as evaluate_fit

    report = evaluate_fit(data.ys, [predict(model, x) for x in data.xs])
    _print_report(report)
    if args.out_json:
        payload = report_to_dict(report)
        payload["model"] = model.kind.tag
        payload["degree"] = model.kind.degree
        write_json(args.out_json, payload)
        print(f"report written to {args.out_json}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    data = read_calibration_csv(args.data)
    comparison = compare_models(data, degree=args.degree, criterion=args.criterion)
    rows = [["model"] + [label for label, _ in _METRIC_COLUMNS]]
    for tag in MODEL_FAMILIES:
        if tag in comparison.reports:
            report = comparison.reports[tag]
            rows.append([tag] + [_fmt2(getattr(report, f)) for _, f in _METRIC_COLUMNS])
    print(_table(rows))
    for tag in MODEL_FAMILIES:
        if tag in comparison.skipped:
            print(f"{tag}: skipped ({comparison.skipped[tag]})")
    best = comparison.best_model
    label = best.tag if best.degree is None else f"{best.tag} (degree {best.degree})"
    print(f"best model by {comparison.selection_criterion}: {label}")
    if args.out_csv:
        from .fileio import atomic_write_text

        atomic_write_text(args.out_csv, comparison_to_csv(comparison))
        print(f"metrics written to {args.out_csv}")
    if args.out_json:
        write_json(args.out_json, comparison_to_dict(comparison))
        print(f"comparison written to {args.out_json}")
    return 0


def _read_events_any(path) -> list[DetectionEvent]:
    """Read detection events, accepting a calibration CSV as well.

    Calibration rows carry only deviations, so they become flagged
    events indexed by position.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
    if first == ",".join(EVENTS_CSV_HEADER):
        return read_events_csv(path)
    if first == ",".join(CALIBRATION_CSV_HEADER):
        data = read_calibration_csv(path)
        return [
            DetectionEvent(i, float("nan"), s.x, True)
            for i, s in enumerate(data.samples)
        ]
    raise InputError(
        f"{path}:1: expected an events or calibration CSV header, got {first!r}"
    )


def _cmd_estimate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    events = _read_events_any(args.events)
    estimates = estimate_strength(model, events)
    if estimates:
        rows = [["window", "deviation", "estimate_mbps", "clamped"]]
        for e in estimates:
            rows.append(
                [
                    str(e.window_index),
                    f"{e.deviation:.4f}",
                    f"{e.estimated_strength_mbps:.2f}",
                    "true" if e.clamped else "false",
                ]
            )
        print(_table(rows))
    clamped = sum(1 for e in estimates if e.clamped)
    print(f"estimated {len(estimates)} flagged windows ({clamped} clamped)")
    if args.out:
        write_estimates_csv(args.out, estimates)
        print(f"estimates written to {args.out}")
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    result = check_reference_reproduction(degree=args.degree)
    rows = [["family", "metric", "computed", "published", "tolerance", "status"]]
    for c in result.checks:
        tol = f"±{c.tolerance:.0%}" if c.tolerance_kind == "rel" else f"±{c.tolerance}"
        rows.append(
            [
                c.family,
                c.metric,
                f"{c.computed:.4f}",
                f"{c.published:.2f}",
                tol,
                "ok" if c.ok else "FAIL",
            ]
        )
    print(_table(rows))
    best = result.comparison.best_model.tag
    print(
        f"best family by {result.comparison.selection_criterion}: {best} "
        f"(expected {result.expected_best}) -> {'ok' if result.best_ok else 'FAIL'}"
    )
    failed = [c for c in result.checks if not c.ok]
    print(f"reproduction: {'PASS' if result.ok else 'FAIL'} "
          f"({len(result.checks) - len(failed)}/{len(result.checks)} cells in tolerance)")
    if args.out_json:
        payload = {
            "ok": result.ok,
            "best_family": best,
            "expected_best": result.expected_best,
            "checks": [
                {
                    "family": c.family,
                    "metric": c.metric,
                    "computed": c.computed,
                    "published": c.published,
                    "tolerance_kind": c.tolerance_kind,
                    "tolerance": c.tolerance,
                    "ok": c.ok,
                }
                for c in result.checks
            ],
            "comparison": comparison_to_dict(result.comparison),
        }
        write_json(args.out_json, payload)
        print(f"result written to {args.out_json}")
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floodgauge",
        description="Entropy-deviation flood detection and strength estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic traffic run")
    p.add_argument("--out", required=True, help="flow CSV to write (plus .meta.json)")
    p.add_argument("--legit-clients", type=int, default=400)
    p.add_argument("--zombies", type=int, default=100)
    p.add_argument(
        "--attack-rate",
        type=float,
        default=0.1,
        help="Mbps per zombie (0 disables the attack)",
    )
    p.add_argument(
        "--legit-rate", type=float, default=1.0, help="mean Mbps per legit client"
    )
    p.add_argument("--window-ms", type=float, default=200.0)
    p.add_argument("--windows", type=int, default=50)
    p.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("baseline", help="learn a baseline from clean traffic")
    p.add_argument("--flows", required=True, help="clean-run flow CSV")
    p.add_argument("--out", required=True, help="baseline JSON to write")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument(
        "--window-ms",
        type=float,
        default=None,
        help="window length when the run has no metadata sidecar",
    )
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("calibrate", help="build calibration data from labeled runs")
    p.add_argument(
        "--run",
        action="append",
        required=True,
        type=_parse_run_arg,
        metavar="STRENGTH=PATH",
        help="labeled attack run; repeat per strength",
    )
    p.add_argument("--baseline", required=True, help="baseline JSON")
    p.add_argument("--out", required=True, help="calibration CSV to write")
    p.add_argument("--window-ms", type=float, default=None)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("fit", help="fit one model family to calibration data")
    p.add_argument("--data", required=True, help="calibration CSV")
    p.add_argument("--model", required=True, choices=MODEL_FAMILIES)
    p.add_argument("--degree", type=int, default=None, help="polynomial degree")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("evaluate", help="score a fitted model on calibration data")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--data", required=True, help="calibration CSV")
    p.add_argument("--out-json", default=None, help="write the full-precision report")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("compare", help="fit and rank all model families")
    p.add_argument("--data", required=True, help="calibration CSV")
    p.add_argument("--degree", type=int, default=None, help="polynomial degree")
    p.add_argument("--criterion", choices=("eta", "r_squared", "sse"), default="eta")
    p.add_argument("--out-csv", default=None, help="write the metric table")
    p.add_argument("--out-json", default=None, help="write the full comparison")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("estimate", help="estimate strength for flagged windows")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument(
        "--events", required=True, help="events CSV (or calibration CSV of deviations)"
    )
    p.add_argument("--out", default=None, help="estimates CSV to write")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser(
        "reproduce-table2",
        help="refit the bundled reference sweep and check the published summary",
    )
    p.add_argument("--degree", type=int, default=2, help="polynomial degree")
    p.add_argument("--out-json", default=None, help="write the check results")
    p.set_defaults(func=_cmd_reproduce)

    return parser


def run(args: argparse.Namespace) -> int:
    return args.func(args)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except FloodgaugeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
