import json

import pytest

from floodgauge.cli import build_parser, main
from floodgauge.detector import load_baseline
from floodgauge.pipeline import (
    read_calibration_csv,
    read_estimates_csv,
    write_calibration_csv,
)
from floodgauge.refdata import reference_dataset
from floodgauge.regression import load_model


def run_cli(*argv):
    return main([str(a) for a in argv])


def simulate_run(tmp_path, name, attack_rate, seed, zombies=10):
    path = tmp_path / name
    code = run_cli(
        "simulate",
        "--out", path,
        "--legit-clients", 60,
        "--zombies", zombies,
        "--attack-rate", attack_rate,
        "--windows", 12,
        "--seed", seed,
    )
    assert code == 0
    return path


@pytest.fixture()
def workflow(tmp_path):
    clean = simulate_run(tmp_path, "clean.csv", 0.0, 11, zombies=0)
    baseline = tmp_path / "baseline.json"
    assert run_cli("baseline", "--flows", clean, "--out", baseline) == 0
    runs = {
        5.0: simulate_run(tmp_path, "atk05.csv", 0.5, 21),
        12.0: simulate_run(tmp_path, "atk12.csv", 1.2, 22),
        20.0: simulate_run(tmp_path, "atk20.csv", 2.0, 23),
    }
    cal = tmp_path / "cal.csv"
    args = ["calibrate", "--baseline", baseline, "--out", cal]
    for strength, path in runs.items():
        args += ["--run", f"{strength}={path}"]
    assert run_cli(*args) == 0
    return tmp_path, cal


def test_simulate_writes_flow_csv_and_sidecar(tmp_path, capsys):
    path = simulate_run(tmp_path, "run.csv", 0.5, 3)
    assert path.exists()
    assert (tmp_path / "run.meta.json").exists()
    out = capsys.readouterr().out
    assert "aggregate attack strength: 5.00 Mbps" in out


def test_baseline_reports_training_stats(tmp_path, capsys):
    clean = simulate_run(tmp_path, "clean.csv", 0.0, 5, zombies=0)
    baseline_path = tmp_path / "baseline.json"
    assert run_cli("baseline", "--flows", clean, "--out", baseline_path) == 0
    baseline = load_baseline(baseline_path)
    assert baseline.training_windows == 12
    assert baseline.threshold == 0.1
    assert "baseline h_n=" in capsys.readouterr().out


def test_full_workflow(workflow, capsys):
    tmp_path, cal = workflow
    data = read_calibration_csv(cal)
    assert [s.y for s in data.samples] == [5.0, 12.0, 20.0]

    model_path = tmp_path / "linear.json"
    assert run_cli("fit", "--data", cal, "--model", "linear", "--out", model_path) == 0
    model = load_model(model_path)
    assert model.kind.tag == "linear"

    assert run_cli("evaluate", "--model", model_path, "--data", cal) == 0
    out = capsys.readouterr().out
    assert "eta" in out and "nmse_table2" in out

    cmp_csv = tmp_path / "cmp.csv"
    cmp_json = tmp_path / "cmp.json"
    assert (
        run_cli(
            "compare",
            "--data", cal,
            "--out-csv", cmp_csv,
            "--out-json", cmp_json,
        )
        == 0
    )
    out = capsys.readouterr().out
    assert "best model by eta:" in out
    header = cmp_csv.read_text().splitlines()[0]
    assert header == "model,r2,cc,sse,mse,rmse,nmse_eq11,nmse_table2,eta,mae_index"
    assert "best_model" in json.loads(cmp_json.read_text())

    est_csv = tmp_path / "est.csv"
    assert (
        run_cli(
            "estimate",
            "--model", model_path,
            "--events", cal,
            "--out", est_csv,
        )
        == 0
    )
    estimates = read_estimates_csv(est_csv)
    assert len(estimates) == 3
    out = capsys.readouterr().out
    assert "estimated 3 flagged windows" in out


def test_estimate_accepts_events_csv(workflow, tmp_path):
    base, cal = workflow
    model_path = base / "log.json"
    assert run_cli("fit", "--data", cal, "--model", "logarithmic", "--out", model_path) == 0
    events_path = base / "events.csv"
    events_path.write_text(
        "window_index,h_c,deviation,attack_flag\n"
        "0,8.5,0.05,false\n"
        "1,8.9,0.3,true\n"
    )
    out_path = base / "est.csv"
    assert run_cli("estimate", "--model", model_path, "--events", events_path, "--out", out_path) == 0
    estimates = read_estimates_csv(out_path)
    assert [e.window_index for e in estimates] == [1]


def test_estimate_rejects_unknown_header(tmp_path, capsys):
    bogus = tmp_path / "bogus.csv"
    bogus.write_text("alpha,beta\n1,2\n")
    model = tmp_path / "m.json"
    model.write_text(
        '{"kind": "linear", "degree": null, "coefficients": [0.0, 1.0],'
        ' "fit_method": "raw_ols", "trained_on": "x"}\n'
    )
    assert run_cli("estimate", "--model", model, "--events", bogus) == 1
    assert "error:" in capsys.readouterr().err


def test_fit_polynomial_degree_flag(workflow):
    tmp_path, cal = workflow
    model_path = tmp_path / "poly.json"
    assert run_cli(
        "fit", "--data", cal, "--model", "polynomial", "--degree", 2, "--out", model_path
    ) == 0
    assert load_model(model_path).kind.degree == 2


def test_fit_degree_on_non_polynomial_fails(workflow, capsys):
    tmp_path, cal = workflow
    code = run_cli(
        "fit", "--data", cal, "--model", "linear", "--degree", 2,
        "--out", tmp_path / "m.json",
    )
    assert code == 1
    assert "degree only applies to polynomial" in capsys.readouterr().err


def test_missing_input_file_exits_one(tmp_path, capsys):
    code = run_cli("baseline", "--flows", tmp_path / "nope.csv", "--out", tmp_path / "b.json")
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--model", "linear"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["calibrate", "--run", "not-a-run", "--baseline", "b", "--out", "c"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_seed_env_var_default(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOODGAUGE_SEED", "123")
    path = tmp_path / "run.csv"
    assert run_cli("simulate", "--out", path, "--legit-clients", 5,
                   "--zombies", 0, "--windows", 2) == 0
    meta = json.loads((tmp_path / "run.meta.json").read_text())
    assert meta["seed"] == 123

    monkeypatch.setenv("FLOODGAUGE_SEED", "not-a-number")
    assert run_cli("simulate", "--out", path, "--legit-clients", 5,
                   "--zombies", 0, "--windows", 2) == 1


def test_explicit_seed_wins_over_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOODGAUGE_SEED", "123")
    path = tmp_path / "run.csv"
    assert run_cli("simulate", "--out", path, "--legit-clients", 5,
                   "--zombies", 0, "--windows", 2, "--seed", 9) == 0
    meta = json.loads((tmp_path / "run.meta.json").read_text())
    assert meta["seed"] == 9


def test_reproduce_command_passes(capsys):
    assert run_cli("reproduce-table2") == 0
    out = capsys.readouterr().out
    assert "reproduction: PASS" in out
    assert "best family by eta: polynomial" in out


def test_reproduce_command_json_output(tmp_path):
    out_json = tmp_path / "repro.json"
    assert run_cli("reproduce-table2", "--out-json", out_json) == 0
    payload = json.loads(out_json.read_text())
    assert payload["ok"] is True
    assert payload["best_family"] == "polynomial"
    assert len(payload["checks"]) == 40


def test_reproduce_with_wrong_degree_fails(capsys):
    # degree 1 duplicates the linear family and misses the published cells
    assert run_cli("reproduce-table2", "--degree", 1) == 1
    assert "FAIL" in capsys.readouterr().out


def test_parser_covers_all_commands():
    parser = build_parser()
    subactions = [
        a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction"
    ]
    commands = set(subactions[0].choices)
    assert commands == {
        "simulate",
        "baseline",
        "calibrate",
        "fit",
        "evaluate",
        "compare",
        "estimate",
        "reproduce-table2",
    }


def test_fixture_estimate_round_trip_keeps_all_rows(tmp_path):
    cal = tmp_path / "table.csv"
    write_calibration_csv(cal, reference_dataset())
    model_path = tmp_path / "linear.json"
    assert run_cli("fit", "--data", cal, "--model", "linear", "--out", model_path) == 0
    est_csv = tmp_path / "est.csv"
    assert run_cli("estimate", "--model", model_path, "--events", cal, "--out", est_csv) == 0
    assert len(read_estimates_csv(est_csv)) == 19


def test_same_seed_produces_byte_identical_outputs(tmp_path):
    first = simulate_run(tmp_path, "a.csv", 0.7, 42)
    second = simulate_run(tmp_path, "b.csv", 0.7, 42)
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a.meta.json").read_bytes() == (tmp_path / "b.meta.json").read_bytes()

    cal = tmp_path / "table.csv"
    write_calibration_csv(cal, reference_dataset())
    outs = []
    for name in ("c1.csv", "c2.csv"):
        out = tmp_path / name
        assert run_cli("compare", "--data", cal, "--out-csv", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]

    models = []
    for name in ("m1.json", "m2.json"):
        out = tmp_path / name
        assert run_cli("fit", "--data", cal, "--model", "power", "--out", out) == 0
        models.append(json.loads(out.read_text()))
    for obj in models:
        del obj["created_at"]
    assert models[0] == models[1]
