import csv
import json
import subprocess
import sys

import pytest

from raterobust import quad, sim, tradeoff
from raterobust.cli import Report, main, parse_grid, parse_spectrum, render_json


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0] == "# schema-version: 1"
    return list(csv.DictReader(lines[1:]))


# --------------------------------------------------------------------------- parsing

def test_grid_syntax():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]
    assert parse_grid("log:1:100:3") == pytest.approx([1.0, 10.0, 100.0])
    assert parse_grid("2.5") == [2.5]


@pytest.mark.parametrize("bad", ["", "1:2", "a,b", "log:0:1:3", "1:2:x"])
def test_bad_grids_rejected(capsys, bad):
    code, _, err = run(capsys, "tradeoff", "--mu", "0.1", "--L", "1", "--tau-grid", bad)
    assert code == 2
    assert "error" in json.loads(err)


def test_spectrum_file(tmp_path):
    path = tmp_path / "eig.txt"
    path.write_text("0.1\n0.5 1.0\n")
    assert parse_spectrum(f"@{path}") == [0.1, 0.5, 1.0]
    assert parse_spectrum("0.1,1") == [0.1, 1.0]


def test_missing_spectrum_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--spectrum", f"@{tmp_path / 'nope'}", "--alpha", "1")
    assert code == 2


# --------------------------------------------------------------------------- analyze

def test_analyze_example(capsys):
    report = run_json(capsys, "analyze", "--method", "gd", "--mu", "0.1", "--L", "1",
                      "--spectrum", "0.1,1", "--alpha", "1.5055")
    row = report["rows"][0]
    assert row["J"] == pytest.approx(1.9294, abs=1e-3)
    assert row["rho"] == pytest.approx(0.8494, abs=1e-3)
    assert row["verdict"] == "S1"
    assert row["h2_residual"] < 1e-9
    assert row["lower_bound"] <= row["J"]


def test_analyze_outside_region(capsys):
    code, out, err = run(capsys, "analyze", "--method", "ag", "--mu", "1", "--L", "40",
                         "--alpha", "0.05", "--beta", "0.6")
    assert code == 3
    assert out == ""
    payload = json.loads(err)
    assert payload["verdict"] == "OUTSIDE"
    assert not quad.in_stability_region(0.05, 0.6, 1.0, 40.0).inside


def test_analyze_gd_divergent_stepsize(capsys):
    code, _, err = run(capsys, "analyze", "--mu", "0.1", "--L", "1", "--alpha", "2.5")
    assert code == 3


def test_zero_momentum_matches_gd(capsys):
    common = ["--mu", "0.1", "--L", "1", "--spectrum", "0.1,0.4,1", "--alpha", "0.9"]
    gd = run_json(capsys, "analyze", "--method", "gd", *common)["rows"][0]
    ag = run_json(capsys, "analyze", "--method", "ag", "--beta", "0", *common)["rows"][0]
    for key in ("rho", "J", "Jprime"):
        assert ag[key] == gd[key]


@pytest.mark.parametrize("argv", [
    ["analyze", "--mu", "0.1", "--L", "1"],
    ["analyze", "--mu", "1", "--L", "0.1", "--alpha", "1"],
    ["analyze", "--mu", "0.2", "--L", "1", "--spectrum", "0.1,1", "--alpha", "1"],
    ["analyze", "--method", "gd", "--mu", "0.1", "--L", "1", "--alpha", "1", "--beta", "0.3"],
    ["analyze", "--mu", "0.1", "--L", "1", "--alpha", "-1"],
    ["analyze", "--mu", "nan", "--L", "1", "--alpha", "1"],
    ["analyze", "--method", "sgd"],
    ["bogus"],
])
def test_validation_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"]


# --------------------------------------------------------------------------- output formats

def test_json_round_trip(capsys):
    code, out, _ = run(capsys, "analyze", "--mu", "0.1", "--L", "1", "--d", "3", "--alpha", "1.2",
                       "--format", "json")
    payload = json.loads(out)
    report = Report.from_dict(payload)
    assert report.to_dict() == payload
    assert render_json(report) == out


def test_twelve_significant_digits(capsys):
    code, out, _ = run(capsys, "analyze", "--mu", "0.1", "--L", "1", "--alpha", "1.5055", "--format", "csv")
    row = csv_rows(out)[0]
    digits = row["J"].replace(".", "").lstrip("0")
    assert len(digits) <= 12
    assert float(row["J"]) == pytest.approx(quad.gd_robustness(1.5055, [0.1, 1.0]), rel=1e-11)


def test_out_path(capsys, tmp_path):
    target = tmp_path / "report.csv"
    code, out, _ = run(capsys, "stability", "--method", "ag", "--mu", "0.1", "--L", "1",
                       "--alpha", "0.5,3", "--beta", "0.5", "--format", "csv", "--out", target)
    assert code == 0 and out == ""
    rows = csv_rows(target.read_text())
    assert [r["region"] for r in rows] == ["S1", "OUTSIDE"]


def test_table_output(capsys):
    code, out, _ = run(capsys, "analyze", "--mu", "0.1", "--L", "1", "--alpha", "1")
    assert code == 0
    assert "rho" in out and "verdict" in out


def test_config_file_and_flag_precedence(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# example\nmu = 0.1\nL=1\nspectrum=0.1,1\nalpha=1.0\nformat=json\n")
    from_file = run_json(capsys, "analyze", "--config", config)["rows"][0]
    assert from_file["alpha"] == 1.0
    overridden = run_json(capsys, "analyze", "--config", config, "--alpha", "1.5055")["rows"][0]
    assert overridden["J"] == pytest.approx(1.9294, abs=1e-3)


@pytest.mark.parametrize("content", ["nonsense line\n", "color=blue\n", "method=sgd\n", "alpha=x\n"])
def test_bad_config(capsys, tmp_path, content):
    config = tmp_path / "bad.cfg"
    config.write_text(content)
    code, _, err = run(capsys, "analyze", "--config", config)
    assert code == 2


# --------------------------------------------------------------------------- stability

def test_stability_grid(capsys):
    report = run_json(capsys, "stability", "--method", "ag", "--mu", "0.7", "--L", "1",
                      "--alpha", "0.5:2.5:5", "--beta", "0,0.5")
    assert len(report["rows"]) == 10
    for row in report["rows"]:
        verdict = quad.in_stability_region(row["alpha"], row["beta"], 0.7, 1.0)
        assert row["inside"] == verdict.inside
        assert row["region"] == verdict.region_label.value


# --------------------------------------------------------------------------- tradeoff and pareto

def test_tradeoff_csv_header_and_panels(capsys, tmp_path):
    code, out, _ = run(capsys, "tradeoff", "--method", "gd", "--mu", "0.1", "--L", "1", "--d", "2",
                       "--tau-grid", "log:0.01:100:7", "--format", "csv", "--panels", tmp_path)
    assert code == 0
    assert out.splitlines()[1] == "rho,J,alpha,beta,param"
    rows = csv_rows(out)
    rates = [float(r["rho"]) for r in rows]
    assert rates == sorted(rates)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["rho_J.csv", "tau_J.csv", "tau_rho.csv"]
    tau_rho = csv_rows((tmp_path / "tau_rho.csv").read_text())
    assert len(tau_rho) == 7
    # larger tau weights the rate more, so the rate improves
    assert float(tau_rho[0]["rho"]) > float(tau_rho[-1]["rho"])


def test_tradeoff_example_point(capsys):
    report = run_json(capsys, "tradeoff", "--method", "gd", "--spectrum", "0.1,1", "--tau", "2")
    row = report["rows"][0]
    assert row["alpha"] == pytest.approx(1.5055, abs=1e-3)
    assert report["meta"]["provenance"] == "exact"


def test_tradeoff_eps_mode_upper_bound(capsys):
    report = run_json(capsys, "tradeoff", "--method", "ag", "--mu", "0.1", "--L", "1", "--d", "10",
                      "--eps-grid", "0:0.05:3")
    assert report["meta"]["provenance"] == "upper_bound"
    assert len(report["rows"]) >= 1


def test_tradeoff_conflicting_sweeps(capsys):
    code, _, _ = run(capsys, "tradeoff", "--mu", "0.1", "--L", "1", "--tau", "1", "--eps", "0.01")
    assert code == 2


def test_tradeoff_deterministic(capsys):
    argv = ["tradeoff", "--method", "ag", "--spectrum", "0.1,0.5,1", "--tau-grid", "0.5,5",
            "--grid", "12", "--format", "csv"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_pareto_dominance(capsys):
    report = run_json(capsys, "pareto", "--mu", "0.1", "--L", "1", "--d", "2",
                      "--tau-grid", "log:0.01:100:4", "--grid", "20")
    assert report["meta"]["all_dominated"] is True
    for row in report["rows"]:
        assert row["rho_ag"] <= row["rho_gd"] and row["J_ag"] <= row["J_gd"]


# --------------------------------------------------------------------------- certify

def test_certify_gd_fastest(capsys):
    report = run_json(capsys, "certify", "--method", "gd", "--mu", "0.1", "--L", "1")
    assert report["meta"]["min_rho"] == pytest.approx(0.8182, abs=1e-4)


def test_certify_infeasible_rate_is_reported(capsys):
    report = run_json(capsys, "certify", "--method", "gd", "--mu", "0.1", "--L", "1",
                      "--rho", "0.8,0.85")
    assert [r["status"] for r in report["rows"]] == ["INFEASIBLE", "FEASIBLE"]
    assert report["rows"][0]["bound"] is None
    ag = run_json(capsys, "certify", "--method", "ag", "--mu", "1", "--L", "20", "--alpha", "0.05",
                  "--rho", "0.5,0.95")
    assert [r["status"] for r in ag["rows"]] == ["INFEASIBLE", "FEASIBLE"]
    assert ag["meta"]["witness_bound"] == pytest.approx(0.05 ** 0.5 * 2 / 2)


def test_certify_ag_curve_ordering(capsys):
    report = run_json(capsys, "certify", "--method", "ag", "--mu", "1", "--L", "20", "--d", "1",
                      "--eps-grid", "0:0.1:5", "--grid", "10")
    rows = report["rows"]
    assert len(rows) == 5
    for row in rows:
        assert row["sdp"] <= row["explicit"] + 1e-6 * (1 + row["explicit"])
        assert row["sdp"] <= row["sqrt_alpha_bound"] + 1e-8
        if row["gd"] is not None:
            assert row["sdp"] <= row["gd"]
    assert rows[0]["gd"] is None


def test_certify_eps_out_of_range(capsys):
    code, _, err = run(capsys, "certify", "--method", "ag", "--mu", "1", "--L", "20", "--eps", "0.5")
    assert code == 2
    assert json.loads(err)["error"] == "EPS_OUT_OF_RANGE"


# --------------------------------------------------------------------------- simulate

def test_simulate_example(capsys, tmp_path):
    traj = tmp_path / "traj.csv"
    report = run_json(capsys, "simulate", "--method", "gd", "--spectrum", "0.1,1", "--alpha", "1.5055",
                      "--sigma", "0.1", "--replicas", "300", "--kmax", "1000", "--seed", "3",
                      "--trajectory", traj)
    J = report["rows"][0]
    assert J["measure"] == "J"
    assert J["estimate"] == pytest.approx(1.9294, rel=0.05)
    rows = csv_rows(traj.read_text())
    assert list(rows[0]) == ["k", "replica", "subopt", "dist2"]
    assert len(rows) == 300 * 1001


def test_simulate_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code, _, _ = run(capsys, "simulate", "--method", "ag", "--spectrum", "0.2,1", "--alpha", "0.5",
                         "--beta", "0.3", "--replicas", "4", "--kmax", "300", "--seed", "7",
                         "--trajectory", path, "--format", "csv", "--out", path.with_suffix(".out"))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".out").read_bytes() == paths[1].with_suffix(".out").read_bytes()


def test_simulate_noiseless_envelope(capsys, tmp_path):
    path = tmp_path / "t.csv"
    run_json(capsys, "simulate", "--spectrum", "0.1,1", "--alpha", "1.2", "--sigma", "0",
             "--replicas", "1", "--kmax", "100", "--x0", "1", "--trajectory", path)
    values = [float(r["subopt"]) for r in csv_rows(path.read_text())]
    rho = quad.gd_rate(1.2, 0.1, 1.0)
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(v <= values[0] * 10 * rho ** (2 * k) * (1 + 1e-9) for k, v in enumerate(values))


def test_simulate_unstable_parameters(capsys):
    code, _, err = run(capsys, "simulate", "--method", "ag", "--spectrum", "0.1,1", "--alpha", "1.9",
                       "--beta", "0.9")
    assert code == 3


def test_tuned_momentum_beats_gd_on_laplacian(capsys):
    objective = sim.make_laplacian_objective(100, 0.1, 0)
    gd = quad.gd_point(1.0 / objective.L, objective.spectrum)
    tuned = tradeoff.ag_optimize_rate_constrained(gd.rho, objective.spectrum)
    common = ["--objective", "laplacian", "--d", "100", "--delta", "0.1", "--sigma", "1",
              "--replicas", "20", "--kmax", "600", "--seed", "0"]
    gd_run = run_json(capsys, "simulate", "--method", "gd", "--alpha", 1.0 / objective.L, *common)
    ag_run = run_json(capsys, "simulate", "--method", "ag", "--alpha", tuned.alpha, "--beta", tuned.beta,
                      *common)
    assert tuned.rho <= gd.rho + 1e-12
    assert ag_run["meta"]["tail_average"] < gd_run["meta"]["tail_average"]
    assert ag_run["rows"][0]["estimate"] < gd_run["rows"][0]["estimate"]


def test_console_entry_point():
    result = subprocess.run([sys.executable, "-m", "raterobust.cli", "analyze", "--mu", "0.1", "--L", "1",
                             "--alpha", "1", "--format", "csv"], capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.startswith("# schema-version: 1")
