import csv
import json
import textwrap

import numpy as np
import pytest

from cyberadequacy.cli import main
from cyberadequacy.errors import MissingArtifact
from cyberadequacy.report import FAILED_MARKER, ReportBundle, emit_figure_data, run_scenario
from cyberadequacy.scenario import parse_scenario

from conftest import FLEETS, SCENARIOS

CSV_ARTIFACTS = (
    "copt_base.csv", "copt_derated.csv", "lolp_series.csv", "availability_series.csv",
    "lolp_series_no_attack.csv", "availability_series_no_attack.csv",
    "lole_hist.csv", "lole_hist_no_attack.csv", "lole_samples.csv",
)


def summary_lines(out):
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


def small_scenario(tmp_path, extra="", name="small.toml", fleet="a 100 0.05 1\nb 80 0.05 1\nc 50 0.05 0\n"):
    (tmp_path / "fleet").write_text(fleet)
    path = tmp_path / name
    path.write_text(textwrap.dedent(f"""
        label = "{path.stem}"
        [fleet]
        path = "fleet"
        [load]
        annual_peak = 170.0
        [mc]
        replications = 40
        seed = 5
    """) + extra)
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_missing_fleet_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text('[fleet]\npath = "missing_fleet_file"\n')
    assert main(["simulate", str(path), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "missing_fleet_file" in err and "[fleet]" in err
    assert not (tmp_path / "o").exists()


def test_missing_scenario_exit_2(tmp_path, capsys):
    assert main(["lole", str(tmp_path / "nope.toml")]) == 2
    assert "nope.toml" in capsys.readouterr().err


def test_simulate_writes_bundle(tmp_path, capsys):
    out = tmp_path / "bundle"
    assert main(["simulate", str(small_scenario(tmp_path)), "--out", str(out)]) == 0
    summary = summary_lines(capsys.readouterr().out)
    for key in ("disruption_probability", "lole_analytic_daily_peak_days", "lole_mc_mean_days",
                "lole_mc_std_error_days", "scenario_hash", "bundle"):
        assert key in summary
    for name in CSV_ARTIFACTS + ("metadata.json", "resolved_scenario.json", "attack.json",
                                 "lole_summary.json", "analytic_summary.json",
                                 "lole_base_daily_peak.json", "lole_derated_hourly.json"):
        assert (out / name).is_file(), name
    assert not (out / FAILED_MARKER).exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["seed"] == 5 and meta["steps"] == ["attack", "copt", "lole", "simulate"]
    lolp = read_csv(out / "lolp_series.csv")
    assert lolp[0] == ["hour", "value"] and len(lolp) == 8761
    for name in CSV_ARTIFACTS:
        raw = (out / name).read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        raw.decode("utf-8")


def test_seed_and_replication_overrides(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["simulate", str(small_scenario(tmp_path)), "--out", str(out), "--seed", "77",
                 "--replications", "12"]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["seed"] == 77 and meta["replications"] == 12
    assert len(read_csv(out / "lole_samples.csv")) == 13


def test_byte_determinism_across_runs_and_workers(tmp_path):
    sc = small_scenario(tmp_path)
    dirs = []
    for i, workers in enumerate((1, 1, 2, 8)):
        d = tmp_path / f"run{i}"
        assert main(["simulate", str(sc), "--out", str(d), "--workers", str(workers)]) == 0
        dirs.append(d)
    for name in CSV_ARTIFACTS + ("resolved_scenario.json", "lole_summary.json", "attack.json"):
        ref = (dirs[0] / name).read_bytes()
        for d in dirs[1:]:
            assert (d / name).read_bytes() == ref, (name, d)


def test_rerun_from_bundle_reproduces(tmp_path):
    first = tmp_path / "first"
    assert main(["simulate", str(small_scenario(tmp_path)), "--out", str(first)]) == 0
    second = tmp_path / "second"
    assert main(["simulate", str(first / "resolved_scenario.json"), "--out", str(second)]) == 0
    for name in CSV_ARTIFACTS + ("resolved_scenario.json",):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    m1 = json.loads((first / "metadata.json").read_text())
    m2 = json.loads((second / "metadata.json").read_text())
    assert m1["scenario_hash"] == m2["scenario_hash"]


def test_rerun_from_bundle_with_file_load(tmp_path):
    (tmp_path / "load.txt").write_text("120.0\n" * 8760)
    sc = small_scenario(tmp_path, name="fileload.toml")
    sc.write_text(sc.read_text().replace("annual_peak = 170.0", 'path = "load.txt"'))
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", str(sc), "--out", str(first)]) == 0
    assert (first / "load_profile.txt").is_file()
    assert main(["simulate", str(first / "resolved_scenario.json"), "--out", str(second)]) == 0
    assert (first / "lole_samples.csv").read_bytes() == (second / "lole_samples.csv").read_bytes()


def test_failed_marker_on_runtime_error(tmp_path, monkeypatch, capsys):
    import cyberadequacy.report as report

    def boom(*a, **k):
        raise RuntimeError("kernel exploded")

    monkeypatch.setattr(report, "evaluate_mc", boom)
    out = tmp_path / "b"
    assert main(["simulate", str(small_scenario(tmp_path)), "--out", str(out)]) == 3
    assert "kernel exploded" in capsys.readouterr().err
    assert "kernel exploded" in (out / FAILED_MARKER).read_text()
    assert not (out / "metadata.json").exists()
    assert main(["figure", str(out), "copt_compare"]) == 2


def test_partial_steps_and_missing_artifact(tmp_path, capsys):
    out = tmp_path / "b"
    sc = small_scenario(tmp_path)
    assert main(["copt", str(sc), "--out", str(out)]) == 0
    assert main(["figure", str(out), "copt_compare"]) == 0
    capsys.readouterr()
    assert main(["figure", str(out), "lolp_series"]) == 2
    assert "simulate" in capsys.readouterr().err
    with pytest.raises(MissingArtifact, match="simulate"):
        emit_figure_data(out, "lole_hist")
    # a later step on the same inputs adds to the recorded steps
    assert main(["attack-prob", str(sc), "--out", str(out)]) == 0
    assert ReportBundle.open(out).steps == ("attack", "copt")
    assert json.loads((out / "attack.json").read_text())["disruption_probability"] == pytest.approx(1.344e-5)


def test_figure_outputs(tmp_path):
    out = tmp_path / "b"
    assert main(["simulate", str(small_scenario(tmp_path)), "--out", str(out)]) == 0
    paths = emit_figure_data(out, "lolp_series")
    rows = read_csv(paths[0])
    assert len(rows) == 8761 and rows[0] == ["hour", "value"]
    again = emit_figure_data(out, "lolp_series")
    assert again[0].read_bytes() == paths[0].read_bytes()
    avail = read_csv(emit_figure_data(out, "availability")[0])
    assert len(avail) == 8761
    for p in emit_figure_data(out, "copt_compare"):
        probs = [float(r[2]) for r in read_csv(p)[1:]]
        assert abs(sum(probs) - 1.0) <= 1e-12
    hist = read_csv(emit_figure_data(out, "lole_hist")[0])
    assert hist[0] == ["bin_lower", "count"]
    assert sum(int(r[1]) for r in hist[1:]) == 40


def test_zero_risk_histogram_single_bin(tmp_path):
    sc = small_scenario(tmp_path, fleet="a 100 0 1\nb 80 0 1\n",
                        extra="[cyber]\nenabled = false\n")
    out = tmp_path / "b"
    assert main(["simulate", str(sc), "--out", str(out)]) == 0
    rows = read_csv(emit_figure_data(out, "lole_hist")[0])
    assert rows[1:] == [["0.0", "40"]]


def test_secure_v2g_equals_no_attack_run(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["simulate", str(SCENARIOS / "secure_v2g.toml"), "--out", str(out),
                 "--replications", "200"]) == 0
    s = summary_lines(capsys.readouterr().out)
    assert s["lole_mc_mean_days"] == s["lole_mc_no_attack_mean_days"]
    samples = read_csv(out / "lole_samples.csv")[1:]
    assert all(r[1] == r[2] for r in samples)
    assert (out / "lolp_series.csv").read_bytes() == (out / "lolp_series_no_attack.csv").read_bytes()


@pytest.mark.slow
def test_paper_attack_bundle(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["simulate", str(SCENARIOS / "paper_attack.toml"), "--out", str(out)]) == 0
    s = summary_lines(capsys.readouterr().out)
    assert abs(float(s["disruption_probability"]) - 1.344e-5) <= 1e-18
    assert 0.02 <= float(s["lolp_peak_in_window"]) <= 0.025
    attack = json.loads((out / "attack.json").read_text())
    assert abs(attack["disruption_probability"] - 1.344e-5) <= 1e-18


def test_compare_ordering_and_files(tmp_path, capsys):
    paths = [str(SCENARIOS / f"{n}.toml") for n in ("baseline", "secure_v2g", "cyber_v2g")]
    out = tmp_path / "cmp"
    assert main(["compare", *paths, "--out", str(out), "--replications", "400"]) == 0
    s = summary_lines(capsys.readouterr().out)
    assert float(s["secure_v2g.mc_mean_days"]) < float(s["baseline.mc_mean_days"]) < float(s["cyber_v2g.mc_mean_days"])
    rows = read_csv(out / "comparison.csv")
    assert [r[0] for r in rows[1:]] == ["baseline", "secure_v2g", "cyber_v2g"]
    assert "days/year" in (out / "comparison.txt").read_text()


def test_compare_self_identical_rows(tmp_path):
    sc = str(small_scenario(tmp_path))
    out = tmp_path / "cmp"
    assert main(["compare", sc, sc, "--out", str(out)]) == 0
    rows = read_csv(out / "comparison.csv")
    assert rows[1] == rows[2]


def test_compare_delta_monotone(tmp_path):
    a = small_scenario(tmp_path, "[cyber]\ndelta = 0.0\n", name="d0.toml")
    b = small_scenario(tmp_path, "[cyber]\ndelta = 0.05\n", name="d5.toml")
    out = tmp_path / "cmp"
    assert main(["compare", str(a), str(b), "--out", str(out)]) == 0
    rows = read_csv(out / "comparison.csv")
    head = rows[0]
    lo, hi = (dict(zip(head, r)) for r in rows[1:])
    for col in ("analytic_derated_daily_peak_days", "analytic_derated_hourly_days"):
        assert float(hi[col]) >= float(lo[col])
    assert float(hi["mc_mean_days"]) == float(lo["mc_mean_days"])


def test_compare_reports_all_failures(tmp_path, capsys):
    good = small_scenario(tmp_path)
    bad1 = tmp_path / "bad1.toml"
    bad1.write_text('[fleet]\npath = "gone1"\n')
    bad2 = tmp_path / "bad2.toml"
    bad2.write_text('[fleet]\npath = "gone2"\n')
    out = tmp_path / "cmp"
    assert main(["compare", str(good), str(bad1), str(bad2), "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "gone1" in err and "gone2" in err
    assert not out.exists()


def test_compare_needs_two(tmp_path, capsys):
    assert main(["compare", str(small_scenario(tmp_path))]) == 2


def test_bad_seed_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", str(small_scenario(tmp_path)), "--seed", "-1"])
    assert exc.value.code == 2


def test_run_scenario_api(tmp_path):
    sc = parse_scenario(small_scenario(tmp_path), {"out": str(tmp_path / "api")})
    lines = []
    bundle = run_scenario(sc, emit=lines.append)
    assert bundle.mc.replications == 40
    assert np.array_equal(bundle.mc.hour_online.shape, (8760,))
    assert any(line.startswith("lole_mc_mean_days: ") for line in lines)
    assert not bundle.failed


def test_module_entry_point_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "simulate" in capsys.readouterr().out


def test_shipped_fleet_paths_resolve():
    sc = parse_scenario(SCENARIOS / "cyber_v2g.toml")
    assert sc.fleet.installed_capacity == pytest.approx(2100 + 52)
    assert (FLEETS / "paper_11unit_v2g").is_file()
