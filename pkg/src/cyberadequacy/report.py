"""Scenario runs, report bundles, scenario comparison and figure data.

A bundle is a directory.  While a run is in progress it holds a ``FAILED``
marker; the marker is removed only after every artifact has been written,
and it stays (with the error text) if the run dies.
"""
import csv
import datetime as _dt
import io
import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .adequacy import eens, expected_lole_mixture, lole_daily_peak, lole_hourly
from .attack_graph import disruption_probability, enumerate_paths, path_probability
from .copt import apply_cyber_derating, build_copt, copt_to_csv
from .errors import MissingArtifact
from .fleet import write_profile
from .montecarlo import run_replications

STEPS = ("attack", "copt", "lole", "simulate")
FIGURES = ("lolp_series", "lole_hist", "copt_compare", "availability")
FAILED_MARKER = "FAILED"

# which run step produces each figure's source files
_FIGURE_SOURCES = {
    "lolp_series": ("simulate", ["lolp_series.csv"]),
    "lole_hist": ("simulate", ["lole_hist.csv"]),
    "copt_compare": ("copt", ["copt_base.csv", "copt_derated.csv"]),
    "availability": ("simulate", ["availability_series.csv"]),
}


def _fmt(x):
    return repr(float(x))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_json(path, obj):
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def series_csv(values):
    return csv_text(("hour", "value"), ((h, _fmt(v)) for h, v in enumerate(values)))


def histogram_csv(histogram):
    return csv_text(("bin_lower", "count"), ((_fmt(lo), c) for lo, c in histogram))


@dataclass
class ReportBundle:
    """In-memory results of a scenario run, plus where they were written."""

    directory: Path
    metadata: dict
    summary: dict = field(default_factory=dict)
    copt_base: object = None
    copt_derated: object = None
    analytic: dict = field(default_factory=dict)
    mc: object = None
    mc_no_attack: object = None

    @classmethod
    def open(cls, directory):
        directory = Path(directory)
        meta_path = directory / "metadata.json"
        if not meta_path.is_file():
            raise MissingArtifact(f"{directory} is not a report bundle (no metadata.json)")
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        return cls(directory=directory, metadata=meta)

    @property
    def steps(self):
        return tuple(self.metadata.get("steps", ()))

    @property
    def failed(self):
        return (self.directory / FAILED_MARKER).exists()


def _window_stats(scenario, lolp, availability):
    lo, hi = scenario.cyber.window
    mask = np.zeros(lolp.size, dtype=bool)
    mask[lo:hi] = True
    stats = {"lolp_max": float(lolp.max()), "availability_mean": float(availability.mean())}
    if mask.any():
        stats.update(
            lolp_peak_in_window=float(lolp[mask].max()),
            lolp_mean_out_of_window=float(lolp[~mask].mean()),
            lolp_max_out_of_window=float(lolp[~mask].max()),
            availability_in_window=float(availability[mask].mean()),
            availability_out_of_window=float(availability[~mask].mean()),
        )
    return stats


def evaluate_attack(scenario):
    paths = enumerate_paths(scenario.graph, scenario.target)
    return {
        "target": scenario.target,
        "method": "chain_rule" if len(paths) <= 1 else "chain_rule_noisy_or",
        "disruption_probability": disruption_probability(scenario.graph, scenario.target),
        "paths": [{"nodes": list(p), "probability": path_probability(scenario.graph, p)} for p in paths],
    }


def evaluate_copt(scenario):
    base = build_copt(scenario.fleet, rounding=scenario.rounding or None)
    return base, apply_cyber_derating(base, scenario.cyber.delta)


def evaluate_analytic(scenario, base, derated, p_disruption):
    out = {
        "base": {"daily_peak": lole_daily_peak(base, scenario.profile),
                 "hourly": lole_hourly(base, scenario.profile)},
        "derated": {"daily_peak": lole_daily_peak(derated, scenario.profile),
                    "hourly": lole_hourly(derated, scenario.profile)},
    }
    out["eens_mwh_per_year"] = {"base": eens(base, scenario.profile), "derated": eens(derated, scenario.profile)}
    out["mixture"] = {
        "p_disruption": p_disruption,
        "delta": scenario.cyber.delta,
        "lole_days_per_year": expected_lole_mixture(
            out["base"]["daily_peak"].lole_days_per_year,
            out["derated"]["daily_peak"].lole_days_per_year,
            p_disruption,
        ),
        "method": "daily_peak",
    }
    return out


def evaluate_mc(scenario, workers=1):
    """Scenario run and its no-attack twin, on common random numbers."""
    config = replace(scenario.mc, workers=workers)
    attack = run_replications(scenario.fleet, scenario.profile, scenario.cyber, config)
    no_attack = run_replications(scenario.fleet, scenario.profile, scenario.no_attack(), config)
    return attack, no_attack


def _mc_summary(run, method, label):
    est = run.lole(method)
    s = est.summary()
    s["run"] = label
    s["variants"] = {m: {"mean": run.lole(m).mean, "std_error": run.lole(m).std_error}
                     for m in ("daily_peak", "any_hour", "hourly")}
    s["units"] = "days/year"
    return est, s


def run_scenario(scenario, steps=STEPS, workers=1, out=None, emit=print):
    """Run the requested steps and write their artifacts to the bundle dir.

    :param scenario: a resolved :class:`~cyberadequacy.scenario.Scenario`
    :param steps: subset of ``("attack", "copt", "lole", "simulate")``
    :param emit: receives each ``key: value`` summary line
    :returns: :class:`ReportBundle`
    """
    unknown = set(steps) - set(STEPS)
    if unknown:
        raise ValueError(f"unknown steps {sorted(unknown)}")
    steps = tuple(s for s in STEPS if s in steps)
    directory = Path(out or scenario.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    marker = directory / FAILED_MARKER
    _write(marker, "run in progress\n")

    metadata = {
        "tool": "cyberadequacy",
        "tool_version": __version__,
        "scenario_label": scenario.label,
        "scenario_source": scenario.source,
        "scenario_hash": scenario.hash,
        "seed": scenario.mc.seed,
        "replications": scenario.mc.replications,
        "steps": list(steps),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    previous = directory / "metadata.json"
    if previous.is_file():
        with open(previous, encoding="utf-8") as fh:
            prior = json.load(fh)
        # artifacts of earlier steps stay valid only for identical inputs
        if prior.get("scenario_hash") == metadata["scenario_hash"]:
            merged = set(prior.get("steps", ())) | set(steps)
            metadata["steps"] = [s for s in STEPS if s in merged]
        previous.unlink()
    bundle = ReportBundle(directory=directory, metadata=metadata)
    summary = bundle.summary
    summary["scenario"] = scenario.label
    summary["scenario_hash"] = scenario.hash
    summary["seed"] = scenario.mc.seed
    try:
        resolved = scenario.resolved()
        if resolved["load"]["kind"] == "file":
            write_profile(scenario.profile, directory / "load_profile.txt")
        _write_json(directory / "resolved_scenario.json", resolved)

        p_disruption = None
        if "attack" in steps or "lole" in steps:
            attack = evaluate_attack(scenario)
            p_disruption = attack["disruption_probability"]
            if "attack" in steps:
                _write_json(directory / "attack.json", attack)
            summary["disruption_probability"] = p_disruption

        if {"copt", "lole", "simulate"} & set(steps):
            base, derated = evaluate_copt(scenario)
            bundle.copt_base, bundle.copt_derated = base, derated
            if "copt" in steps:
                _write(directory / "copt_base.csv", copt_to_csv(base))
                _write(directory / "copt_derated.csv", copt_to_csv(derated))
                summary["copt_states"] = len(base)
                summary["installed_mw"] = base.installed

        if "lole" in steps:
            analytic = evaluate_analytic(scenario, base, derated, p_disruption)
            bundle.analytic = analytic
            for table in ("base", "derated"):
                for method in ("daily_peak", "hourly"):
                    analytic[table][method].to_json(directory / f"lole_{table}_{method}.json")
            _write_json(directory / "analytic_summary.json", {
                "delta": scenario.cyber.delta,
                "eens_mwh_per_year": analytic["eens_mwh_per_year"],
                "mixture": analytic["mixture"],
                "lole_days_per_year": {t: {m: analytic[t][m].lole_days_per_year for m in ("daily_peak", "hourly")}
                                       for t in ("base", "derated")},
            })
            summary["lole_analytic_daily_peak_days"] = analytic["base"]["daily_peak"].lole_days_per_year
            summary["lole_analytic_hourly_days"] = analytic["base"]["hourly"].lole_days_per_year
            summary["lole_analytic_derated_daily_peak_days"] = analytic["derated"]["daily_peak"].lole_days_per_year
            summary["lole_analytic_derated_hourly_days"] = analytic["derated"]["hourly"].lole_days_per_year
            summary["lole_mixture_days"] = analytic["mixture"]["lole_days_per_year"]
            summary["eens_mwh_per_year"] = analytic["eens_mwh_per_year"]["base"]

        if "simulate" in steps:
            run, twin = evaluate_mc(scenario, workers=workers)
            bundle.mc, bundle.mc_no_attack = run, twin
            method = scenario.lole_method
            est, est_summary = _mc_summary(run, method, "scenario")
            twin_est, twin_summary = _mc_summary(twin, method, "no_attack")
            _write(directory / "lolp_series.csv", series_csv(run.lolp_series))
            _write(directory / "availability_series.csv", series_csv(run.availability_series))
            _write(directory / "lolp_series_no_attack.csv", series_csv(twin.lolp_series))
            _write(directory / "availability_series_no_attack.csv", series_csv(twin.availability_series))
            _write(directory / "lole_hist.csv", histogram_csv(est.histogram))
            _write(directory / "lole_hist_no_attack.csv", histogram_csv(twin_est.histogram))
            _write(directory / "lole_samples.csv",
                   csv_text(("replication", "scenario", "no_attack"),
                            ((r, _fmt(a), _fmt(b)) for r, (a, b) in enumerate(zip(est.samples, twin_est.samples)))))
            _write_json(directory / "lole_summary.json", {"scenario": est_summary, "no_attack": twin_summary,
                                                          "common_random_numbers": True})
            summary["lole_mc_method"] = method
            summary["lole_mc_mean_days"] = est.mean
            summary["lole_mc_std_error_days"] = est.std_error
            summary["lole_mc_no_attack_mean_days"] = twin_est.mean
            summary["lole_mc_no_attack_std_error_days"] = twin_est.std_error
            summary.update(_window_stats(scenario, run.lolp_series, run.availability_series))

        _write_json(directory / "metadata.json", metadata)
    except BaseException as exc:
        _write(marker, f"{type(exc).__name__}: {exc}\n")
        raise
    marker.unlink()
    summary["bundle"] = str(directory)
    for key, value in summary.items():
        emit(f"{key}: {value}")
    return bundle


def emit_figure_data(bundle, figure, dest_dir=None):
    """Write the CSV(s) behind one figure; returns the written paths.

    :param bundle: :class:`ReportBundle` or a bundle directory
    :param figure: one of ``lolp_series``, ``lole_hist``, ``copt_compare``,
        ``availability``
    :raises MissingArtifact: the run step producing the data was skipped
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {FIGURES}")
    if not isinstance(bundle, ReportBundle):
        bundle = ReportBundle.open(bundle)
    if bundle.failed:
        raise MissingArtifact(f"bundle {bundle.directory} is marked FAILED")
    step, sources = _FIGURE_SOURCES[figure]
    if step not in bundle.steps:
        raise MissingArtifact(
            f"figure {figure!r} needs the {step!r} step, which was skipped for bundle {bundle.directory}")
    dest_dir = Path(dest_dir or bundle.directory / "figures")
    dest_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sources:
        src = bundle.directory / name
        if not src.is_file():
            raise MissingArtifact(f"{src} is missing although the {step!r} step was recorded")
        if figure == "copt_compare":
            target = dest_dir / f"copt_compare_{name[len('copt_'):]}"
        else:
            target = dest_dir / f"{figure}.csv"
        shutil.copyfile(src, target)
        written.append(target)
    return written


COMPARE_HEADER = (
    "label", "scenario_hash", "delta", "disruption_probability",
    "analytic_daily_peak_days", "analytic_hourly_days",
    "analytic_derated_daily_peak_days", "analytic_derated_hourly_days",
    "mc_method", "mc_mean_days", "mc_std_error_days", "replications", "seed",
)


def compare(scenarios, workers=1):
    """One row per scenario, in the order given."""
    rows = []
    for sc in scenarios:
        attack = evaluate_attack(sc)
        base, derated = evaluate_copt(sc)
        analytic = evaluate_analytic(sc, base, derated, attack["disruption_probability"])
        run = run_replications(sc.fleet, sc.profile, sc.cyber, replace(sc.mc, workers=workers))
        est = run.lole(sc.lole_method)
        rows.append({
            "label": sc.label,
            "scenario_hash": sc.hash,
            "delta": sc.cyber.delta,
            "disruption_probability": attack["disruption_probability"],
            "analytic_daily_peak_days": analytic["base"]["daily_peak"].lole_days_per_year,
            "analytic_hourly_days": analytic["base"]["hourly"].lole_days_per_year,
            "analytic_derated_daily_peak_days": analytic["derated"]["daily_peak"].lole_days_per_year,
            "analytic_derated_hourly_days": analytic["derated"]["hourly"].lole_days_per_year,
            "mc_method": sc.lole_method,
            "mc_mean_days": est.mean,
            "mc_std_error_days": est.std_error,
            "replications": est.replications,
            "seed": sc.mc.seed,
        })
    return rows


def comparison_csv(rows):
    def cell(v):
        return _fmt(v) if isinstance(v, float) else v

    return csv_text(COMPARE_HEADER, ([cell(r[k]) for k in COMPARE_HEADER] for r in rows))


def render_comparison(rows):
    """Fixed-width text table; LOLE columns in days/year."""
    head = f"{'scenario':<16} {'analytic dp':>12} {'analytic hr':>12} {'derated dp':>11} " \
           f"{'MC mean':>9} {'± SE':>7} {'P(disrupt)':>11}"
    lines = ["LOLE comparison (days/year; dp = daily peak, hr = hourly/24)", head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r['label']:<16} {r['analytic_daily_peak_days']:>12.3f} {r['analytic_hourly_days']:>12.3f} "
            f"{r['analytic_derated_daily_peak_days']:>11.3f} {r['mc_mean_days']:>9.3f} "
            f"{r['mc_std_error_days']:>7.3f} {r['disruption_probability']:>11.4g}"
        )
    return "\n".join(lines) + "\n"


def write_comparison(rows, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write(directory / "comparison.csv", comparison_csv(rows))
    _write(directory / "comparison.txt", render_comparison(rows))
    return directory / "comparison.csv"
