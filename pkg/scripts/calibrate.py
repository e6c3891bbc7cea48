"""Analytic sweep used to pick the shipped scenarios' load peaks.

    python scripts/calibrate.py

Prints daily-peak LOLE (days/yr) and the maximum hourly LOLP for a grid of
annual peaks on both shipped fleets, then re-evaluates the shipped scenarios
(analytic and a short Monte Carlo run).
"""
import argparse
from pathlib import Path

import numpy as np

from cyberadequacy.adequacy import lole_daily_peak, lolp_curve
from cyberadequacy.copt import build_copt
from cyberadequacy.fleet import load_fleet, synth_profile
from cyberadequacy.montecarlo import estimate_lole
from cyberadequacy.scenario import parse_scenario

ROOT = Path(__file__).resolve().parent.parent


def sweep(fleet_name, peaks, base_fraction):
    fleet = load_fleet(ROOT / "fleets" / fleet_name)
    copt = build_copt(fleet)
    print(f"{fleet_name} ({fleet.installed_capacity:.0f} MW installed)")
    for peak in peaks:
        prof = synth_profile(peak, base_fraction)
        lole = lole_daily_peak(copt, prof).lole_days_per_year
        max_lolp = float(lolp_curve(copt, prof.hourly_load).max())
        print(f"  peak {peak:7.1f} MW  LOLE {lole:7.3f} d/yr  max hourly LOLP {max_lolp:.4f}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=1000)
    args = ap.parse_args(argv)

    peaks = np.arange(1100, 1701, 100)
    sweep("paper_11unit", peaks, 0.6)
    sweep("paper_11unit_v2g", peaks, 0.6)

    print("shipped scenarios")
    for path in sorted((ROOT / "scenarios").glob("*.toml")):
        sc = parse_scenario(path, {"replications": args.replications})
        analytic = lole_daily_peak(build_copt(sc.fleet), sc.profile).lole_days_per_year
        est = estimate_lole(sc.fleet, sc.profile, sc.cyber, sc.mc, method=sc.lole_method)
        print(f"  {sc.label:<15} no-attack analytic {analytic:6.3f}  MC {est.mean:6.3f} +- {est.std_error:.3f} d/yr")


if __name__ == "__main__":
    main()
