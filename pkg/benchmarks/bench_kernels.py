"""Time the Monte Carlo replication kernel under both backends.

    python benchmarks/bench_kernels.py --replications 2000 --repeat 3

Reports wall time per run, nanoseconds per unit-hour draw, and checks that
both backends produce identical tallies.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from cyberadequacy.fleet import load_fleet, synth_profile
from cyberadequacy.montecarlo import CyberScenario, McConfig, run_replications
from cyberadequacy.montecarlo._backend import load_kernel

FLEET = Path(__file__).resolve().parent.parent / "fleets" / "paper_11unit"


def bench(backend, fleet, profile, scenario, config, repeat):
    # first call pays for numba compilation (or cache load)
    run = run_replications(fleet, profile, scenario, config, backend=backend)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        run = run_replications(fleet, profile, scenario, config, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=4380)
    args = ap.parse_args(argv)

    fleet = load_fleet(FLEET)
    profile = synth_profile(1200.0, 0.6)
    scenario = CyberScenario()
    config = McConfig(replications=args.replications, seed=args.seed, workers=args.workers)
    draws = args.replications * 8760 * len(fleet)

    results = {}
    for backend in ("numba", "numpy"):
        name, _ = load_kernel(backend)
        if name != backend:
            print(f"{backend:>6}: unavailable")
            continue
        secs, run = bench(backend, fleet, profile, scenario, config, args.repeat)
        results[backend] = (secs, run)
        print(f"{backend:>6}: {secs:8.3f} s  {1e9 * secs / draws:6.2f} ns/draw  "
              f"({args.replications} replications x 8760 h x {len(fleet)} units)")

    if len(results) == 2:
        a, b = results["numba"][1], results["numpy"][1]
        same = all(np.array_equal(getattr(a, f), getattr(b, f))
                   for f in ("hour_deficit", "hour_online", "rep_peak_days", "rep_any_days", "rep_deficit_hours"))
        print(f"speedup: {results['numpy'][0] / results['numba'][0]:.1f}x  identical tallies: {same}")


if __name__ == "__main__":
    main()
