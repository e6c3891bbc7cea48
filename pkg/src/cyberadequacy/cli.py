"""Generation adequacy under cyber attack, driven by scenario files.

Exit status: 0 success, 2 input error, 3 runtime error.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import CyberAdequacyError, MissingArtifact, ScenarioError
from .report import FIGURES, compare, emit_figure_data, run_scenario, write_comparison
from .scenario import parse_scenario, scenario_from_resolved

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

log = logging.getLogger("cyberadequacy")

_STEPS_FOR = {
    "attack-prob": ("attack",),
    "copt": ("copt",),
    "lole": ("lole",),
    "simulate": ("attack", "copt", "lole", "simulate"),
}


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, help="override the scenario's Monte Carlo seed")
    common.add_argument("--out", help="output directory (bundle or comparison)")
    common.add_argument("--replications", type=_positive, help="override the scenario's replication count")
    common.add_argument("--workers", type=_positive, default=1,
                        help="threads for Monte Carlo replications (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cyberadequacy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("attack-prob", "attack-graph disruption probability"),
        ("copt", "build base and de-rated outage tables"),
        ("lole", "analytic LOLE / EENS"),
        ("simulate", "full run: attack graph, COPT, analytic LOLE and Monte Carlo"),
    ]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("scenario", help="scenario .toml, or a bundle's resolved_scenario.json")
    p = sub.add_parser("compare", parents=[common], help="compare scenarios side by side")
    p.add_argument("scenarios", nargs="+")
    p = sub.add_parser("figure", parents=[common], help="emit the CSV behind one figure")
    p.add_argument("bundle")
    p.add_argument("name", choices=FIGURES)
    return parser


def _load(path, args):
    overrides = {"seed": args.seed, "replications": args.replications, "out": args.out}
    path = Path(path)
    if path.suffix == ".json":
        try:
            with open(path, encoding="utf-8") as fh:
                resolved = json.load(fh)
            sc = scenario_from_resolved(resolved, path.parent, output_dir=args.out or path.parent)
        except FileNotFoundError:
            raise ScenarioError(path, "scenario file not found") from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(path, f"invalid resolved scenario: {exc}") from None
        if args.seed is not None or args.replications:
            mc = replace(sc.mc, seed=sc.mc.seed if args.seed is None else args.seed,
                         replications=args.replications or sc.mc.replications)
            sc = replace(sc, mc=mc)
        return sc
    return parse_scenario(path, overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figure":
            try:
                paths = emit_figure_data(args.bundle, args.name, dest_dir=args.out)
            except MissingArtifact as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_INPUT
            for p in paths:
                print(f"figure_csv: {p}")
            return EXIT_OK

        if args.command == "compare":
            if len(args.scenarios) < 2:
                print("error: compare needs at least two scenarios", file=sys.stderr)
                return EXIT_INPUT
            scenarios, failures = [], []
            for path in args.scenarios:
                try:
                    scenarios.append(_load(path, args))
                except CyberAdequacyError as exc:
                    failures.append(str(exc))
            if failures:
                for msg in failures:
                    print(f"error: {msg}", file=sys.stderr)
                return EXIT_INPUT
            rows = compare(scenarios, workers=args.workers)
            csv_path = write_comparison(rows, args.out or Path("out") / "compare")
            for r in rows:
                print(f"{r['label']}.mc_mean_days: {r['mc_mean_days']}")
                print(f"{r['label']}.mc_std_error_days: {r['mc_std_error_days']}")
                print(f"{r['label']}.analytic_daily_peak_days: {r['analytic_daily_peak_days']}")
                print(f"{r['label']}.disruption_probability: {r['disruption_probability']}")
            print(f"comparison_csv: {csv_path}")
            return EXIT_OK

        try:
            scenario = _load(args.scenario, args)
        except CyberAdequacyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        run_scenario(scenario, steps=_STEPS_FOR[args.command], workers=args.workers)
        return EXIT_OK
    except CyberAdequacyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
