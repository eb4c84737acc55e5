"""Command-line entry point: ``mepgraphene {run,validate,closure-table,study}``.

Exit codes: 0 success, 2 configuration error, 3 numeric error.
"""
import argparse
import logging
from pathlib import Path
import sys

from .config import load_config, parse_config
from .errors import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="mepgraphene",
                                description="Maximum-entropy hydrodynamics of Dirac-cone carriers")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run the scenario's solver"),
                           ("validate", "parse and validate a scenario file"),
                           ("closure-table", "tabulate the exact closure over (A, B, T)"),
                           ("study", "relaxation-limit convergence study")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", type=Path, required=(name in ("run", "validate")),
                        help="scenario file (key = value lines)")
        if name != "validate":
            sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--quiet", action="store_true", help="only report errors")
    return p


def _load(args, forced_solver):
    if args.config is None:
        text, base = "", Path.cwd()
    else:
        text, base = args.config.read_text(encoding="utf-8"), args.config.parent
    if forced_solver is not None:
        lines = [ln for ln in text.splitlines() if ln.split("=")[0].strip() != "solver"]
        text = "\n".join(lines + [f"solver = {forced_solver}"])
        if forced_solver == "relaxation_study" and "regime" not in {
                ln.split("=")[0].strip() for ln in lines}:
            text += "\nregime = maxwell_boltzmann"
        return parse_config(text, base)
    return load_config(args.config)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    forced = {"closure-table": "closure_table", "study": "relaxation_study"}.get(args.command)
    try:
        cfg = _load(args, forced)
    except ConfigError as err:
        for e in err.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        if not args.quiet:
            print(f"{args.config}: valid ({cfg.solver})")
        return EXIT_OK
    from .scenario import run_scenario
    try:
        report = run_scenario(cfg, args.out)
    except ConfigError as err:
        for e in err.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if report.code != EXIT_OK:
        print(f"numeric error: {report.message}", file=sys.stderr)
    elif not args.quiet:
        print(report.message)
    return report.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
