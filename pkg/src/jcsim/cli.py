"""Command-line entry point.

Each subcommand runs one scenario kind from an INI config. The kind may
be omitted in the config, in which case the subcommand implies it; a
conflicting kind is a config error. Reports are delimited tables plus
rendered figures; --no-figures keeps the run text-only.

Exit codes: 0 full success, 2 partial failure during the run, 1 for
configuration problems.
"""

import argparse
import sys

from .errors import ConfigError, JcsimError, ParameterError
from .harness import load_scenario, run_scenario

_SUBCOMMANDS = {
    "steady": "steady_scan",
    "scan": "steady_scan",
    "wigner": "wgrid",
    "husimi": "qgrid",
    "traj": "trajectory",
    "semiclassical": "semiclassical_curve",
    "spectrum": "spectrum_table",
    "boundary": "boundary_search",
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="jcsim")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a {kind} scenario")
        p.add_argument("--config", required=True, help="INI scenario file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    expected = _SUBCOMMANDS[args.command]
    overrides = {"out": args.out, "workers": args.workers, "seed": args.seed}
    try:
        import configparser
        probe = configparser.ConfigParser()
        if not probe.read(args.config):
            raise ConfigError(f"cannot read config {args.config!r}")
        if probe.sections() == ["scenario"] and \
                "kind" not in probe["scenario"]:
            overrides["kind"] = expected
        scenario = load_scenario(args.config, overrides)
        if scenario.kind != expected:
            raise ConfigError(
                f"config kind {scenario.kind!r} does not match "
                f"subcommand {args.command!r}")
        if args.command == "steady" and "sweep_points" in scenario.config:
            raise ConfigError("steady is single-point; use scan for sweeps")
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        result = run_scenario(scenario)
    except JcsimError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    if not args.no_figures:
        from .figures import render_outputs
        try:
            for png in render_outputs(result):
                print(png)
        except Exception as exc:  # rendering must never lose computed data
            print(f"figure rendering failed: {exc}", file=sys.stderr)
    for table in result.tables:
        print(table)
    print(result.manifest_path)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
