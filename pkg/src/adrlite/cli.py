"""Command-line entry point: ``adrlite run | dump-space | validate``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .configspace import ConfigSpaceError, build_space, parse_dims
from .phy import AIRTIME_MODES, PhyError, RadioConstants, load_constants
from .scenario import ScenarioError, load_scenario, run_scenario

logger = logging.getLogger("adrlite")


def _apply_overrides(spec, args):
    run_sec = spec.run
    if args.seed is not None:
        run_sec = dataclasses.replace(run_sec, seed=args.seed)
    if args.airtime_mode is not None:
        run_sec = dataclasses.replace(run_sec, airtime_mode=args.airtime_mode)
    spec = dataclasses.replace(spec, run=run_sec)
    if args.ideal_downlink:
        spec = dataclasses.replace(spec, channel=dataclasses.replace(spec.channel, ideal_downlink=True))
    if args.constants:
        radio = load_constants(args.constants)
        spec = dataclasses.replace(
            spec, radio=dataclasses.replace(radio, payload_len=spec.traffic.payload_bytes)
        )
    return spec


def cmd_run(args: argparse.Namespace) -> int:
    spec = _apply_overrides(load_scenario(args.scenario, desk_scale=args.desk_scale), args)
    logger.info(
        "running %s: %d strategies x %d spaces x %d sweep values x %d replicates",
        spec.name,
        len(spec.strategy.names),
        len(spec.config_spaces),
        len(spec.sweep_values()),
        spec.run.replicates,
    )
    table = run_scenario(spec, args.out, jobs=args.jobs, trace=args.trace)
    sys.stdout.write(table.summary_csv())
    if table.failures:
        logger.error("%d cell(s) failed; see %s/failures.json", len(table.failures), args.out)
        return 1
    return 0


def cmd_dump_space(args: argparse.Namespace) -> int:
    radio = load_constants(args.constants) if args.constants else RadioConstants()
    space = build_space(parse_dims(args.dims), radio, args.airtime_mode or "literal")
    sys.stdout.write(space.to_csv())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    spec = load_scenario(args.scenario)
    sys.stdout.write(spec.to_yaml())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adrlite", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file or preset")
    p_run.add_argument("--scenario", required=True, help="YAML file or scenario1..scenario4")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=None, help="master seed override")
    p_run.add_argument("--desk-scale", action="store_true", help="1 simulated day, 5 replicates")
    p_run.add_argument("--airtime-mode", choices=AIRTIME_MODES, default=None)
    p_run.add_argument("--ideal-downlink", action="store_true")
    p_run.add_argument("--trace", action="store_true", help="write per-run attempt and decision CSVs")
    p_run.add_argument("--constants", default=None, help="YAML radio constants override")
    p_run.set_defaults(func=cmd_run)

    p_dump = sub.add_parser("dump-space", help="print the energy-sorted configuration table")
    p_dump.add_argument("--dims", required=True, help="config-1..config-4 or 'sf=7,8;tp=2,14;cf=868.1;cr=4/5'")
    p_dump.add_argument("--airtime-mode", choices=AIRTIME_MODES, default=None)
    p_dump.add_argument("--constants", default=None)
    p_dump.set_defaults(func=cmd_dump_space)

    p_val = sub.add_parser("validate", help="load a scenario and echo it with all defaults")
    p_val.add_argument("--scenario", required=True)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ScenarioError, ConfigSpaceError, PhyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
