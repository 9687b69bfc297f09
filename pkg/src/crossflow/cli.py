"""Command-line entry point: ``crossflow run | list | map | validate``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import crossflow
from crossflow.config.parser import parse_config, render_config
from crossflow.config.presets import get_preset, list_presets
from crossflow.config.scenario import Scenario
from crossflow.core.exceptions import ConfigError, ParameterError, SolverAbortError
from crossflow.core.params import validate_cfl, validate_entropy_regime
from crossflow.experiments.runner import ScenarioRunner
from crossflow.stability.region import RegionMethod

logger = logging.getLogger(__name__)

OUT_ENV = "CROSSFLOW_OUT"
DEFAULT_OUT = "runs"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


def resolve_out_dir(cli_value: Optional[str], scenario: Scenario) -> Path:
    """``--out-dir`` wins over ``$CROSSFLOW_OUT``, which wins over the scenario's ``out_dir``."""
    return Path(cli_value or os.environ.get(OUT_ENV) or scenario.out_dir or DEFAULT_OUT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossflow",
        description="Simulate and analyse crossing pedestrian flows with side-stepping.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {crossflow.__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file or preset")
    p_run.add_argument("scenario", help="path to a key = value scenario file, or a preset name")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario's random seed")
    p_run.add_argument("--out-dir", default=None, help=f"output root (default: ${OUT_ENV}, then the scenario, then ./{DEFAULT_OUT})")
    p_run.add_argument(
        "--snapshots-every",
        type=float,
        default=None,
        help="snapshot cadence in steps (lattice) or model time (PDE); 0 disables",
    )
    p_run.add_argument("--no-images", action="store_true", help="skip greyscale images of 2D snapshots")

    sub.add_parser("list", help="list the built-in presets")

    p_map = sub.add_parser("map", help="write a stability raster of the density simplex")
    p_map.add_argument("--resolution", type=int, default=None, help="samples per axis (>= 32)")
    p_map.add_argument("--epsilon", type=float, default=None, help="diffusion scale of the regularized system")
    p_map.add_argument("--method", choices=[m.value for m in RegionMethod], default=None)
    p_map.add_argument("--out-dir", default=None)

    p_val = sub.add_parser("validate", help="check a scenario file and print it with all defaults filled in")
    p_val.add_argument("scenario", help="path to a scenario file, or a preset name")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_config(args.scenario)
    runner = ScenarioRunner(
        resolve_out_dir(args.out_dir, scenario),
        seed=args.seed,
        snapshot_every=args.snapshots_every,
        images=not args.no_images,
    )
    report = runner.run(scenario)
    print(report.out_dir)
    return EXIT_OK


def _cmd_list(args: argparse.Namespace) -> int:
    presets = list_presets()
    width = max(len(name) for name, _ in presets)
    for name, description in presets:
        print(f"{name:<{width}}  {description}")
    return EXIT_OK


def _cmd_map(args: argparse.Namespace) -> int:
    scenario = get_preset("stability_map")
    if args.epsilon is not None:
        scenario = replace(scenario, params=replace(scenario.params, epsilon=args.epsilon))
    if args.resolution is not None:
        scenario = replace(scenario, resolution=args.resolution)
    if args.method is not None:
        scenario = replace(scenario, method=RegionMethod(args.method))
    report = ScenarioRunner(resolve_out_dir(args.out_dir, scenario)).run(scenario)
    print(report.out_dir / "region_map.csv")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = parse_config(args.scenario)
    p = scenario.effective_params
    sys.stdout.write(render_config(scenario))
    print(f"# cfl_ok = {str(validate_cfl(p)).lower()}")
    print(f"# entropy_regime_ok = {str(validate_entropy_regime(p).ok).lower()}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "list": _cmd_list,
    "map": _cmd_map,
    "validate": _cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"crossflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverAbortError as exc:
        print(f"crossflow: solver aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
