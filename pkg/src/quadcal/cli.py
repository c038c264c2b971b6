"""Command-line front end: ``quadcal <experiment> --config <file>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments

EXPERIMENTS = ("analytic_beta", "genz2d", "genz5d", "genz_dim", "calibrate")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    config = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(config, dict):
        raise SystemExit("config file must contain a JSON object")
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadcal",
        description="Adaptive implicit-quadrature calibration experiments.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--repeats", type=int, help="override the repeat count")
    parser.add_argument("--out", help="run directory for CSV/JSONL/rule outputs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.repeats is not None:
        config["repeats"] = args.repeats
    out_dir = args.out or config.get("out")

    if args.experiment == "analytic_beta":
        report = experiments.run_analytic_beta(config, out_dir)
    elif args.experiment in ("genz2d", "genz5d", "genz_dim"):
        report = experiments.run_genz(config, args.experiment, out_dir)
    else:
        report = experiments.run_calibrate(config, out_dir)

    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
