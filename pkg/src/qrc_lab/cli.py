"""Command line entry point: ``qrc-lab <experiment> --config <file> ...``."""

from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrc-lab",
        description="Run a quantum-reservoir experiment and write CSV + manifest.")
    parser.add_argument("experiment", choices=EXPERIMENTS,
                        help="which experiment to run")
    parser.add_argument("--config", required=True,
                        help="JSON config file (see ExperimentConfig fields)")
    parser.add_argument("--seed-base", type=int, default=None,
                        help="replace the config seed list with seed-base..seed-base+k-1")
    parser.add_argument("--out", default=None,
                        help="output directory (default: config output_path)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for grid points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config, experiment=args.experiment)
        if args.seed_base is not None:
            cfg.seeds = list(range(args.seed_base, args.seed_base + len(cfg.seeds)))
        csv_path = run(cfg, out_dir=args.out, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"qrc-lab: config error: {exc}", file=sys.stderr)
        return 2
    print(csv_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
