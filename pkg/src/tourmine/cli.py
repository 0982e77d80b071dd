"""Command-line interface.

One subcommand per pipeline stage plus `run` (everything) and `synth`
(synthetic data). Stage subcommands read inputs from and write artifacts to
the shared output directory, so stages can be re-run individually.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback

from . import __version__
from .errors import DataError, StageError
from .measures import (
    MEASURE_NAMES,
    WEIGHT_MEASURES,
    format_table,
    measure_rules,
    measure_table,
)
from .pipeline import (
    STAGES,
    PipelineConfig,
    load_config_file,
    run_pipeline,
    verify_mining,
)
from .rules import read_rules_csv
from .synth import SynthConfig, write_synthetic_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures reported through our exit-code scheme."""

    def error(self, message):
        raise UsageError(message)


def _auto_or_int(value: str):
    return None if value == "auto" else int(value)


def _add_stage_flags(parser: argparse.ArgumentParser, *groups: str) -> None:
    """Register config-backed flags; defaults stay None so the config layer
    can tell 'not given' apart from an explicit value."""
    if "ingest" in groups:
        parser.add_argument("--input", help="raw review file")
        parser.add_argument("--format", dest="input_format", choices=("csv", "jsonl"))
        parser.add_argument("--max-bad-fraction", type=float, dest="max_bad_fraction")
    if "trips" in groups:
        parser.add_argument("--max-gap-days", type=int, dest="max_gap_days")
        parser.add_argument("--min-trip-len", type=int, dest="min_trip_len")
        parser.add_argument(
            "--dedup-consecutive",
            action=argparse.BooleanOptionalAction,
            dest="dedup_consecutive",
            default=None,
        )
    if "mine" in groups:
        parser.add_argument("--min-support-count", type=int, dest="min_support_count")
    if "graph" in groups:
        parser.add_argument(
            "--weight-measure", choices=WEIGHT_MEASURES, dest="weight_measure"
        )
        parser.add_argument(
            "--k-mainstream",
            type=_auto_or_int,
            dest="k_mainstream",
            metavar="auto|N",
        )
    if "spheres" in groups:
        parser.add_argument("--klosgen-threshold", type=float, dest="klosgen_threshold")
        parser.add_argument(
            "--sphere-distance",
            type=_auto_or_int,
            dest="sphere_distance",
            metavar="auto|N",
        )
    if "cluster" in groups:
        parser.add_argument("--resolution", type=float, dest="resolution")
        parser.add_argument("--seed", type=int, dest="seed")
        parser.add_argument("--min-cluster-size", type=int, dest="min_cluster_size")
        parser.add_argument("--best-of-n", type=int, dest="best_of_n")
        parser.add_argument("--symmetrize", choices=("mean", "max", "min"), dest="symmetrize")


def build_parser() -> _Parser:
    parser = _Parser(prog="tourmine", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tourmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def stage_parser(name: str, help_text: str, *flag_groups: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", dest="output_dir", help="artifact directory")
        p.add_argument("--config", help="config file (key=value lines or JSON)")
        _add_stage_flags(p, *flag_groups)
        return p

    stage_parser("ingest", "parse and normalize raw reviews", "ingest")
    stage_parser("trips", "segment and merge trips into sequences", "trips")
    mine = stage_parser("mine", "mine direct-follow rules", "mine")
    mine.add_argument(
        "--verify", action="store_true", help="cross-check against the brute-force scan"
    )
    measure = stage_parser("measure", "compute interest measures")
    measure.add_argument("--top", type=int, default=0, help="print the top-k rule table")
    measure.add_argument("--by", default="klosgen", choices=MEASURE_NAMES)
    stage_parser("graph", "build the movement graph and pick mainstream nodes", "graph")
    stage_parser("spheres", "threshold the graph and compute spheres", "spheres")
    stage_parser("similarity", "build the sphere similarity matrix")
    stage_parser("cluster", "detect and profile communities", "cluster")

    run = stage_parser(
        "run",
        "run the whole pipeline",
        "ingest",
        "trips",
        "mine",
        "graph",
        "spheres",
        "cluster",
    )
    run.add_argument("--from-stage", choices=STAGES, default="ingest")

    synth = sub.add_parser("synth", help="generate a synthetic review dataset")
    synth.add_argument("--output", required=True, help="CSV file to write")
    synth.add_argument("--n-users", type=int, default=100)
    synth.add_argument("--n-locations", type=int, default=20)
    synth.add_argument("--n-communities", type=int, default=2)
    synth.add_argument("--intra-odds", type=float, default=20.0)
    synth.add_argument("--trips-per-user", type=int, default=2)
    synth.add_argument("--trip-len-min", type=int, default=3)
    synth.add_argument("--trip-len-max", type=int, default=5)
    synth.add_argument("--seed", type=int, default=0)
    return parser


_CONFIG_KEYS = {f.name for f in dataclasses.fields(PipelineConfig)}


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    base = PipelineConfig()
    if getattr(args, "config", None):
        base = PipelineConfig.from_file(args.config)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key in _CONFIG_KEYS and value is not None
    }
    return base.with_overrides(overrides)


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "synth":
        config = SynthConfig(
            n_users=args.n_users,
            n_locations=args.n_locations,
            n_communities=args.n_communities,
            intra_odds=args.intra_odds,
            trips_per_user=args.trips_per_user,
            trip_len_min=args.trip_len_min,
            trip_len_max=args.trip_len_max,
            seed=args.seed,
        )
        write_synthetic_csv(config, args.output)
        print(f"wrote synthetic reviews to {args.output}")
        return EXIT_OK

    config = _config_from_args(args)
    if args.command == "run":
        manifest = run_pipeline(config, start_stage=args.from_stage)
        print(json.dumps(manifest.stats, ensure_ascii=False, indent=2))
        return EXIT_OK

    # Single stage: reuse the pipeline runner for exactly one stage.
    from pathlib import Path

    from . import pipeline as pl

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    extra: dict = {}
    if args.command == "ingest":
        pl.stage_ingest(config, outdir)
    elif args.command == "trips":
        pl.stage_trips(config, outdir, extra)
    elif args.command == "mine":
        pl.stage_mine(config, outdir)
        if args.verify:
            if verify_mining(outdir, config.min_support_count):
                print("verify: mined rules match the brute-force scan")
            else:
                print("verify: MISMATCH between miner and brute-force scan")
                return EXIT_INTERNAL
    elif args.command == "measure":
        pl.stage_measure(config, outdir)
        if args.top > 0:
            measured = measure_rules(
                read_rules_csv(outdir / pl.ARTIFACTS["rules"])
            )
            print(format_table(measure_table(measured, args.top, args.by)))
    elif args.command == "graph":
        pl.stage_graph(config, outdir)
    elif args.command == "spheres":
        pl.stage_spheres(config, outdir)
    elif args.command == "similarity":
        pl.stage_similarity(config, outdir, extra)
    elif args.command == "cluster":
        pl.stage_cluster(config, outdir)
    else:  # pragma: no cover - argparse enforces choices
        raise UsageError(f"unknown command {args.command}")
    print(f"{args.command}: artifacts written to {outdir}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"stage failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
