"""Command line entry point.

One subcommand per stage plus `all` for the full run. Values come from an
optional key=value config file, overridden by flags. Every stage failure
maps to its own exit code so shell callers can tell where a run died.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from sdgpipe.errors import ConfigError, PipelineError, StageError
from sdgpipe.pipeline import (
    FULL_RUN,
    PipelineConfig,
    apply_overrides,
    load_config,
    run_pipeline,
    run_stage,
    write_manifest,
)

USAGE_EXIT = 1
STAGE_EXIT = {
    "ingest": 2,
    "pca": 3,
    "tsne": 4,
    "cluster": 5,
    "correlate": 6,
    "dynamics": 7,
    "figures": 8,
    "scan-eps": 9,
}

_STAGE_HELP = {
    "ingest": "load, validate, filter, and standardize the panel",
    "pca": "fit the component basis and project observations",
    "tsne": "embed component coordinates into the 2-d map",
    "cluster": "density-cluster the map and derive memberships",
    "scan-eps": "tabulate cluster count and noise share over an eps grid",
    "correlate": "goal correlation matrices, pooled and per cluster",
    "dynamics": "distance-to-ideal distributions, trends, extrapolation",
    "figures": "render SVG figures from existing artifacts",
    "all": "run every stage in order and write the manifest",
}


def _csv_ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(p.strip()) for p in text.split(",")) if text else ()


def _csv_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    return tuple(float(p.strip()) for p in text.split(",")) if text else ()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--panel", type=Path, help="input panel CSV")
    parser.add_argument("--out", type=Path, help="artifact output directory")
    parser.add_argument("--gdp", type=Path, help="optional country GDP table")
    parser.add_argument("--perplexity", type=float)
    parser.add_argument("--pca-components", type=int, dest="pca_components")
    parser.add_argument("--embed-dim", type=int, dest="embed_dim", choices=(2, 3))
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--learning-rate", type=float, dest="learning_rate")
    parser.add_argument("--momentum-early", type=float, dest="momentum_early")
    parser.add_argument("--momentum-late", type=float, dest="momentum_late")
    parser.add_argument("--momentum-switch", type=int, dest="momentum_switch")
    parser.add_argument("--exaggeration", type=float)
    parser.add_argument("--exaggeration-until", type=int, dest="exaggeration_until")
    parser.add_argument("--record-every", type=int, dest="record_every")
    parser.add_argument("--init-scale", type=float, dest="init_scale")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--min-pts", type=int, dest="min_pts")
    parser.add_argument("--eps-grid", type=_csv_floats, dest="eps_grid",
                        metavar="E1,E2,...")
    parser.add_argument("--exclude-years", type=_csv_ints, dest="exclude_years",
                        metavar="Y1,Y2,...")
    parser.add_argument("--distribution-years", type=_csv_ints,
                        dest="distribution_years", metavar="Y1,Y2,...")
    parser.add_argument("--per-year", action=argparse.BooleanOptionalAction,
                        default=None, dest="per_year_correlations",
                        help="also write one correlation matrix per year")
    parser.add_argument("--extrapolate-to", type=int, dest="extrapolate_to")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdgpipe",
        description="Panel standardization, PCA, t-SNE, density clustering, "
        "and distance-to-ideal dynamics over country indicator data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in _STAGE_HELP.items():
        stage_parser = sub.add_parser(name, help=blurb)
        _add_common(stage_parser)
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        key: getattr(args, key)
        for key in (
            "panel", "out", "gdp", "perplexity", "pca_components", "embed_dim",
            "iterations", "learning_rate", "momentum_early", "momentum_late",
            "momentum_switch", "exaggeration", "exaggeration_until",
            "record_every", "init_scale", "seed", "eps", "min_pts", "eps_grid",
            "exclude_years", "distribution_years", "per_year_correlations",
            "extrapolate_to",
        )
    }
    return apply_overrides(config, **overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "all":
            manifest = run_pipeline(config)
            print(f"pipeline complete; manifest at {manifest}")
        else:
            written, seconds = run_stage(args.command, config)
            write_manifest(config, written,
                           [{"name": args.command, "seconds": round(seconds, 3)}])
            print(
                f"stage {args.command}: wrote {len(written)} file(s) "
                f"in {seconds:.2f}s to {config.out}"
            )
        return 0
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT.get(exc.stage, USAGE_EXIT)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
