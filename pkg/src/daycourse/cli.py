"""Command-line interface: one subcommand per pipeline stage, plus `run`.

Every configuration key is exposed as a `--key` flag that overrides the
config file. Exit codes identify the failing stage: 1 for configuration or
usage problems, then 2..8 for fetch, annotate, prep, model, sentiment,
series, correlate in that order.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .errors import ConfigError, DaycourseError, PipelineStageError
from .pipeline import STAGES, PipelineConfig, load_config, run_pipeline

EXIT_CONFIG = 1
_STAGE_EXIT = {stage: index + 2 for index, stage in enumerate(STAGES)}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "flairs":
            help_text = "comma-separated flair whitelist"
        elif f.name == "exclude":
            help_text = "comma-separated lexicon terms to exclude"
        else:
            help_text = f"override config key {f.name}"
        parser.add_argument(flag, dest=f.name, metavar="VALUE", help=help_text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="daycourse",
        description="Model day-by-day topic and emotion trends in forum illness diaries.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "fetch": "download or read raw posts and write posts.jsonl",
        "annotate": "filter by flair and split posts into day segments",
        "prep": "tokenize segments into a bag-of-words corpus",
        "model": "fit the nested bipartite blockmodel and extract topics",
        "sentiment": "score per-day emotion category proportions",
        "series": "assemble day series and smoothed curves",
        "correlate": "correlate series, cluster them, and embed them in 2-D",
        "run": "run every stage in order",
    }
    for name, description in descriptions.items():
        sub = subparsers.add_parser(name, help=description, description=description)
        _add_config_flags(sub)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides = {}
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stages = list(STAGES) if args.command == "run" else [args.command]
    try:
        manifest = run_pipeline(config, stages)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _STAGE_EXIT[exc.stage]
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DaycourseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for stage in stages:
        entry = manifest["stages"].get(stage, {})
        counts = entry.get("counts", {})
        summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        print(f"{stage}: {entry.get('status', '?')} ({entry.get('seconds', 0)}s) {summary}")
    print(f"artifacts in {config.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
