"""Command-line entry point: one subcommand per stage plus ``all``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from ._accel import backend
from .pipeline import STAGES, RunConfig, StageError, run_pipeline, run_stage

EXIT_USAGE = 2
EXIT_STAGE = 1

_INT_KEYS = {"seed", "jobs", "min_hashtag_count", "top_k", "panel_n", "cv_folds", "n_estimators",
             "max_tfidf_features"}
_TUPLE_KEYS = {"stages", "seasonal_themes"}
_BOOL_KEYS = {"hashtag_substring"}
_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"extra"}


def parse_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use underscores."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    out = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{p}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{p}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key, value):
    if key in _INT_KEYS:
        return int(value)
    if key in _TUPLE_KEYS:
        return tuple(v.strip() for v in value.split(",") if v.strip())
    if key in _BOOL_KEYS:
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {value!r}")
    return value


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="text corpus CSV (id,text)")
    p.add_argument("--t4sa", help="sentiment CSV (TWID,NEG,NEU,POS)")
    p.add_argument("--keywords", help="fashion keyword list (one per line)")
    p.add_argument("--taxonomy", help="theme taxonomy file")
    p.add_argument("--seed", type=int, help="root seed (default 42)")
    p.add_argument("--rubric", choices=("original", "improved"), help="sentiment rubric (default improved)")
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--jobs", type=int, help="worker processes for per-theme stages (default: CPU count)")
    p.add_argument("--stages", help="comma-separated subset of stages for 'all'")
    p.add_argument("--config", help="key = value config file; command-line flags take precedence")
    p.add_argument("--hashtag-substring", action="store_true", default=None,
                   help="also match keywords inside hashtags")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="fashion-trends",
        description="Fashion trend analysis: sentiment, weekly series, trends, forecasts, causality, panels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend()})")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "ingest": "merge text and sentiment files, clean, filter to fashion",
        "themes": "tag themes, hashtag frequency and co-occurrence",
        "sentiment": "compound scores, category distributions, hashtag sentiment",
        "series": "synthetic weekly timestamps and per-theme weekly series",
        "decompose": "additive seasonal decomposition (period 13)",
        "trends": "linear trend validation and labels",
        "forecast": "(S)ARIMA grid search and 12-week forecasts",
        "causality": "pairwise Granger tests and causal network",
        "classify": "TF-IDF + random forest sentiment classifier, cross-validated",
        "panels": "synthetic platform and brand sentiment panels",
        "report": "summary.json and tidy plot data",
        "all": "run every stage (or --stages) in order",
    }
    for name in STAGES + ("all",):
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def config_from_args(args) -> RunConfig:
    values = parse_config_file(args.config) if args.config else {}
    for key in ("input", "t4sa", "keywords", "taxonomy", "seed", "rubric", "out", "jobs", "hashtag_substring"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.stages is not None:
        values["stages"] = _coerce("stages", args.stages)
    return RunConfig(**values)


def _check_inputs(cfg: RunConfig, command: str):
    """Fail fast, before any work, when a named input file is missing."""
    names = ["keywords", "taxonomy"]
    if command == "ingest" or (command == "all" and "ingest" in cfg.stages):
        names = ["input", "t4sa"] + names
    for name in names:
        path = getattr(cfg, name)
        if path is not None and not Path(path).is_file():
            raise FileNotFoundError(f"--{name.replace('_', '-')}: file not found: {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        _check_inputs(cfg, args.command)
    except (FileNotFoundError, ValueError) as exc:
        print(f"fashion-trends: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "all":
            run_pipeline(cfg)
        else:
            run_stage(args.command, cfg)
    except StageError as exc:
        print(f"fashion-trends: error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    print(f"wrote {args.command} artifacts to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
