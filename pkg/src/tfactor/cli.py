"""Command-line front end: ``tfactor {detect,compute,core,percentile,report}``.

Exit codes: 0 success, 1 validation or parse error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .aggregation import aggregate, attach_percentiles, load_reference_set, percentile_ranks, resolve_reference_set
from .detection import classify
from .errors import ConfigError, ValidationError
from .ingestion import FORMATS, apply_window, load
from .render import (
    CLASSIFICATION_COLUMNS,
    aggregate_columns,
    aggregate_row,
    classification_rows,
    render_compute,
    render_core,
    render_detect,
    render_percentile,
    report_json,
    summary_line,
    to_csv,
    use_color,
)

logger = logging.getLogger("tfactor")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _date(value: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfactor", description="h-type impact indices over tweet datasets")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p, metric=True):
        p.add_argument("--input", action="append", required=True, metavar="PATH",
                       help="tweet file (repeatable)")
        p.add_argument("--format", choices=FORMATS, help="input format (default: from file extension)")
        p.add_argument("--from", dest="start", type=_date, metavar="DATE", help="first day kept (inclusive)")
        p.add_argument("--to", dest="end", type=_date, metavar="DATE", help="last day kept (inclusive)")
        if metric:
            p.add_argument("--metric", choices=("t", "f"), default="t")
            p.add_argument("--group-by", default="unit_id", metavar="COLUMN",
                           help="column gathering publications into units (default: unit_id)")
            p.add_argument("--jobs", type=int, default=1, help="worker threads for per-unit computation")

    def output_arg(p):
        p.add_argument("--output", choices=("table", "csv", "json"), default="table")

    p = sub.add_parser("detect", help="classify tweets and count retweets per original")
    data_args(p, metric=False)
    output_arg(p)

    p = sub.add_parser("compute", help="per-unit pooled, per-publication, mean and second-order factors")
    data_args(p)
    p.add_argument("--aggregation", choices=("pooled", "per-publication", "both"), default="both")
    p.add_argument("--reference-set", metavar="PATH")
    output_arg(p)

    p = sub.add_parser("core", help="rank table with core membership for each unit")
    data_args(p)
    output_arg(p)

    p = sub.add_parser("percentile", help="percentile ranks within a reference set")
    p.add_argument("--reference-set", required=True, metavar="PATH")
    p.add_argument("--input", action="append", metavar="PATH",
                   help="tweet file supplying unit values (optional)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--from", dest="start", type=_date, metavar="DATE")
    p.add_argument("--to", dest="end", type=_date, metavar="DATE")
    p.add_argument("--metric", choices=("t", "f"), default="t")
    p.add_argument("--group-by", default="unit_id", metavar="COLUMN")
    p.add_argument("--jobs", type=int, default=1)
    output_arg(p)

    p = sub.add_parser("report", help="write classification, aggregates, rank tables and JSON report")
    data_args(p)
    p.add_argument("--reference-set", metavar="PATH")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    return parser


def _dataset(args):
    keep = () if getattr(args, "group_by", "unit_id") == "unit_id" else (args.group_by,)
    d = load(args.input, args.format, keep=keep)
    if args.start is not None or args.end is not None:
        d = apply_window(d, args.start or date.min, args.end or date.max)
    if getattr(args, "metric", "t") == "f" and not d.has_favorites:
        raise ConfigError("--metric f needs a favorite_count column in at least one input")
    if getattr(args, "jobs", 1) < 1:
        raise ConfigError("--jobs must be at least 1")
    return d


def _aggregates(args):
    d = _dataset(args)
    classified = classify(d)
    return d, classified, aggregate(classified, args.metric, args.group_by, args.jobs)


def cmd_detect(args, out) -> int:
    classified = classify(_dataset(args))
    out.write(render_detect(classified, args.output))
    if args.output != "table":
        print(summary_line(classified), file=sys.stderr)
    return EXIT_OK


def cmd_compute(args, out) -> int:
    _, _, aggs = _aggregates(args)
    if args.reference_set:
        attach_percentiles(aggs, load_reference_set(args.reference_set))
    out.write(render_compute(aggs, args.output, args.aggregation, args.metric))
    return EXIT_OK


def cmd_core(args, out) -> int:
    _, _, aggs = _aggregates(args)
    out.write(render_core(aggs, args.output, args.metric, color=use_color(out) and args.output == "table"))
    return EXIT_OK


def cmd_percentile(args, out) -> int:
    ref = load_reference_set(args.reference_set)
    computed = {}
    if args.input:
        _, _, aggs = _aggregates(args)
        computed = {a.unit_id: a.pooled_t for a in aggs}
    ref = resolve_reference_set(ref, computed)
    ranks = percentile_ranks(ref)
    out.write(render_percentile(ref, ranks, args.output))
    return EXIT_OK


def cmd_report(args, out) -> int:
    d, classified, aggs = _aggregates(args)
    ref = ranks = None
    if args.reference_set:
        ref = resolve_reference_set(load_reference_set(args.reference_set), {a.unit_id: a.pooled_t for a in aggs})
        ranks = attach_percentiles(aggs, ref)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out_dir}: {exc.strerror}") from None
    cols = aggregate_columns("both")
    files = {
        "classification.csv": to_csv(CLASSIFICATION_COLUMNS, classification_rows(classified)),
        "aggregates.csv": to_csv(cols, [aggregate_row(a, cols) for a in aggs]),
        "rank_tables.csv": render_core(aggs, "csv", args.metric),
        "report.json": report_json(classified, aggs, args.metric, d.window, ref, ranks),
    }
    for name, text in files.items():
        (out_dir / name).write_bytes(text.encode("utf-8"))
        out.write(f"wrote {out_dir / name}\n")
    out.write(summary_line(classified) + "\n")
    return EXIT_OK


COMMANDS = {
    "detect": cmd_detect,
    "compute": cmd_compute,
    "core": cmd_core,
    "percentile": cmd_percentile,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"tfactor: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"tfactor: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
