"""Serialization of classification and metric results as table, CSV or JSON."""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Mapping, Optional, Sequence

from .aggregation import ReferenceSet, UnitAggregate, mean_t_decimal
from .detection import ClassifiedTweet, cascade_counts, summary

SCHEMA_VERSION = 1

_BOLD = "\x1b[1m"
_RESET = "\x1b[0m"


def use_color(stream) -> bool:
    if "NO_COLOR" in os.environ:
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


def _noun(metric: str) -> str:
    return "retweets" if metric == "t" else "favorites"


def format_table(header: Sequence[str], rows: Sequence[Sequence], right: Sequence[bool] = (),
                 highlight: Sequence[bool] = (), color: bool = False) -> str:
    cells = [[str(h) for h in header]] + [["" if v is None else str(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    right = list(right) + [False] * (len(header) - len(right))
    lines = []
    for n, row in enumerate(cells):
        parts = [c.rjust(w) if right[i] else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))]
        line = "  ".join(parts).rstrip()
        if color and n > 0 and n - 1 < len(highlight) and highlight[n - 1]:
            line = f"{_BOLD}{line}{_RESET}"
        lines.append(line)
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def to_json(doc: Mapping) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


# classification

CLASSIFICATION_COLUMNS = ("no", "id", "unit_id", "author", "date", "tweet", "retweet", "retweet_of", "number_of_retweets")


def classification_rows(classified: Sequence[ClassifiedTweet]) -> list[list]:
    counts = {}
    for table in cascade_counts(classified).values():
        counts.update(table)
    rows = []
    for no, c in enumerate(classified, start=1):
        r = c.record
        rows.append([
            no, r.id, r.unit_id, r.author, r.timestamp.isoformat(),
            "" if c.is_retweet else 1, 1 if c.is_retweet else "",
            c.retweet_of or "", "" if c.is_retweet else counts[r.id],
        ])
    return rows


def summary_line(classified: Sequence[ClassifiedTweet]) -> str:
    originals, retweets = summary(classified)
    return f"originals={originals} retweets={retweets}"


def classification_json(classified: Sequence[ClassifiedTweet]) -> list[dict]:
    out = []
    for row in classification_rows(classified):
        d = dict(zip(CLASSIFICATION_COLUMNS, row))
        d["kind"] = "retweet" if d.pop("retweet") else "original"
        d.pop("tweet")
        d["retweet_of"] = d["retweet_of"] or None
        d["number_of_retweets"] = None if d["number_of_retweets"] == "" else d["number_of_retweets"]
        out.append(d)
    return out


def summary_json(classified: Sequence[ClassifiedTweet]) -> dict:
    originals, retweets = summary(classified)
    return {"records": len(classified), "originals": originals, "retweets": retweets}


def render_detect(classified: Sequence[ClassifiedTweet], output: str) -> str:
    rows = classification_rows(classified)
    if output == "csv":
        return to_csv(CLASSIFICATION_COLUMNS, rows)
    if output == "json":
        return to_json({
            "schema_version": SCHEMA_VERSION,
            "command": "detect",
            "summary": summary_json(classified),
            "classification": classification_json(classified),
        })
    header = ("No.", "ID", "Author", "Date", "Tweet", "Retweet", "Retweet of", "Number of retweets")
    table_rows = [[r[0], r[1], r[3], r[4], r[5], r[6], r[7], r[8]] for r in rows]
    body = format_table(header, table_rows, right=(True, False, False, False, True, True, False, True))
    return body + summary_line(classified) + "\n"


# aggregates

def core_counts(a: UnitAggregate) -> str:
    return "/".join(str(row.count) for row in a.report.core)


def per_publication_cell(a: UnitAggregate) -> str:
    return ";".join(f"{pub}={t}" for pub, t in a.per_publication_t.items())


def _percentile_cell(p: Optional[float]):
    return "" if p is None else repr(p)


def aggregate_columns(aggregation: str) -> list[str]:
    cols = ["unit_id", "metric", "tweets", "retweets"]
    if aggregation in ("pooled", "both"):
        cols += ["pooled", "core_counts"]
    if aggregation in ("per-publication", "both"):
        cols += ["publications", "per_publication", "mean", "second_order"]
    return cols + ["percentile", "missing_favorites"]


def aggregate_row(a: UnitAggregate, columns: Sequence[str], display: bool = False) -> list:
    values = {
        "unit_id": a.unit_id,
        "metric": a.metric,
        "tweets": a.n_tweets,
        "retweets": a.n_retweets,
        "pooled": a.pooled_t,
        "core_counts": core_counts(a),
        "publications": len(a.per_publication_t),
        "per_publication": per_publication_cell(a),
        "mean": str(mean_t_decimal(a.per_publication_t.values())),
        "second_order": a.second_order_t,
        "percentile": (f"{a.percentile:.4f}" if a.percentile is not None else "")
        if display else _percentile_cell(a.percentile),
        "missing_favorites": a.missing_favorites,
    }
    return [values[c] for c in columns]


def rank_table_json(a: UnitAggregate) -> list[dict]:
    return [
        {"rank": r.rank, "count": r.count, "in_core": r.in_core, "tweet_id": r.tweet_id}
        for r in a.report.rank_table
    ]


def aggregate_json(a: UnitAggregate, with_rank_table: bool = True) -> dict:
    doc = {
        "unit_id": a.unit_id,
        "metric": a.metric,
        "tweets": a.n_tweets,
        "retweets": a.n_retweets,
        "pooled": a.pooled_t,
        "core_ranks": sorted(a.report.core_ranks),
        "core_counts": [r.count for r in a.report.core],
        "per_publication": dict(a.per_publication_t),
        "mean": float(mean_t_decimal(a.per_publication_t.values())),
        "second_order": a.second_order_t,
        "percentile": a.percentile,
        "missing_favorites": a.missing_favorites,
    }
    if with_rank_table:
        doc["rank_table"] = rank_table_json(a)
    return doc


def render_compute(aggregates: Sequence[UnitAggregate], output: str, aggregation: str = "both",
                   metric: str = "t") -> str:
    cols = aggregate_columns(aggregation)
    if output == "csv":
        return to_csv(cols, [aggregate_row(a, cols) for a in aggregates])
    if output == "json":
        return to_json({
            "schema_version": SCHEMA_VERSION,
            "command": "compute",
            "metric": metric,
            "aggregation": aggregation,
            "units": [aggregate_json(a, with_rank_table=False) for a in aggregates],
        })
    numeric = {"tweets", "retweets", "pooled", "publications", "mean", "second_order", "percentile",
               "missing_favorites"}
    return format_table(cols, [aggregate_row(a, cols, display=True) for a in aggregates],
                        right=[c in numeric for c in cols])


# rank tables

RANK_COLUMNS = ("unit_id", "rank", "count", "core", "tweet_id")


def rank_rows(aggregates: Sequence[UnitAggregate]) -> list[list]:
    return [
        [a.unit_id, r.rank, r.count, r.rank if r.in_core else "-", r.tweet_id]
        for a in aggregates
        for r in a.report.rank_table
    ]


def render_core(aggregates: Sequence[UnitAggregate], output: str, metric: str = "t", color: bool = False) -> str:
    if output == "csv":
        return to_csv(RANK_COLUMNS, rank_rows(aggregates))
    if output == "json":
        return to_json({
            "schema_version": SCHEMA_VERSION,
            "command": "core",
            "metric": metric,
            "units": [
                {"unit_id": a.unit_id, "metric": a.metric, "pooled": a.pooled_t,
                 "core_ranks": sorted(a.report.core_ranks), "rank_table": rank_table_json(a)}
                for a in aggregates
            ],
        })
    header = ("Tweetrank", f"Number of {_noun(metric)}", f"{metric} core tweets")
    blocks = []
    for a in aggregates:
        rows = [[r.rank, r.count, r.rank if r.in_core else "-"] for r in a.report.rank_table]
        title = f"{a.unit_id}: {metric} = {a.pooled_t}\n"
        blocks.append(title + format_table(header, rows, right=(True, True, True),
                                           highlight=[r.in_core for r in a.report.rank_table], color=color))
    return "\n".join(blocks)


# percentiles

PERCENTILE_COLUMNS = ("unit_id", "value", "percentile")


def render_percentile(ref: ReferenceSet, ranks: Mapping[str, float], output: str) -> str:
    rows = [[u, ref.members[u], ranks[u]] for u in ref.members]
    if output == "csv":
        return to_csv(PERCENTILE_COLUMNS, [[u, v, repr(p)] for u, v, p in rows])
    if output == "json":
        return to_json({
            "schema_version": SCHEMA_VERSION,
            "command": "percentile",
            "reference_set": ref.label,
            "percentiles": [{"unit_id": u, "value": v, "percentile": p} for u, v, p in rows],
        })
    return format_table(PERCENTILE_COLUMNS, [[u, v, f"{p:.4f}"] for u, v, p in rows], right=(False, True, True))


def report_json(classified: Sequence[ClassifiedTweet], aggregates: Sequence[UnitAggregate], metric: str,
                window=None, ref: Optional[ReferenceSet] = None, ranks: Optional[Mapping[str, float]] = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "report",
        "metric": metric,
        "aggregation": "both",
        "window": None if window is None else {"from": window[0].isoformat(), "to": window[1].isoformat()},
        "summary": summary_json(classified),
        "classification": classification_json(classified),
        "units": [aggregate_json(a) for a in aggregates],
    }
    if ref is not None and ranks is not None:
        doc["reference_set"] = ref.label
        doc["percentiles"] = [{"unit_id": u, "value": ref.members[u], "percentile": ranks[u]} for u in ref.members]
    return to_json(doc)
