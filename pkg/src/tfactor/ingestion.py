"""Reading tweet records from CSV and JSON-lines sources."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

from .errors import ConfigError, IngestError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("id", "author", "date", "text", "unit_id")
OPTIONAL_COLUMNS = ("favorite_count", "retweet_of")
COLUMNS = REQUIRED_COLUMNS + OPTIONAL_COLUMNS

CSV = "csv"
JSONL = "jsonl"
FORMATS = (CSV, JSONL)

_EXTENSIONS = {".csv": CSV, ".jsonl": JSONL, ".ndjson": JSONL, ".json": JSONL}


@dataclass(frozen=True)
class TweetRecord:
    id: str
    author: str
    timestamp: date
    text: str
    unit_id: str
    favorite_count: Optional[int] = None
    declared_retweet_of: Optional[str] = None
    # extra columns retained on request, e.g. a grouping key
    extra: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class Dataset:
    records: tuple[TweetRecord, ...] = ()
    window: Optional[tuple[date, date]] = None
    # True when any source carried a favorite_count column
    has_favorites: bool = field(default=False, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def parse_timestamp(value: str) -> date:
    """ISO-8601 date or date-time, reduced to its calendar day."""
    value = value.strip()
    if len(value) == 10:
        return date.fromisoformat(value)
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value).date()


def _parse_count(raw, line: int, source: str | None) -> Optional[int]:
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = raw.strip()
        if raw == "":
            return None
        if not raw.lstrip("-").isdigit():
            raise IngestError(f"not a whole number: {raw!r}", line, "favorite_count", source)
        raw = int(raw)
    elif isinstance(raw, bool) or not isinstance(raw, int):
        raise IngestError(f"not a whole number: {raw!r}", line, "favorite_count", source)
    if raw < 0:
        raise IngestError(f"must be non-negative, got {raw}", line, "favorite_count", source)
    return raw


def _build_record(row: dict, line: int, source: str | None, keep: Sequence[str]) -> TweetRecord:
    values = {}
    for name in REQUIRED_COLUMNS:
        v = row.get(name)
        if v is None:
            raise IngestError("missing value", line, name, source)
        if not isinstance(v, str):
            raise IngestError(f"expected a string, got {type(v).__name__}", line, name, source)
        values[name] = v
    if values["id"] == "":
        raise IngestError("empty id", line, "id", source)
    try:
        ts = parse_timestamp(values["date"])
    except ValueError:
        raise IngestError(f"unparseable timestamp {values['date']!r}", line, "date", source) from None
    retweet_of = row.get("retweet_of")
    if retweet_of is not None and not isinstance(retweet_of, str):
        raise IngestError("expected a string", line, "retweet_of", source)
    extra = {}
    for name in keep:
        v = row.get(name)
        if v is not None:
            extra[name] = v if isinstance(v, str) else json.dumps(v)
    return TweetRecord(
        id=values["id"],
        author=values["author"],
        timestamp=ts,
        text=values["text"],
        unit_id=values["unit_id"],
        favorite_count=_parse_count(row.get("favorite_count"), line, source),
        declared_retweet_of=retweet_of or None,
        extra=extra,
    )


def _warn_unknown(columns: Iterable[str], keep: Sequence[str], source: str | None) -> None:
    unknown = sorted(set(columns) - set(COLUMNS) - set(keep))
    if unknown:
        logger.warning("%s: ignoring unknown columns %s", source or "<input>", ", ".join(unknown))


def _parse_csv(text: str, source: str | None, keep: Sequence[str]) -> tuple[list[TweetRecord], bool]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("missing header row", 1, None, source) from None
    except csv.Error as exc:
        raise IngestError(str(exc), reader.line_num, None, source) from None
    header = [h.strip() for h in header]
    for name in REQUIRED_COLUMNS:
        if name not in header:
            raise IngestError("required column missing from header", 1, name, source)
    if len(set(header)) != len(header):
        raise IngestError("duplicate column in header", 1, None, source)
    _warn_unknown(header, keep, source)
    records = []
    while True:
        try:
            fields = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise IngestError(str(exc), reader.line_num, None, source) from None
        line = reader.line_num
        if not fields:
            continue
        if len(fields) != len(header):
            raise IngestError(f"expected {len(header)} fields, found {len(fields)}", line, None, source)
        records.append(_build_record(dict(zip(header, fields)), line, source, keep))
    return records, "favorite_count" in header


def _parse_jsonl(text: str, source: str | None, keep: Sequence[str]) -> tuple[list[TweetRecord], bool]:
    records = []
    has_favorites = False
    seen_columns: set[str] = set()
    # only \n delimits records; str.splitlines would also split on U+2028 etc.
    for line, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", line, None, source) from None
        if not isinstance(row, dict):
            raise IngestError("expected a JSON object", line, None, source)
        has_favorites = has_favorites or "favorite_count" in row
        seen_columns.update(row)
        records.append(_build_record(row, line, source, keep))
    _warn_unknown(seen_columns, keep, source)
    return records, has_favorites


def _decode(data: bytes, source: str | None) -> str:
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise IngestError("input is not valid UTF-8", line, None, source) from None


def sort_records(records: Iterable[TweetRecord]) -> tuple[TweetRecord, ...]:
    """Order by day; list.sort is stable, so equal days keep ingestion order."""
    return tuple(sorted(records, key=lambda r: r.timestamp))


def _check_unique(records: Sequence[TweetRecord], source: str | None) -> None:
    seen = set()
    for r in records:
        if r.id in seen:
            raise IngestError(f"duplicate id {r.id!r}", None, "id", source)
        seen.add(r.id)


def parse_records(
    source: Union[bytes, IO[bytes]],
    format: str = CSV,
    *,
    name: str | None = None,
    keep: Sequence[str] = (),
) -> Dataset:
    """Parse one byte stream into a sorted :class:`Dataset`.

    ``keep`` names extra columns to retain in ``TweetRecord.extra``; other
    unknown columns are dropped with a warning.
    """
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    text = _decode(bytes(data), name)
    if format == CSV:
        records, has_fav = _parse_csv(text, name, keep)
    elif format == JSONL:
        records, has_fav = _parse_jsonl(text, name, keep)
    else:
        raise ConfigError(f"unknown input format {format!r}")
    _check_unique(records, name)
    return Dataset(records=sort_records(records), has_favorites=has_fav)


def detect_format(path: Union[str, Path]) -> str:
    suffix = Path(path).suffix.lower()
    try:
        return _EXTENSIONS[suffix]
    except KeyError:
        raise ConfigError(f"cannot infer input format from {str(path)!r}; pass --format") from None


def load(paths: Sequence[Union[str, Path]], format: str | None = None, keep: Sequence[str] = ()) -> Dataset:
    """Parse several files into one dataset; ids must be unique across all of them."""
    records: list[TweetRecord] = []
    has_fav = False
    for path in paths:
        fmt = format or detect_format(path)
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
        part = parse_records(data, fmt, name=str(path), keep=keep)
        # re-sorting the concatenation keeps file order among equal days
        records.extend(part.records)
        has_fav = has_fav or part.has_favorites
    _check_unique(records, None)
    return Dataset(records=sort_records(records), has_favorites=has_fav)


def apply_window(d: Dataset, start: date, end: date) -> Dataset:
    """Keep records with ``start <= timestamp <= end``."""
    if start > end:
        raise ConfigError(f"window start {start} is after end {end}")
    kept = tuple(r for r in d.records if start <= r.timestamp <= end)
    if d.window is not None:
        start, end = max(start, d.window[0]), min(end, d.window[1])
    return replace(d, records=kept, window=(start, end))


def _row(r: TweetRecord, extra_columns: Sequence[str]) -> dict:
    row = {
        "id": r.id,
        "author": r.author,
        "date": r.timestamp.isoformat(),
        "text": r.text,
        "unit_id": r.unit_id,
        "favorite_count": r.favorite_count,
        "retweet_of": r.declared_retweet_of,
    }
    for name in extra_columns:
        row[name] = r.extra.get(name)
    return row


def serialize(d: Dataset, format: str = CSV) -> bytes:
    """Inverse of :func:`parse_records` for the canonical columns and kept extras."""
    extra_columns = sorted({k for r in d.records for k in r.extra})
    buf = io.StringIO(newline="")
    if format == CSV:
        writer = csv.writer(buf, lineterminator="\r\n")
        columns = list(COLUMNS) if d.has_favorites else [c for c in COLUMNS if c != "favorite_count"]
        columns += extra_columns
        writer.writerow(columns)
        for r in d.records:
            row = _row(r, extra_columns)
            writer.writerow(["" if row[c] is None else row[c] for c in columns])
    elif format == JSONL:
        for r in d.records:
            row = {k: v for k, v in _row(r, extra_columns).items() if v is not None}
            if d.has_favorites and "favorite_count" not in row:
                row["favorite_count"] = None
            buf.write(json.dumps(row, ensure_ascii=False) + "\n")
    else:
        raise ConfigError(f"unknown format {format!r}")
    return buf.getvalue().encode("utf-8")
