"""Per-unit and multi-publication factors, and percentile ranks."""
from __future__ import annotations

import csv
import io
import json
import logging
from bisect import bisect_left, bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .core import ImpactCountVector, TFactorReport, h_type_index, t_core
from .detection import ClassifiedTweet, cascade_counts
from .errors import ConfigError, ReferenceSetError, ValidationError

logger = logging.getLogger(__name__)

METRICS = ("t", "f")


@dataclass
class UnitAggregate:
    unit_id: str
    metric: str
    pooled_t: int
    per_publication_t: dict[str, int]
    second_order_t: int
    report: TFactorReport
    n_tweets: int
    n_retweets: int
    missing_favorites: int = 0
    percentile: Optional[float] = None

    @property
    def mean_t(self) -> float:
        return mean_t_factor(self.per_publication_t.values())


@dataclass(frozen=True)
class ReferenceSet:
    label: str
    members: Mapping[str, Optional[int]] = field(default_factory=dict)


def pooled_index(vectors: Iterable[ImpactCountVector | Iterable[int]]) -> int:
    """Index over the concatenation of several publications' count vectors."""
    pooled: list[int] = []
    for v in vectors:
        pooled.extend(v.counts if isinstance(v, ImpactCountVector) else v)
    return h_type_index(pooled)


def pooled_t_factor(classified: Iterable[ClassifiedTweet]) -> int:
    """t factor over every tweet of every publication passed in."""
    return pooled_index(table.values() for table in cascade_counts(classified).values())


def second_order_t_factor(t_values: Iterable[int]) -> int:
    return h_type_index(list(t_values))


def mean_t_factor(t_values: Iterable[int]) -> float:
    values = list(t_values)
    if not values:
        return 0.0
    return float(Fraction(sum(values), len(values)))


def round_half_even(value: Fraction | int | float, places: int = 4) -> Decimal:
    """Round an exact value to ``places`` decimals, ties to even."""
    frac = Fraction(value)
    scale = 10**places
    scaled = frac * scale
    q, r = divmod(scaled.numerator, scaled.denominator)
    twice = 2 * r
    if twice > scaled.denominator or (twice == scaled.denominator and q % 2 == 1):
        q += 1
    return (Decimal(q) / Decimal(scale)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)


def mean_t_decimal(t_values: Iterable[int], places: int = 4) -> Decimal:
    """Serialized form of the mean: exact rational mean rounded half-even."""
    values = list(t_values)
    if not values:
        return round_half_even(0, places)
    return round_half_even(Fraction(sum(values), len(values)), places)


def percentile_ranks(ref: ReferenceSet) -> dict[str, float]:
    """Hazen percentile with tie averaging: ``100 * (below + 0.5 * equal) / n``.

    Members keep the order of ``ref.members``. The mean over all members is
    exactly 50.
    """
    if not ref.members:
        raise ReferenceSetError(f"reference set {ref.label!r} is empty")
    missing = [u for u, v in ref.members.items() if v is None]
    if missing:
        raise ReferenceSetError(f"reference set {ref.label!r} has no value for {missing[0]!r}")
    ordered = sorted(ref.members.values())
    n = len(ordered)
    out = {}
    for unit, v in ref.members.items():
        below = bisect_left(ordered, v)
        equal = bisect_right(ordered, v) - below
        out[unit] = 100.0 * (below + 0.5 * equal) / n
    return out


def _reference_value(raw, where: str) -> Optional[int]:
    if raw is None or raw == "":
        return None
    if isinstance(raw, str):
        if not raw.strip().isdigit():
            raise ReferenceSetError(f"{where}: value must be a non-negative integer, got {raw!r}")
        return int(raw)
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
        raise ReferenceSetError(f"{where}: value must be a non-negative integer, got {raw!r}")
    return raw


def load_reference_set(path: str | Path) -> ReferenceSet:
    """Read a reference set file.

    CSV: a ``unit_id`` column and an optional ``value`` column. JSON: an
    object ``{"label": ..., "members": {unit_id: value-or-null}}``. Members
    without a value are filled from computed results later.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read reference set {path}: {exc}") from None
    members: dict[str, Optional[int]] = {}
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReferenceSetError(f"{path}: invalid JSON: {exc.msg}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("members"), dict):
            raise ReferenceSetError(f"{path}: expected an object with a 'members' mapping")
        for unit, raw in doc["members"].items():
            members[unit] = _reference_value(raw, f"{path}: member {unit!r}")
        return ReferenceSet(label=str(doc.get("label", path.stem)), members=members)
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames is None or "unit_id" not in reader.fieldnames:
        raise ReferenceSetError(f"{path}: header must contain a unit_id column")
    for row in reader:
        where = f"{path}: line {reader.line_num}"
        unit = row["unit_id"]
        if not unit:
            raise ReferenceSetError(f"{where}: empty unit_id")
        if unit in members:
            raise ReferenceSetError(f"{where}: duplicate unit_id {unit!r}")
        members[unit] = _reference_value(row.get("value"), where)
    return ReferenceSet(label=path.stem, members=members)


def resolve_reference_set(ref: ReferenceSet, computed: Mapping[str, int]) -> ReferenceSet:
    """Take values from ``computed`` where available, else from the file."""
    members = {}
    for unit, value in ref.members.items():
        if unit in computed:
            members[unit] = computed[unit]
        elif value is not None:
            members[unit] = value
        else:
            raise ReferenceSetError(f"unknown unit {unit!r} in reference set {ref.label!r}")
    return ReferenceSet(label=ref.label, members=members)


def group_key(c: ClassifiedTweet, group_by: str) -> str:
    if group_by == "unit_id":
        return c.record.unit_id
    try:
        return c.record.extra[group_by]
    except KeyError:
        raise ValidationError(f"tweet {c.record.id!r} has no {group_by!r} value") from None


def impact_vectors(
    classified: Sequence[ClassifiedTweet], metric: str = "t"
) -> tuple[dict[str, ImpactCountVector], dict[str, int]]:
    """Per publication (``unit_id``), the count vector for ``metric``.

    Returns the vectors and, per publication, how many originals lacked a
    favorite count (always 0 for the t metric).
    """
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    missing: dict[str, int] = {}
    vectors = {}
    if metric == "t":
        for pub, table in cascade_counts(classified).items():
            vectors[pub] = ImpactCountVector(tuple(table.values()), tuple(table))
            missing[pub] = 0
        return vectors, missing
    ids: dict[str, list[str]] = {}
    counts: dict[str, list[int]] = {}
    for c in classified:
        pub = c.record.unit_id
        ids.setdefault(pub, [])
        counts.setdefault(pub, [])
        missing.setdefault(pub, 0)
        if c.is_retweet:
            continue
        fav = c.record.favorite_count
        if fav is None:
            missing[pub] += 1
            fav = 0
        ids[pub].append(c.record.id)
        counts[pub].append(fav)
    for pub in ids:
        vectors[pub] = ImpactCountVector(tuple(counts[pub]), tuple(ids[pub]))
    return vectors, missing


def _aggregate_unit(unit: str, members: Sequence[ClassifiedTweet], metric: str) -> UnitAggregate:
    vectors, missing = impact_vectors(members, metric)
    pooled = ImpactCountVector(
        tuple(c for v in vectors.values() for c in v.counts),
        tuple(i for v in vectors.values() for i in v.tweet_ids),
    )
    per_pub = {pub: h_type_index(vectors[pub]) for pub in sorted(vectors)}
    n_missing = sum(missing.values())
    if n_missing:
        logger.warning("unit %s: %d original tweets lack favorite_count, counted as 0", unit, n_missing)
    report = t_core(pooled, metric=metric)
    return UnitAggregate(
        unit_id=unit,
        metric=metric,
        pooled_t=report.value,
        per_publication_t=per_pub,
        second_order_t=second_order_t_factor(per_pub.values()),
        report=report,
        n_tweets=pooled.n,
        n_retweets=sum(c.is_retweet for c in members),
        missing_favorites=n_missing,
    )


def aggregate(
    classified: Sequence[ClassifiedTweet],
    metric: str = "t",
    group_by: str = "unit_id",
    jobs: int = 1,
) -> list[UnitAggregate]:
    """One :class:`UnitAggregate` per group, ordered by unit id.

    Publications are the distinct ``unit_id`` values; ``group_by`` names the
    key that gathers publications into units (``unit_id`` makes every
    publication its own unit).
    """
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    groups: dict[str, list[ClassifiedTweet]] = {}
    for c in classified:
        groups.setdefault(group_key(c, group_by), []).append(c)
    units = sorted(groups)
    if jobs > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda u: _aggregate_unit(u, groups[u], metric), units))
    return [_aggregate_unit(u, groups[u], metric) for u in units]


def attach_percentiles(aggregates: Sequence[UnitAggregate], ref: ReferenceSet) -> dict[str, float]:
    """Rank units' pooled values within ``ref`` and store them on the aggregates."""
    resolved = resolve_reference_set(ref, {a.unit_id: a.pooled_t for a in aggregates})
    ranks = percentile_ranks(resolved)
    for a in aggregates:
        a.percentile = ranks.get(a.unit_id)
    return ranks
