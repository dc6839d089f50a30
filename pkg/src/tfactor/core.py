"""h-type index arithmetic over per-tweet impact counts.

The same index serves retweet counts (t factor), favorite counts (f factor)
and first-order index values (second-order factor).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True)
class ImpactCountVector:
    """Per-tweet non-negative counts for one unit.

    ``tweet_ids``, when given, runs parallel to ``counts``. Entries are
    expected in chronological (sorted dataset) order; rank tables break
    count ties by that position.
    """

    counts: tuple[int, ...]
    tweet_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))
        for c in self.counts:
            if isinstance(c, bool) or not isinstance(c, int):
                raise TypeError(f"counts must be integers, got {c!r}")
            if c < 0:
                raise ValueError(f"counts must be non-negative, got {c}")
        if self.tweet_ids is not None:
            object.__setattr__(self, "tweet_ids", tuple(self.tweet_ids))
            if len(self.tweet_ids) != len(self.counts):
                raise ValueError("tweet_ids and counts differ in length")

    @property
    def n(self) -> int:
        return len(self.counts)

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class RankRow:
    rank: int
    count: int
    in_core: bool
    tweet_id: Optional[str] = None


@dataclass(frozen=True)
class TFactorReport:
    value: int
    rank_table: tuple[RankRow, ...] = field(default_factory=tuple)
    metric: str = "t"

    @property
    def core_ranks(self) -> frozenset[int]:
        return frozenset(range(1, self.value + 1))

    @property
    def core(self) -> tuple[RankRow, ...]:
        return self.rank_table[: self.value]


def _as_counts(counts) -> Sequence[int]:
    if isinstance(counts, ImpactCountVector):
        return counts.counts
    return ImpactCountVector(tuple(counts)).counts


def h_type_index(counts: ImpactCountVector | Iterable[int]) -> int:
    """Largest t such that at least t entries are >= t (0 when empty)."""
    ordered = sorted(_as_counts(counts), reverse=True)
    t = 0
    for rank, c in enumerate(ordered, start=1):
        if c < rank:
            break
        t = rank
    return t


def f_factor(favor_counts: ImpactCountVector | Iterable[int]) -> int:
    """The h-type index of per-tweet favorite counts."""
    return h_type_index(favor_counts)


def t_core(counts: ImpactCountVector | Iterable[int], metric: str = "t") -> TFactorReport:
    """Index value plus the ranked table with core membership.

    Rows are ranked by count descending; equal counts keep input order,
    so a chronologically ordered vector yields the timestamp-then-ingestion
    tie-break. Core membership at a tied boundary goes by rank.
    """
    if not isinstance(counts, ImpactCountVector):
        counts = ImpactCountVector(tuple(counts))
    ids = counts.tweet_ids or (None,) * counts.n
    order = sorted(range(counts.n), key=lambda i: -counts.counts[i])
    value = h_type_index(counts)
    rows = tuple(
        RankRow(rank=r, count=counts.counts[i], in_core=r <= value, tweet_id=ids[i])
        for r, i in enumerate(order, start=1)
    )
    return TFactorReport(value=value, rank_table=rows, metric=metric)
