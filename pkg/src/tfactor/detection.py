"""Original/retweet classification by exact normalized content."""
from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ClassificationError
from .ingestion import Dataset, TweetRecord

logger = logging.getLogger(__name__)

_RT_MARKER = re.compile(r"^RT @\w+(?::|\s|$)")
_WHITESPACE = re.compile(r"\s+")

ORIGINAL = "original"
RETWEET = "retweet"


def has_rt_marker(text: str) -> bool:
    return _RT_MARKER.match(unicodedata.normalize("NFC", text)) is not None


def normalize_content(text: str) -> str:
    """Canonical form used to decide whether two tweets carry the same content.

    >>> normalize_content("RT @hirsch: An index to quantify")
    'an index to quantify'
    """
    text = unicodedata.normalize("NFC", text)
    text = _RT_MARKER.sub("", text, count=1)
    text = _WHITESPACE.sub(" ", text.strip()).casefold()
    # case folding can leave sequences that compose differently (e.g. "ß" + acute)
    while True:
        folded = unicodedata.normalize("NFC", text).casefold()
        if folded == text:
            return text
        text = folded


@dataclass(frozen=True)
class ClassifiedTweet:
    record: TweetRecord
    kind: str
    retweet_of: Optional[str] = None

    @property
    def is_retweet(self) -> bool:
        return self.kind == RETWEET


def _classify_unit(records: Sequence[TweetRecord], positions: dict[str, int]) -> list[ClassifiedTweet]:
    roots: dict[str, str] = {}  # normalized content -> earliest original id
    root_of: dict[str, str] = {}  # every classified id -> its cascade root
    out = []
    for r in records:
        if r.declared_retweet_of is not None:
            target = r.declared_retweet_of
            if target not in root_of:
                if target in positions and positions[target] > positions[r.id]:
                    raise ClassificationError(f"tweet {r.id!r} declares retweet of later tweet {target!r}")
                raise ClassificationError(
                    f"tweet {r.id!r} declares retweet of unknown tweet {target!r} in unit {r.unit_id!r}"
                )
            root = root_of[target]
            out.append(ClassifiedTweet(r, RETWEET, root))
            root_of[r.id] = root
            continue
        key = normalize_content(r.text)
        root = roots.get(key)
        if root is not None:
            out.append(ClassifiedTweet(r, RETWEET, root))
            root_of[r.id] = root
            continue
        if has_rt_marker(r.text):
            logger.warning("tweet %s carries an RT marker but has no antecedent; kept as original", r.id)
        roots[key] = r.id
        root_of[r.id] = r.id
        out.append(ClassifiedTweet(r, ORIGINAL))
    return out


def classify(d: Dataset | Iterable[TweetRecord]) -> list[ClassifiedTweet]:
    """Label each record Original or Retweet, matching only within its unit.

    Output keeps the dataset order. Retweets always point at the cascade
    root, so chains of copies flatten onto the earliest tweet.
    """
    records = list(d.records if isinstance(d, Dataset) else d)
    positions = {r.id: i for i, r in enumerate(records)}
    by_unit: dict[str, list[TweetRecord]] = {}
    for r in records:
        by_unit.setdefault(r.unit_id, []).append(r)
    labelled: dict[str, ClassifiedTweet] = {}
    for unit_records in by_unit.values():
        for c in _classify_unit(unit_records, positions):
            labelled[c.record.id] = c
    return [labelled[r.id] for r in records]


def cascade_counts(classified: Iterable[ClassifiedTweet]) -> dict[str, dict[str, int]]:
    """Per unit, map each original id to the number of retweets attributed to it.

    Originals appear in dataset order within each unit.
    """
    table: dict[str, dict[str, int]] = {}
    for c in classified:
        unit = table.setdefault(c.record.unit_id, {})
        if c.is_retweet:
            unit[c.retweet_of] += 1
        else:
            unit[c.record.id] = 0
    return table


def summary(classified: Sequence[ClassifiedTweet]) -> tuple[int, int]:
    retweets = sum(c.is_retweet for c in classified)
    return len(classified) - retweets, retweets
