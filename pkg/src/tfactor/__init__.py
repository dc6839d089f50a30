"""t factor, f factor and related h-type impact indices for tweet data."""
from importlib import resources

from .aggregation import (
    ReferenceSet,
    UnitAggregate,
    aggregate,
    mean_t_factor,
    percentile_ranks,
    pooled_index,
    pooled_t_factor,
    second_order_t_factor,
)
from .core import ImpactCountVector, RankRow, TFactorReport, f_factor, h_type_index, t_core
from .detection import ClassifiedTweet, cascade_counts, classify, normalize_content
from .errors import ClassificationError, ConfigError, IngestError, ReferenceSetError, ValidationError
from .ingestion import Dataset, TweetRecord, apply_window, load, parse_records, serialize

__version__ = "0.1.0"


def fixture_path(format: str = "csv"):
    """Path of the bundled 69-tweet listing for Hirsch (2005)."""
    ext = {"csv": "csv", "jsonl": "jsonl"}[format]
    return resources.files(__package__) / "fixtures" / f"hirsch2005.{ext}"


def schema_path():
    return resources.files(__package__) / "schemas" / "report.schema.json"
