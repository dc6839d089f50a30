class TFactorError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(TFactorError, ValueError):
    """Input data is malformed or violates a record invariant."""


class IngestError(ValidationError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None, source: str | None = None):
        self.line = line
        self.field = field
        self.source = source
        where = []
        if source:
            where.append(source)
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field!r}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


class ClassificationError(ValidationError):
    pass


class ReferenceSetError(ValidationError):
    pass


class ConfigError(TFactorError):
    """Inconsistent run configuration (bad flags, inverted window, ...)."""
