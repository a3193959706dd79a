"""Exception types shared across the package."""


class GridcastError(Exception):
    """Base class for all package errors."""


class DataError(GridcastError):
    """Invalid domain data: bad timestamps, misaligned grids, broken invariants."""


class IngestError(GridcastError):
    """Malformed input file; message names the offending line."""


class CleaningError(GridcastError):
    """Series cannot be cleaned (e.g. no observed values)."""


class ModelError(GridcastError):
    """Model misuse: unknown series, wrong input shapes, insufficient history."""


class StoreError(GridcastError):
    """Forecast store failures."""


class DuplicateKeyError(StoreError):
    """Publishing an already-stored (series, origin, model-tag) key."""


class ConflictError(StoreError):
    """Adjustment rejected: overlapping load factors on one bus."""
