"""Exception hierarchy shared across the toolkit.

Every error carries a short machine-readable ``code`` so the HTTP service
and the CLI can map failures without string matching.
"""

from __future__ import annotations


class ForecastLabError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class IngestError(ForecastLabError):
    """CSV could not be turned into a valid series."""

    code = "ingest_error"


class IrregularSeriesError(IngestError):
    """Timestamps have no usable common spacing."""

    code = "irregular_series"


class SplitError(ForecastLabError):
    """A chronological split would produce an empty segment."""

    code = "split_error"


class ImputeError(ForecastLabError):
    """Missing values cannot be filled with the requested method."""

    code = "impute_error"


class TransformError(ForecastLabError):
    """A transform is invalid for the data (domain/range violation)."""

    code = "transform_error"


class ArgumentError(ForecastLabError, ValueError):
    """Caller passed arguments outside an operation's contract."""

    code = "argument_error"


class DataError(ForecastLabError):
    """Series does not satisfy a model's data requirements."""

    code = "data_error"


class FitFailureError(ForecastLabError):
    """Estimation failed to produce finite parameters."""

    code = "fit_failure"


class SearchFailureError(ForecastLabError):
    """Every candidate in a model search failed."""

    code = "search_failure"

    def __init__(self, message: str, causes: dict[str, str] | None = None):
        super().__init__(message)
        self.causes = causes or {}


class SelectionError(ForecastLabError):
    """No candidate specification was feasible for the data."""

    code = "selection_error"


class DivergenceError(ForecastLabError):
    """Training produced a non-finite loss."""

    code = "divergence"

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class NumericalError(ForecastLabError):
    """A numerical routine failed (singular matrix, overflow)."""

    code = "numerical_error"


class ComparisonError(ForecastLabError):
    """Every model in a comparison failed to evaluate."""

    code = "comparison_error"

    def __init__(self, message: str, causes: dict[str, str] | None = None):
        super().__init__(message)
        self.causes = causes or {}


class NotFoundError(ForecastLabError):
    """A stored resource id does not exist."""

    code = "not_found"


class ConflictError(ForecastLabError):
    """Request conflicts with resource state (job pending, wrong dataset)."""

    code = "conflict"
