"""Exception types shared across the package.

Builtin exceptions are reused where they already say the right thing
(OverflowError for transform blow-ups, IndexError for out-of-range pair
lookups). Everything else gets a named subclass so callers can catch
failures by meaning rather than by message.
"""

from __future__ import annotations


class ScatterkitError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(ScatterkitError, ValueError):
    """An argument violates a documented precondition."""


class MalformedHeaderError(ScatterkitError):
    """An archive header could not be parsed.

    Carries the byte offset (or header field) that failed so load errors
    point at the exact spot in the file.
    """

    def __init__(self, message: str, *, offset: int | None = None, field: str | None = None):
        where = []
        if offset is not None:
            where.append(f"byte offset {offset}")
        if field is not None:
            where.append(f"field {field!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.offset = offset
        self.field = field


class UnsupportedVersionError(MalformedHeaderError):
    """Archive declares a format version this build does not read."""


class DimensionMismatchError(ScatterkitError):
    """Declared dimensions disagree with each other or with the payload size."""


class NegativeEntryError(ScatterkitError):
    """A transport matrix entry is negative where only radiance ratios are allowed."""


class BadSampleCountError(InvalidInputError):
    """Sample count is unusable (too small, or not a perfect square for grid synthesis)."""


class IoFailureError(ScatterkitError):
    """Reading or writing an archive failed at the OS level."""


class ConvergenceFailureError(ScatterkitError):
    """An iterative numerical routine did not converge."""


class DomainError(ScatterkitError, ValueError):
    """A physical parameter lies outside the range the model is valid for."""


class EmptyMeshError(InvalidInputError):
    """A mesh with no triangles was handed to the renderer."""


class UnboundMaterialError(ScatterkitError):
    """A scene references a material that was never resolved to usable data."""


class EmptyGroupError(ScatterkitError):
    """An aggregation was requested over an empty record set."""


class ConfigError(ScatterkitError):
    """A configuration file or environment override could not be applied."""


class RenderSanityError(ScatterkitError):
    """A finished frame failed the NaN/negativity sanity check."""
