"""Exception taxonomy shared by every module.

Each exception carries a stable machine-readable ``code`` so the CLI and the
HTTP service can report failures without string-matching messages. The code is
a class attribute; instances only add the human-readable message (plus a few
structured fields where callers need them, e.g. the current version on a
concurrency conflict).
"""

from __future__ import annotations


class FacetLensError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ---- identifier and scale construction ----

class BadId(FacetLensError):
    code = "bad_id"


class DuplicateLevel(FacetLensError):
    code = "duplicate_level"


class ScaleTooShort(FacetLensError):
    code = "scale_too_short"


class DuplicateFacetId(FacetLensError):
    code = "duplicate_facet_id"


class ScaleConflict(FacetLensError):
    code = "scale_conflict"


class EmptyDimension(FacetLensError):
    code = "empty_dimension"


class InteriorValue(FacetLensError):
    code = "interior_value"


# ---- dimension / persona operations ----

class DimensionMismatch(FacetLensError):
    code = "dimension_mismatch"


class UnassignedFacet(FacetLensError):
    code = "unassigned_facet"


class UnknownFacet(FacetLensError):
    code = "unknown_facet"


# ---- use cases and rules ----

class EmptyUseCase(FacetLensError):
    code = "empty_use_case"


class UseCaseMismatch(FacetLensError):
    code = "use_case_mismatch"


class ParseError(FacetLensError):
    """Rules-text syntax error. Position is 1-based."""

    code = "parse_error"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateRuleCode(FacetLensError):
    code = "duplicate_rule_code"


# ---- sessions ----

class VersionConflict(FacetLensError):
    """Optimistic-concurrency failure; exposes the resource's actual version."""

    code = "version_conflict"

    def __init__(self, message: str, current_version: int):
        super().__init__(message)
        self.current_version = current_version


class SessionClosed(FacetLensError):
    code = "session_closed"


class OutOfScope(FacetLensError):
    code = "out_of_scope"


class OverlappingAssignment(FacetLensError):
    code = "overlapping_assignment"


# ---- storage ----

class SchemaError(FacetLensError):
    """A stored document failed structural validation.

    ``path`` locates the offending field, e.g. ``facets[2].scale``.
    """

    code = "schema_error"

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class StorageError(FacetLensError):
    """I/O-level failure (missing file, unreadable workspace, bad extension)."""

    code = "storage_error"
