"""Exception types shared across the engine.

Every error carries a stable machine ``code`` so the CLI and HTTP layers can
map failures to exit statuses and API error bodies without string matching.
"""


class MiotGaugeError(Exception):
    """Base class for all engine errors."""

    code = "error"


class ParseError(MiotGaugeError):
    """A document is syntactically malformed or has unknown/missing fields."""

    code = "parse_error"


class IntegrityError(MiotGaugeError):
    """A catalog violates its structural invariants (counts, ids, checksum)."""

    code = "integrity_error"


class NotFoundError(MiotGaugeError):
    code = "not_found"


class InvalidDeviceError(MiotGaugeError):
    code = "invalid_device"


class OutOfScopeError(MiotGaugeError):
    """A response or delta targets an expectation outside the assessment scope."""

    code = "out_of_scope"


class ValidationError(MiotGaugeError):
    """A single response breaks a response-level invariant."""

    code = "validation_failed"


class CatalogMismatchError(MiotGaugeError):
    """The catalog checksum differs from the one pinned by the assessment."""

    code = "catalog_mismatch"


class IncompleteAssessmentError(MiotGaugeError):
    """Scoring was requested while blocking validation findings exist."""

    code = "incomplete_assessment"

    def __init__(self, message, findings=()):
        super().__init__(message)
        self.findings = list(findings)


class DomainError(MiotGaugeError):
    """A numeric argument lies outside its allowed domain."""

    code = "domain_error"


class DowngradeRejectedError(MiotGaugeError):
    """A what-if delta would lower a response's mapped value."""

    code = "downgrade_rejected"


class StorageError(MiotGaugeError):
    code = "storage_error"


class ConflictError(MiotGaugeError):
    """Optimistic-concurrency check failed: the base revision is stale."""

    code = "conflict"


class TooFewAxesError(MiotGaugeError):
    """Radar geometry needs at least three axes."""

    code = "too_few_axes"
