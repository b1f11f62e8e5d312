"""Exception hierarchy shared across the toolkit."""


class SpotIdError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(SpotIdError, ValueError):
    """A tuning parameter is outside its legal range."""


class InvalidInputError(SpotIdError, ValueError):
    """Input data violates a precondition (shape, emptiness, roster mismatch)."""


class DegenerateGeometryError(InvalidInputError):
    """Point configuration too degenerate for a transform estimate."""


class UnmatchableRecordError(SpotIdError):
    """A gallery record cannot be scored against the query (too few spots)."""

    def __init__(self, individual_id, scale_id, reason):
        self.individual_id = individual_id
        self.scale_id = scale_id
        self.reason = reason
        super().__init__(f"record {individual_id}:{scale_id} unmatchable: {reason}")


class GalleryConflictError(SpotIdError):
    """Concurrent gallery modification detected via manifest version mismatch."""


class GalleryIntegrityError(SpotIdError):
    """Gallery on disk violates an invariant; message names the record."""
