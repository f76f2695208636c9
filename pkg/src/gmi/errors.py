"""Typed exception hierarchy for the gmi package."""


class GmiError(Exception):
    """Base class for all gmi errors."""


class ValidationError(GmiError, ValueError):
    """Input violates a documented precondition."""


class DimensionMismatchError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class ZeroNormError(ValidationError):
    pass


class EmptySetError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class ReducedSizeError(ValidationError):
    """Requested reduced-set size exceeds the sample count (or is < 1)."""


class SpecFormatError(GmiError, ValueError):
    """Malformed specification or requirement payload.

    ``offset`` is the byte offset of the first parse failure, when known.
    """

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class SpecVersionError(GmiError, ValueError):
    pass


class UnknownModelError(GmiError, KeyError):
    pass


class DuplicateModelError(GmiError, ValueError):
    pass


class SchemaMismatchError(ValidationError):
    """Submitted spec or requirement disagrees with registry dimensions."""


class EmptyRegistryError(GmiError, ValueError):
    pass


class StorageError(GmiError, OSError):
    pass
