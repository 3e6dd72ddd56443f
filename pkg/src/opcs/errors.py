"""Exception hierarchy shared by all opcs modules."""


class OpcsError(ValueError):
    """Base class for data and precondition failures."""


class InvalidDimensionError(OpcsError):
    pass


class InvalidArgumentError(OpcsError):
    pass


class BlockConstancyError(OpcsError):
    """A 2x2 block that should be constant is not; the construction broke."""


class DegenerateReferenceError(OpcsError):
    pass


class SelectionError(OpcsError):
    pass


class UndefinedCorrelationError(OpcsError):
    pass


class FormatError(OpcsError):
    """Malformed or unsupported file content."""
