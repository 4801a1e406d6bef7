"""Exception types shared across the package."""


class BagMinHashError(ValueError):
    """Base class for domain errors; subclasses ValueError for easy catching."""


class InvalidGridError(BagMinHashError):
    """A weight grid's construction parameters are malformed."""


class WeightOutOfRangeError(BagMinHashError):
    """A weight is negative, non-finite, or above the top of the grid."""


class IncompatibleSignatureError(BagMinHashError):
    """Two signatures cannot be compared (size, grid, or config mismatch)."""


class IncompleteSignatureError(BagMinHashError):
    """A serialized signature is truncated or structurally inconsistent."""


class EmptyBagsWarning(UserWarning):
    """Both bags carry zero total weight; the Jaccard index defaults to 1."""
