"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Array lengths are incompatible with the requested operation."""


class PreconditionError(ValueError):
    """Inputs are valid arrays but violate a method's sample-size requirement."""
