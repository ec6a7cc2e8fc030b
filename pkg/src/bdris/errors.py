"""Exception types shared across the toolkit."""


class RankDeficient(ValueError):
    """A matrix (or block) has a singular value at or below the rank threshold."""


class DimensionMismatch(ValueError):
    """Operand shapes are inconsistent."""


class BelowReferenceDistance(ValueError):
    """A link distance falls inside the path-loss reference distance."""


class InvalidInput(ValueError):
    """An argument violates a documented precondition."""


class ZeroChannel(ValueError):
    """A channel vector required to be nonzero is zero."""


class ZeroVector(ValueError):
    """An embedding input is the zero vector."""


class TooLong(ValueError):
    """An embedding input exceeds the state dimension."""


class LengthMismatch(ValueError):
    """Paired sequences have different lengths."""


class ConfigError(ValueError):
    """An experiment configuration failed to parse or validate."""


class RankDeficientWarning(UserWarning):
    """Emitted when a one-shot design falls back to a random feasible point."""
