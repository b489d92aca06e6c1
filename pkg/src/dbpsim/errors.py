"""Exception types shared across the simulator."""


class DimensionMismatch(ValueError):
    """Operand shapes are inconsistent."""


class NotPositiveDefinite(ArithmeticError):
    """A (regularized) Gram matrix is singular or indefinite.

    Raised when a Cholesky pivot falls at or below the scale-relative
    threshold. Typical cause: zero-forcing on a cluster with fewer
    antennas than users.
    """

    def __init__(self, pivot_index, pivot, threshold):
        self.pivot_index = pivot_index
        self.pivot = pivot
        self.threshold = threshold
        super().__init__(
            f"pivot {pivot_index} is {pivot:.3e} (threshold {threshold:.3e}); "
            "matrix is not positive definite"
        )


class StaleCache(RuntimeError):
    """A coherence-block cache was used outside its block."""


class InvalidVariance(ValueError):
    """A fusion noise variance is non-positive or non-finite."""


class DegenerateColumn(ValueError):
    """A channel column has (numerically) zero energy."""


class LengthError(ValueError):
    """A bit sequence length is not a multiple of bits-per-symbol."""


class WidthError(ValueError):
    """A minifloat format has the wrong total bit width for the operation."""


class UnknownPipeline(ValueError):
    """Unrecognized uplink/downlink pipeline name."""


class InvalidParameter(ValueError):
    """A cost-model parameter is out of its valid range."""


class ConfigError(ValueError):
    """A run configuration is invalid; `key` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"config key '{key}': {message}")
