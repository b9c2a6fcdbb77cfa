"""Exception types shared across the package."""


class DegenerateSystemError(ValueError):
    """Both detuning and Rabi frequency are zero, so the dressed splitting vanishes."""


class InvalidStateError(ValueError):
    """A density matrix failed a hermiticity, trace, or positivity check."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance.

    The achieved absolute error estimate is available as ``estimate``.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class NonconvergentTailError(QuadratureError):
    """The long-time tail of a memory integral did not settle within the horizon."""


class StepSizeUnderflowError(RuntimeError):
    """The ODE controller drove the step size below the representable minimum."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NegativeRateError(RuntimeError):
    """Trajectory unraveling was refused because the decay rate goes negative."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NonSecularConfigError(ValueError):
    """An operation that requires the secular equation got a non-secular config."""


class ConfigError(ValueError):
    """A run configuration failed validation. ``field`` is the offending key path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
