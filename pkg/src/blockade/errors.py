"""Exception types for numerical and configuration failures."""


class BlockadeError(Exception):
    """Base class for numerical/domain failures raised by this package."""


class AmbiguousSteadyStateError(BlockadeError):
    """The generator has a degenerate stationary space (several zero modes)."""


class SteadyStateConvergenceError(BlockadeError):
    """The stationary-state solve did not reach the required residual."""


class IntegrationError(BlockadeError):
    """Time propagation failed (step underflow or broken invariants)."""


class NoDetectablePhotonsError(BlockadeError):
    """A detection-conditioned state has vanishing norm."""


class UndefinedCorrelationError(BlockadeError):
    """Normalized correlation requested for a state with no photons."""


class ConfigError(ValueError):
    """A scenario configuration document is malformed or inconsistent."""
