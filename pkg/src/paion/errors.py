"""Exception types raised by the library.

Everything derives from PaionError so callers can catch the library as a whole;
the CLI maps subclasses onto exit codes (config -> 2, numerical -> 3, I/O -> 4).
"""


class PaionError(Exception):
    """Base class for all library errors."""


class ConfigError(PaionError):
    """Invalid configuration input. Message names the offending field."""


class ChainUnstableError(PaionError):
    """The requested trap settings do not support a stable linear chain."""


class SolverError(PaionError):
    """A nonlinear solve (equilibrium positions, ...) failed to converge."""


class SqueezingRegimeError(PaionError):
    """Parametric drive outside the stable squeezing window (|g| >= delta)."""


class IntegrationError(PaionError):
    """The adaptive integrator could not meet its tolerances."""


class RootFindError(PaionError):
    """A 1-D root find failed (e.g. requested loop time unreachable)."""


class ContrastCollapseError(PaionError):
    """Ramsey contrast vanished; the squeezing parameter is undefined."""
