"""Exception types raised across the package."""


class PdemError(Exception):
    """Base class for every error raised by :mod:`pdem_bgcs`."""


# --- special functions -------------------------------------------------------

class PoleError(PdemError, ValueError):
    """Argument sits on a pole of the Gamma function."""


class ParamSingular(PdemError, ValueError):
    """A series parameter is a nonpositive integer (or lambda' = 1/k)."""


class NoConvergence(PdemError, ArithmeticError):
    """Series hit its term cap before the tail bound was met."""


class ContourError(PdemError, ValueError):
    """Mellin-Barnes abscissa is not to the right of every pole."""


class QuadratureNotConverged(PdemError, ArithmeticError):
    """Quadrature did not stabilize under refinement."""


# --- oscillator model --------------------------------------------------------

class DomainError(PdemError, ValueError):
    """Position outside the admissible interval |x| < 1/sqrt(|lambda|)."""


class DomainEscape(DomainError):
    """Classical trajectory reached the singular wall."""


class StepTooLarge(PdemError, ArithmeticError):
    """Integrator energy drift exceeded the hard limit."""


class NotNormalizable(PdemError, ValueError):
    """Ground state tail decays too slowly to normalize."""


# --- algebra / coherent states -----------------------------------------------

class NegativeCoefficient(PdemError, ValueError):
    """Square root of a negative ladder coefficient was requested."""


class TruncationTooSmall(PdemError, ArithmeticError):
    """Truncated coherent state leaves too much norm in the tail."""


class DimensionMismatch(PdemError, ValueError):
    """State and operator realization are incompatible."""


class ClosedFormPole(ParamSingular):
    """Closed-form moment prefactor |z|^2/(2 lambda' - 1)^2 is singular."""


class VacuumUndefined(PdemError, ValueError):
    """Quantity is 0/0 at z = 0."""


class ConfigError(PdemError, ValueError):
    """Invalid run configuration."""
