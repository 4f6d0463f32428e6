"""Exception types shared across the package.

Plain ``ValueError`` is used for bad arguments (out-of-range s, malformed
bitstrings, inconsistent config fields).  The classes below mark *numerical*
failures so callers (and the CLI exit-code logic) can tell them apart from
usage errors.
"""


class NumericalError(Exception):
    """Base class for runtime numerical failures."""


class BudgetExceededError(NumericalError):
    """An integration routine ran out of its integrand-evaluation budget."""


class ConvergenceError(NumericalError):
    """An iterative routine failed to reach its tolerance."""


class InfraredDivergenceError(NumericalError):
    """The spectral weight is non-integrable at omega -> 0.

    Raised when a power-law spectrum with exponent <= -1 and no infrared
    cutoff is fed to a kernel or frequency-domain engine; the integral
    of f(omega)/omega does not exist and no finite answer can be reported.
    """


class SaddleError(NumericalError):
    """Stationary-phase evaluation requested where it is not valid."""


class NormDriftError(NumericalError):
    """A propagated state lost unitarity beyond tolerance."""
