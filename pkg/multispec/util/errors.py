"""Exceptions raised by the multispec package.

Precondition violations derive from :class:`ValueError` so that the command
line front end can report them as usage errors; numerical failures derive
from :class:`MultispecError`.
"""


class MultispecError(Exception):
    """Base class for numerical failures in multispec."""


class PeriodCapError(ValueError):
    """A requested period makes ``d**p`` exceed the configured cap."""


class ConvergenceError(MultispecError):
    """Newton iteration (or a tracking corrector) did not converge."""


class ParabolicCycleError(MultispecError):
    """A cycle has an eigenvalue too close to 1 to be continued."""


class EigenvalueCollisionError(MultispecError):
    """Two eigenvalue branches came too close to be told apart."""


class WitnessExhaustedError(MultispecError):
    """No candidate periodic orbit passes the determinant threshold."""


class MatchingAmbiguityError(MultispecError):
    """An endpoint of a loop cannot be matched to a unique start point."""


class BranchSeparationError(MultispecError):
    """Eigenvalue branches never separate along a loop."""


class InconclusiveCertificateError(MultispecError):
    """A sampled inclusion check lies within the numerical margin."""
