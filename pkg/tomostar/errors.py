"""Exceptions raised by the tomostar library.

Every error carries the process exit code the command-line front end maps it to.
"""


class TomographyError(Exception):
    """Base class for all tomostar errors."""

    exit_code = 1


class InvalidInput(TomographyError, ValueError):
    """Malformed state, grid, window, tomogram or request data."""

    exit_code = 2


class InvalidBounds(InvalidInput):
    pass


class InvalidCount(InvalidInput):
    pass


class InvalidDim(InvalidInput):
    pass


class DegenerateDirection(InvalidInput):
    """The direction (mu, nu) = (0, 0) does not define a line."""


class InsufficientAngles(InvalidInput):
    pass


class AliasedSpectrum(InvalidInput):
    pass


class SingularWindow(InvalidInput):
    """The window has no normalization constant: its Fourier integral at 1 vanishes."""


class UnresolvedWindow(InvalidInput):
    pass


class IncompatibleLattices(InvalidInput):
    pass


class TruncatedSupport(TomographyError):
    """The function does not decay inside the region that is integrated."""

    exit_code = 3


class LeakageExceeded(TruncatedSupport):
    """An operator needs more Fock levels than the truncation provides."""


class NonConvergent(TomographyError):
    """A regularized or extrapolated integral did not settle within tolerance."""

    exit_code = 4


class ResolutionLimit(NonConvergent):
    pass


class CalibrationUnstable(NonConvergent):
    pass


class TruncatedSupportWarning(UserWarning):
    """Warning counterpart of TruncatedSupport for diagnostics such as moments."""
