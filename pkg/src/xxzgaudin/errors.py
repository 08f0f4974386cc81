"""Exception types raised across the package."""


class GaudinError(Exception):
    """Base class for all package errors."""


class PoleError(GaudinError, ValueError):
    """A trigonometric denominator vanished (within ``eps_degenerate``)."""


class DegeneracyError(GaudinError, ValueError):
    """Two spectral parameters or inhomogeneities coincide."""


class SingularGaugeError(GaudinError, ValueError):
    """The 2x2 gauge matrix is not invertible."""


class SiteIndexError(GaudinError, IndexError):
    """Site label out of range or coincident sites."""


class NumericalDerivativeError(GaudinError, ArithmeticError):
    """Richardson extrapolants disagree beyond tolerance."""


class OnShellRequiredError(GaudinError, ValueError):
    """Roots do not satisfy the Bethe equations to ``tol_onshell``."""


class DimensionCapError(GaudinError, ValueError):
    """Requested dense construction exceeds the supported size."""


class DegenerateStateError(GaudinError, ValueError):
    """A Bethe vector is numerically zero."""
