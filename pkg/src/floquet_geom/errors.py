"""Exception hierarchy shared by all floquet_geom modules."""


class FloquetGeomError(Exception):
    """Base class for every error raised by this package."""


class DegenerateError(FloquetGeomError, ValueError):
    """The two bands touch (E <= EPS_DEG); eigenstates are ill defined."""


class ClassMismatchError(FloquetGeomError, ValueError):
    """A Bloch vector violates the constraint of its chiral class."""


class ClassError(FloquetGeomError, ValueError):
    """Operation requires a chiral-symmetric model."""


class CriticalPointError(FloquetGeomError, ValueError):
    """Parameters sit exactly on a phase transition."""


class UnknownModelError(FloquetGeomError, ValueError):
    """Model is not one of the built-in families."""


class WindowError(FloquetGeomError, ValueError):
    """Malformed fitting window."""


class SizeError(FloquetGeomError, ValueError):
    """Inconsistent system / subsystem sizes."""


class GridError(FloquetGeomError, ValueError):
    """A momentum of the filling grid hits a band touching."""


class RangeError(FloquetGeomError, ValueError):
    """Spectrum values fall outside [0, 1] by more than roundoff."""


class LambdaError(FloquetGeomError, ValueError):
    """Invalid Renyi order."""


class InsufficientDataError(FloquetGeomError, ValueError):
    """Too few rows for a scaling fit."""


class SpacingError(FloquetGeomError, ValueError):
    """Sweep values are not uniformly spaced."""
