"""Exception hierarchy shared by every module."""


class FzetaError(Exception):
    """Base class for library errors."""


class ConfigError(FzetaError):
    """Invalid user input: parameters, files, flags."""


class DrumError(ConfigError):
    """A drum specification violates its family's parameter ranges."""


class UnsupportedError(FzetaError):
    """The requested family/method/norm combination is not implemented."""


class PoleProximityError(FzetaError):
    """A closed form was evaluated too close to one of its poles."""


class AbscissaError(FzetaError):
    """A quadrature was requested too close to (or left of) the abscissa."""


class ToleranceError(FzetaError):
    """A numerical procedure could not reach its requested accuracy."""


class InversionRangeError(FzetaError):
    """Near-ball radius too large for the drum's inner radius."""


class BoundaryPoleError(ToleranceError):
    """A contour passes through or next to a pole."""


class ExtrapolationError(ToleranceError):
    """Richardson extrapolation failed to settle."""
