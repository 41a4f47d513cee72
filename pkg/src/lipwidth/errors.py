"""Exception hierarchy shared by all lipwidth modules."""


class LipwidthError(Exception):
    """Base class for every error raised by lipwidth."""


class NonMonotone(LipwidthError, ValueError):
    """Weighted eigenvalues are not nonincreasing."""


class BadWeight(LipwidthError, ValueError):
    """A weight b_i lies outside (0, 1] or is not finite."""


class BadParams(LipwidthError, ValueError):
    pass


class BadExponents(BadParams):
    pass


class BadNodeCount(LipwidthError, ValueError):
    pass


class OutOfRange(LipwidthError, IndexError):
    """A coordinate index beyond what the spectrum can answer."""


class DimensionMismatch(LipwidthError, ValueError):
    pass


class QuadratureTooCoarse(LipwidthError, ValueError):
    """Requested quadrature cannot integrate the integrand exactly."""


class SetTooLarge(LipwidthError, RuntimeError):
    pass


class ResourceLimit(LipwidthError, RuntimeError):
    pass


class InfiniteEffectiveDimension(LipwidthError, ValueError):
    pass


class NonFiniteValue(LipwidthError, ArithmeticError):
    pass
