"""Exception hierarchy for qslice."""


class QSliceError(Exception):
    """Base class for all library errors."""


class RealAxisDegenerate(QSliceError, ValueError):
    """A real quaternion lies in every slice, so it has no unique one."""


class NonUnitAxis(QSliceError, ValueError):
    """A slice axis is not a unit imaginary quaternion."""


class AxisMismatch(QSliceError, ValueError):
    """Two arguments were expected to live on a common slice."""


class InvalidMoments(QSliceError, ValueError):
    """A moment sequence is not normalized, not positive or not realizable."""


class OutsideConvergence(QSliceError, ValueError):
    """A series was evaluated outside its disc of convergence."""


class NonConvergent(QSliceError, ArithmeticError):
    """A series did not settle before the iteration cap."""


class IllConditioned(QSliceError, ArithmeticError):
    """A moment-based factorization lost positivity."""

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class ShapeMismatch(QSliceError, ValueError):
    """Vectors of different truncation or measure were combined."""


class NotOrthonormal(QSliceError, ValueError):
    """A supplied basis fails the orthonormality test."""


class InsufficientOrder(QSliceError, ValueError):
    """A quadrature rule cannot resolve the requested truncation."""


class SamplingMismatch(QSliceError, ValueError):
    """Fields defined on different slice samplings were combined."""


class NonFiniteNorm(QSliceError, ArithmeticError):
    """A vector field has an infinite (or undefined) direct-integral norm."""


class ConfigInvalid(QSliceError, ValueError):
    """A suite configuration failed validation."""


class CheckUnknown(QSliceError, KeyError):
    """A requested verification check id does not exist."""
