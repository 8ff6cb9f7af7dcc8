"""Exception types raised across the package."""


class PassivityError(Exception):
    """Base class for all errors raised by passivemc."""


class InvalidInput(PassivityError, ValueError):
    """Matrix data is malformed or contains non-finite entries."""


class ShapeError(PassivityError, ValueError):
    """Operand dimensions are inconsistent."""


class NotHermitian(PassivityError, ValueError):
    pass


class NotPSD(PassivityError, ValueError):
    pass


class NotPositiveDefinite(PassivityError, ValueError):
    pass


class HNotPositiveDefinite(NotPositiveDefinite):
    """The Stein factor H is required to be positive definite."""


class PreconditionFailed(PassivityError, ValueError):
    pass


class NotOutside(PreconditionFailed):
    """The matrix handed to the maximality witness has spectral norm <= 1."""


class InvalidIsometry(PassivityError, ValueError):
    pass


class NotIsometry(InvalidIsometry):
    pass


class NearPole(PassivityError, ArithmeticError):
    """Evaluation point lies (numerically) on an eigenvalue of A."""

    def __init__(self, z, eigenvalue):
        super().__init__(f"z={z!r} is within tolerance of the pole {eigenvalue!r}")
        self.z = z
        self.eigenvalue = eigenvalue


class UnstableA(PassivityError, ValueError):
    pass


class ParameterOutOfRange(PassivityError, ValueError):
    pass


class CertificateNotFound(PassivityError):
    """The certificate search did not produce a certificate.

    This is inconclusive: it does not show that no certificate exists.
    """


class CheckFailed(PassivityError, ArithmeticError):
    """A guaranteed post-condition did not hold numerically."""
