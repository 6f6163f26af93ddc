"""Exception hierarchy."""


class LadderError(Exception):
    """Base class for every error raised by this package."""

    rung = None


class InvalidInput(LadderError, ValueError):
    pass


class BasePointMismatch(InvalidInput):
    pass


class NonTangentInput(InvalidInput):
    pass


class NonSymmetricInput(InvalidInput):
    pass


class NotPositiveDefinite(InvalidInput):
    pass


class AntipodalPoints(InvalidInput):
    pass


class NonPositiveBeta(InvalidInput):
    pass


class BetaNotOne(InvalidInput):
    """A closed form that only exists for the isotropic SE(3) metric was requested."""


class MissingDerivativeOracle(LadderError):
    pass


class DegenerateFit(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class NumericalFailure(LadderError, ArithmeticError):
    pass


class NonFiniteState(NumericalFailure):
    pass


class ShootingDiverged(NumericalFailure):
    def __init__(self, message, best_residual=None, best_velocity=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_velocity = best_velocity


class LadderDiverged(NumericalFailure):
    def __init__(self, message, rung=None):
        super().__init__(message)
        self.rung = rung
