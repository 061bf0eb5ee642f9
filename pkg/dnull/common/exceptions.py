"""Exceptions raised across dnull, each tied to a CLI exit code."""

EXIT_CODES = {
    0: "SUCCESS",
    1: "ERROR_UNEXPECTED",
    2: "ERROR_INVALID_CONFIG",
    3: "ERROR_NUMERICAL_FAILURE",
}


class DNullError(Exception):
    """Base class of all dnull errors"""
    exit_code = 1

    @property
    def name(self):
        return EXIT_CODES[self.exit_code]


class ConfigurationError(DNullError):
    """Invalid experiment configuration"""
    exit_code = 2


class StrategyModelMismatchError(ConfigurationError):
    """Strategy cannot be applied to the selected model"""


class NumericalError(DNullError):
    """A numerical construction or solver failed"""
    exit_code = 3


class DimensionMismatchError(DNullError, ValueError):
    """Operands live in spaces of different dimension"""


class NotHermitianError(DNullError, ValueError):
    """Operator is not Hermitian within tolerance"""


class NotOrthonormalError(DNullError, ValueError):
    """Vectors are not orthonormal within tolerance"""


class InvalidProbabilitiesError(DNullError, ValueError):
    """Probability vector has negative entries or does not sum to one"""


class DerivativeUnavailableError(DNullError, ValueError):
    """Model cannot supply derivatives at the requested point"""


class IdentifiabilityError(NumericalError):
    """Parameter is not identifiable (rank deficiency)"""


class LikelihoodFlatError(IdentifiabilityError):
    """Likelihood does not discriminate between parameter values"""


class AchievabilityError(NumericalError):
    """Model violates the QCRB achievability condition"""


class RealFormError(NumericalError):
    """No basis phases make the derivative coefficients real"""


class QuadratureVectorError(NumericalError):
    """Quadrature vectors are not orthonormal"""


class VanishingOverlapError(NumericalError):
    """A basis vector is orthogonal to the reference state"""


class LyapunovError(NumericalError):
    """SLD does not solve the Lyapunov equation"""


class OptimizerNotConvergedError(NumericalError):
    """Holevo solver restarts disagree"""

    def __init__(self, message, best_value=None, gradient_norm=None):
        super().__init__(
            f"{message} (best value {best_value}, gradient norm {gradient_norm})"
        )
        self.best_value = best_value
        self.gradient_norm = gradient_norm
