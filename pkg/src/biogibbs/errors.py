"""Exception types raised across the package."""


class BiogibbsError(Exception):
    """Base class for every error raised by biogibbs."""


class SingularMatrix(BiogibbsError, ArithmeticError):
    """Matrix inversion failed: tiny pivot or uncertifiable residual."""


class DimensionMismatch(BiogibbsError, ValueError):
    pass


class ExponentialOverflow(BiogibbsError, OverflowError):
    """An exponential weight left the floating-point range."""


class RecipeInvalid(BiogibbsError, ValueError):
    pass


class ZeroNormalization(BiogibbsError, ArithmeticError):
    """A state normalization vanished (typically the weight operator is zero)."""


class WrongScenario(BiogibbsError, ValueError):
    pass


class ConfigInvalid(BiogibbsError, ValueError):
    """Run configuration failed validation. The message names the field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
