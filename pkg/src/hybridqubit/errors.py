"""Exception types raised by the library."""


class HybridQubitError(Exception):
    """Base class for all library errors."""


class SectorError(HybridQubitError):
    """Empty or inconsistent (N, Sz) sector, or a basis that is not number-conserving."""


class NonHermitianError(HybridQubitError):
    pass


class NumericalError(HybridQubitError):
    """Eigensolver failure or an internal numerical consistency check that did not hold."""


class SingularConfigurationError(HybridQubitError):
    def __init__(self, configuration, message=None):
        self.configuration = configuration
        super().__init__(message or f"vanishing energy denominator for configuration {configuration}")


class NotHeisenbergError(HybridQubitError):
    pass


class NormalizationError(HybridQubitError, ValueError):
    pass


class ConfigError(HybridQubitError, ValueError):
    """Bad user input: unknown keys, invalid ranges, unknown observables."""


class PerturbativeValidityWarning(UserWarning):
    """Raised (as a warning) when a Schrieffer-Wolff denominator is negative or small."""
