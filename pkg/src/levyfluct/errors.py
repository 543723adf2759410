"""Exception hierarchy shared across the package."""


class LevyFluctError(Exception):
    """Base class for all library-specific errors."""


class DomainError(LevyFluctError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SpecValidationError(LevyFluctError, ValueError):
    """Process parameters rejected at construction."""


class MonotonePathError(SpecValidationError):
    """The parameters describe a process with almost surely monotone paths."""


class BadMixtureError(SpecValidationError):
    """Invalid hyperexponential jump mixture."""


class NegativeParameterError(SpecValidationError):
    """A parameter constrained to be nonnegative is negative."""


class ConvergenceFailure(LevyFluctError, RuntimeError):
    """A root solve failed to converge; for validated specs this is a bug."""


class FactorizationFailure(LevyFluctError, RuntimeError):
    """The rational transform has (near-)repeated poles; the closed-form
    backend refuses confluent partial fractions."""


class UnsupportedBackendError(LevyFluctError, ValueError):
    """Unknown scale-function backend."""


class AdmissibilityError(DomainError):
    """Transform query outside the admissible parameter region."""


class DivergedTransform(DomainError):
    """Requested transform is outside its region of convergence."""


class UnsupportedSpecError(LevyFluctError, ValueError):
    """The simulation mode cannot handle this process specification."""


class NonTerminationError(LevyFluctError, RuntimeError):
    """A simulated path exhausted its step or jump budget."""


class ConfigError(LevyFluctError, ValueError):
    """Problem with a run configuration."""


class ParseError(ConfigError):
    """Configuration text is not valid JSON."""


class UnknownKeyError(ConfigError):
    """Configuration contains a key the schema does not define."""


class InvalidValueError(ConfigError):
    """Configuration value has the wrong type or an out-of-range value."""
