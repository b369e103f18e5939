"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class DispkinError(Exception):
    exit_code = 1


class ConfigError(DispkinError, ValueError):
    exit_code = 2


class NumericalError(DispkinError, ArithmeticError):
    exit_code = 3


class DegenerateDensityError(NumericalError):
    """Density fell below the configured floor."""


class InvalidStateError(NumericalError):
    """A macroscopic state cannot define a Maxwellian or a diagnostic."""


class InstabilityError(NumericalError):
    """Non-finite values appeared during time stepping."""


class OutputError(DispkinError, OSError):
    exit_code = 4


class StiffnessError(NumericalError):
    """The a-priori moment update overflowed for the requested (tau, dt)."""
