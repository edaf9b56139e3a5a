"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A function of the catalog was given parameters outside its admissible range."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an evaluator (e.g. x <= 0)."""


class EvaluationError(RuntimeError):
    """A numerical evaluator failed to reach its accuracy target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnsupportedModeError(ValueError):
    """Requested discretization mode is not available for the given operator."""


class SolverError(RuntimeError):
    """Spectral solver failure (quadrature misconfiguration, bad grids)."""


class IllPosedError(RuntimeError):
    """Deconvolution system is numerically singular."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(ValueError):
    """Run configuration failed schema validation."""
