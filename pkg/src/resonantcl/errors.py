"""Exception types raised by the solver, the harness and the config loader."""


class ResonantError(Exception):
    """Base class for all package errors."""


class ResolutionError(ResonantError, ValueError):
    """Mollification radius too small for the grid (delta < 2h)."""


class ConfigurationError(ResonantError, ValueError):
    """Invalid solver or sweep configuration."""


class StepError(ResonantError):
    """Requested time step exceeds the stability bound."""


class DivergenceError(ResonantError, FloatingPointError):
    """Non-finite values appeared in the solution."""


class SweepError(ResonantError):
    """A sweep level produced a flagged (invalid) run."""

    def __init__(self, level, reason):
        super().__init__(f"level {level}: {reason}")
        self.level = level
        self.reason = reason


class ConfigFileError(ResonantError, ValueError):
    """Malformed run configuration file (unknown key, bad value, ...)."""
