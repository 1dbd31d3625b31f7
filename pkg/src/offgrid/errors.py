"""Exception types shared across the package."""


class OffgridError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OffgridError, ValueError):
    """Invalid configuration file or parameter value."""


class DataError(OffgridError, ValueError):
    """Malformed or insufficient input data (weather files, traces)."""


class MilpError(OffgridError, RuntimeError):
    """Solver-level failure (numerical breakdown, internal inconsistency)."""


class InfeasiblePlanError(MilpError):
    """The controller optimization has no feasible point; carries a model dump path."""

    def __init__(self, message: str, dump_path: str | None = None):
        super().__init__(message)
        self.dump_path = dump_path
