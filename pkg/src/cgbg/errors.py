"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """An operation would exceed a configured enumeration or table-cell cap."""


class ConfigurationError(ValueError):
    """An experiment or generator configuration is invalid or infeasible."""


class DeadlineExceeded(RuntimeError):
    """A cooperative per-solve time limit expired."""
