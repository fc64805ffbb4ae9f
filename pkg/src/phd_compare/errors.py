"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (unknown key, grid mismatch, ...)."""


class NumericalFailureError(RuntimeError):
    """A non-finite value appeared where the pipeline requires finite numbers."""
