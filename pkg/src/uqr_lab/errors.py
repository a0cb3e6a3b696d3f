"""Package exceptions, mapped to CLI exit codes in the cli module."""


class UqrLabError(Exception):
    """Base class for laboratory errors."""


class AtomBudgetExceeded(UqrLabError):
    """A preimage tree would exceed the configured atom cap."""


class SaturationError(UqrLabError):
    """Every epsilon run saturated the base cloud; finer resolution needed."""


class ZeroHitsError(UqrLabError):
    """A local-volume Monte Carlo run produced no hits."""


class ConfigError(UqrLabError):
    """Invalid run configuration."""
