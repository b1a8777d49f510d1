"""Exception hierarchy shared by every module."""


class SedPilotError(Exception):
    """Base class for all library errors."""


class DomainError(SedPilotError, ValueError):
    """An input lies outside the domain of an operation."""


class DegenerateInputError(DomainError):
    """The input is valid physically but the requested quantity does not exist (e.g. v = 0)."""


class ResolutionError(SedPilotError):
    """A grid or spectral window cannot resolve the requested feature."""


class StatisticsError(SedPilotError):
    """Not enough samples for a statistically meaningful estimate."""


class ConfigError(SedPilotError):
    """Malformed or incomplete experiment configuration."""
