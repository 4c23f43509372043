"""Exception types shared across the package."""


class FloodgaugeError(Exception):
    """Base class for every error this package raises on purpose."""


class InputError(FloodgaugeError):
    """Rejected input: bad CSV field, negative byte count, empty flow id."""


class DegenerateWindowError(FloodgaugeError):
    """Window has too few flows for the requested statistic."""


class InsufficientBaselineError(FloodgaugeError):
    """Not enough attack-free windows to build a baseline profile."""


class DomainError(FloodgaugeError):
    """Value outside the domain of a model family (e.g. log of x <= 0)."""


class DegenerateDataError(FloodgaugeError):
    """Dataset cannot support the requested fit (all x equal, too few samples)."""


class DegenerateVarianceError(FloodgaugeError):
    """Observed series has zero variance, so variance-normalised measures are undefined."""


class EmptyRunError(FloodgaugeError):
    """A labelled run contributed no usable windows."""


class ConfigError(FloodgaugeError):
    """Scenario or command configuration is invalid."""
