"""Exception types shared across the package."""


class DrawdownLabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DrawdownLabError, ValueError):
    """Invalid distribution, strategy, simulation or experiment parameters."""


class EnumerationCapError(DrawdownLabError, ValueError):
    """Exhaustive enumeration would exceed the configured path cap."""


class BankruptcyError(DrawdownLabError, RuntimeError):
    """Account value went negative: an inadmissible gain slipped through."""


class DrawdownBreachError(DrawdownLabError, RuntimeError):
    """Drawdown to date exceeded the modulator's cap d_max."""


class InfeasibleTargetError(DrawdownLabError, RuntimeError):
    """No evaluated modulator pair hits the requested expected drawdown."""
