"""Exception types shared across the package."""
from __future__ import annotations


class ParameterError(ValueError):
    """Invalid model or operation parameters."""


class ConfigError(ValueError):
    """Invalid search or experiment configuration."""


class HandleError(KeyError):
    """Unknown or foreign oracle handle."""


class ConsistencyError(ValueError):
    """Inputs that must describe the same realization do not."""


class PrecisionError(ValueError):
    """A statistic cannot be resolved at the requested sample size.

    Attributes:
      required: the sample size that would satisfy the precision rule,
        when one is known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
