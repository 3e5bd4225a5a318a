"""
Exception hierarchy for harness-lab.

Every error raised on purpose by the library derives from HarnessLabError so
callers (CLI, HTTP routes) can map the whole family in one place.
"""

from typing import Optional


class HarnessLabError(Exception):
    """Base class for all harness-lab errors."""


class InvalidParams(HarnessLabError, ValueError):
    """A parameter constraint is violated. ``constraint`` names the first one that failed."""

    def __init__(self, constraint: str, detail: Optional[str] = None):
        self.constraint = constraint
        message = f"invalid parameters: {constraint}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class ZeroDenominator(HarnessLabError, ZeroDivisionError):
    """A denominator Pochhammer chain contains a zero factor."""


class TimeOutOfDomain(HarnessLabError, ValueError):
    """A time lies outside the open time domain of the construction."""


class EmptyConditioning(HarnessLabError):
    """The conditioning event has probability zero."""


class GridTooLarge(HarnessLabError):
    """The enumerated state space exceeds the configured cap."""


class WrongCase(HarnessLabError):
    """The operation is only defined for the other parameter case."""


class InvalidState(HarnessLabError, ValueError):
    """A Y-value does not lie on any admissible line."""


class InvalidDescriptor(HarnessLabError, ValueError):
    """A moment descriptor violates a standardization invariant."""


class DegenerateChain(HarnessLabError):
    """The chain has a single state and cannot be standardized."""


class ModeMismatch(HarnessLabError, TypeError):
    """Exact and float scalars were mixed."""


class NonStochastic(HarnessLabError, AssertionError):
    """A constructed transition matrix is not row-stochastic."""


class ConfigError(HarnessLabError, ValueError):
    """A configuration file or option could not be interpreted."""
