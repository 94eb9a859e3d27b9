"""
Exception types raised across bell_link.

Validation problems derive from ValueError and runtime failures from RuntimeError so the CLI
can map them onto exit codes 1 and 2.
"""

from typing import Dict, Any, Optional


class BellLinkError(Exception):
    """Root of every bell_link exception."""


class InvalidParameterError(BellLinkError, ValueError):
    """An input value was rejected (non-finite phase, visibility outside [0,1], ...)."""


class UnsortedStreamError(InvalidParameterError):
    """Coincidence counting needs time-sorted event streams."""


class StrategyFileError(InvalidParameterError):
    """A local strategy definition file could not be read."""


class ConfigMismatchError(BellLinkError, RuntimeError):
    """The output directory holds results produced by a different configuration."""


class UndefinedCorrelationError(BellLinkError, RuntimeError):
    """No kept or counted events for a setting pair, so E is undefined."""


class FitConvergenceError(BellLinkError, RuntimeError):
    """A least-squares fit failed. `diagnostics` holds what the fitter saw."""

    def __init__(self, msg: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}

    def __str__(self) -> str:
        if not self.diagnostics:
            return super().__str__()
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{super().__str__()} ({details})"
