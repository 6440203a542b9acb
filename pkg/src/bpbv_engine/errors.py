"""
Exception hierarchy shared by the engine and the command-line driver.

``ConfigurationError`` and ``PreconditionError`` describe bad input and map to
CLI exit code 2; ``InvariantViolation`` signals a bug or an identity that did
not hold and maps to exit code 3.
"""

from __future__ import annotations


class BpbvError(Exception):
    """Root of every error raised by ``bpbv_engine``."""


class ConfigurationError(BpbvError, ValueError):
    """Invalid parameters, mismatched rings or contexts, cutoffs out of range."""


class PreconditionError(BpbvError, ValueError):
    """An operation was called with arguments outside its domain."""


class InvariantViolation(BpbvError, RuntimeError):
    """An internal consistency check failed."""


class NonIntegralError(InvariantViolation):
    """A rational coefficient with p in its denominator reached a modular ring."""
