"""Exception types shared across the package."""

from __future__ import annotations


class MetacorrError(Exception):
    """Base class for every error raised by metacorr."""


class InputError(MetacorrError, ValueError):
    """Malformed score table, bad argument, or inconsistent inputs.

    ``system_id`` and ``doc_id`` are filled in when the problem can be pinned
    to a single cell so that callers (the CLI) can name it.
    """

    def __init__(self, message: str, system_id: str | None = None, doc_id: str | None = None):
        super().__init__(message)
        self.system_id = system_id
        self.doc_id = doc_id


class UndefinedCorrelationError(MetacorrError, ArithmeticError):
    """The correlation has a zero denominator (e.g. one side is fully tied)."""


class EmptySelectionError(UndefinedCorrelationError):
    """A pair window selected no system pairs at all."""
