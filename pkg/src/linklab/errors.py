"""Exception hierarchy shared by every linklab module."""

from __future__ import annotations


class LinkLabError(Exception):
    """Base class for all linklab errors."""


class InvalidParameter(LinkLabError, ValueError):
    """An argument is out of range or structurally malformed."""


class NotFound(LinkLabError, LookupError):
    """A requested object (e.g. a truncation point) does not exist."""


class UnsupportedInstance(LinkLabError):
    """The instance violates the preconditions of the requested construction."""


class InternalError(LinkLabError, RuntimeError):
    """A construction step that the preconditions guarantee has failed."""


class Undecided(LinkLabError):
    """The exhaustive search ran out of its node-expansion budget."""

    def __init__(self, message: str, expansions: int = 0):
        super().__init__(message)
        self.expansions = expansions


class NotLinked(LinkLabError):
    """Exhaustive search proved the requested linkage impossible."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
