"""Exception types shared across the package."""

import os


class ITLError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ITLError):
    """Syntax error in formula or file input.

    ``offset`` is a byte offset into the UTF-8 encoded input and
    ``expected`` the set of tokens that would have been accepted there.
    """

    def __init__(self, message, offset=None, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = message
        if offset is not None:
            detail = f"{message} at byte {offset}"
        if self.expected:
            detail += "; expected one of: " + ", ".join(sorted(self.expected))
        super().__init__(detail)


class ModelError(ITLError):
    """Structurally broken model input (unknown ids, partial successor map)."""


class BudgetExceeded(ITLError):
    """A cost guard refused to start an oversized computation."""


def guard_disabled():
    return os.environ.get("ITL_SIZE_GUARD", "").strip().lower() in ("off", "none", "0")


def guard_limit(default):
    """Return the active limit for a cost guard.

    ``ITL_SIZE_GUARD=off`` disables all guards; an integer value replaces
    the default limit.
    """
    raw = os.environ.get("ITL_SIZE_GUARD", "").strip().lower()
    if not raw:
        return default
    if raw in ("off", "none", "0"):
        return None
    try:
        return int(raw)
    except ValueError:
        return default
