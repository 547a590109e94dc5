"""Exception hierarchy shared by every module"""

from __future__ import annotations

from typing import Iterable, Optional

from src.core.model import SourcePos


class WebdamlogError(Exception):
    """Base class for all engine errors"""


class ScenarioError(WebdamlogError):
    """A scenario or rule text failed to parse or validate

    Carries the source position of the offending element when known.
    """

    def __init__(self, message: str, pos=None):
        self.pos = pos
        self.message = message
        super().__init__(message)

    @property
    def line(self) -> Optional[int]:
        return self.pos.line if self.pos is not None else None

    @property
    def column(self) -> Optional[int]:
        return self.pos.column if self.pos is not None else None

    def __str__(self) -> str:
        if self.pos is None:
            return self.message
        return f"line {self.pos.line}, col {self.pos.column}: {self.message}"


class ScenarioSyntaxError(ScenarioError):
    """Concrete syntax error; line and column are 1-based"""

    def __init__(self, line: int, column: int, expected: Iterable[str] = ()):
        self.expected = tuple(sorted(expected))
        if self.expected:
            message = "expected one of: " + ", ".join(self.expected)
        else:
            message = "unexpected input"
        super().__init__(message, SourcePos(line, column))


class UnknownPeer(ScenarioError):
    pass


class UnknownPrincipal(ScenarioError):
    pass


class UnknownRelation(ScenarioError):
    """Raised at parse time and by ACL lookups on undeclared relations"""


class UnsafeRule(ScenarioError):
    pass


class ArityMismatch(ScenarioError):
    pass


class ReservedRelation(ScenarioError):
    pass


class NotExtensional(ScenarioError):
    pass


class AccessError(WebdamlogError):
    """An ACL operation was refused"""


class NotOwner(AccessError):
    pass


class CannotRevokeOwner(AccessError):
    pass


class DelegationError(WebdamlogError):
    pass


class UnboundDelegationTarget(DelegationError):
    """The first non-local atom of a split rule still has a variable peer"""
