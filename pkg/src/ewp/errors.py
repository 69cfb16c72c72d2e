"""Exception types raised by library operations.

Every error carries a stable ``code`` (kebab-case) so the CLI can print it in
the same ``<severity> <code> <location>: <message>`` form as diagnostics.
"""

from __future__ import annotations


class EwpError(Exception):
    """Base class. ``code`` is one of the documented error codes."""

    code = "error"

    def __init__(self, message: str, *, code: str | None = None, location: str = "") -> None:
        super().__init__(message)
        if code is not None:
            self.code = code
        self.location = location

    @property
    def message(self) -> str:
        return str(self.args[0]) if self.args else ""

    def render(self) -> str:
        loc = self.location or "-"
        return f"Error {self.code} {loc}: {self.message}"


class RefError(EwpError, ValueError):
    code = "malformed-ref"


class ProjectError(EwpError):
    """path-occupied, io-failure, parse-failure, ref-collision, project-locked,
    unknown-module, unknown-wp, unknown-section."""


class EvidenceError(EwpError):
    """duplicate-evidence-ref, source-missing, unanchored-project, vault-incomplete."""


class StatementError(EwpError):
    """unknown-type, unknown-wp, unknown-ref, index-exhausted, incompatible-types,
    cycle-detected, duplicate-link, self-link."""


class ReviewError(EwpError):
    """unknown-module, cycle-detected."""


class ReportError(EwpError):
    """index-out-of-range, empty-heading, integrity-errors-present."""
