"""Validation findings shared by the graph, layout and report checks."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable


class Severity(str, enum.Enum):
    ERROR = "Error"
    WARNING = "Warning"


# The closed set of diagnostic codes, with the severity each is emitted at.
CODES: dict[str, Severity] = {
    # statement graph
    "dangling-link": Severity.ERROR,
    "asymmetric-link": Severity.ERROR,
    "unknown-type": Severity.ERROR,
    "incompatible-types": Severity.ERROR,
    "missing-parent": Severity.ERROR,
    "cycle": Severity.ERROR,
    "branch": Severity.WARNING,
    "orphan": Severity.WARNING,
    "draft-in-chain": Severity.WARNING,
    # project layout
    "section-numbering": Severity.WARNING,
    # report control sheet
    "unknown-ref": Severity.ERROR,
    "duplicate-statement": Severity.ERROR,
    "unreported-statement": Severity.WARNING,
    "empty-section": Severity.WARNING,
    "precedence-inversion": Severity.WARNING,
    # evidence vault
    "unanchored-project": Severity.ERROR,
}


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    location: str
    message: str

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ValueError(f"undocumented diagnostic code {self.code!r}")

    def __str__(self) -> str:
        return f"{self.severity.value} {self.code} {self.location}: {self.message}"

    def as_dict(self) -> dict[str, str]:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "location": self.location,
            "message": self.message,
        }


def diag(code: str, location: object, message: str) -> Diagnostic:
    return Diagnostic(CODES[code], code, str(location), message)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


def to_json(diagnostics: Iterable[Diagnostic]) -> str:
    return json.dumps([d.as_dict() for d in diagnostics], indent=2, ensure_ascii=False) + "\n"
