"""Reference grammars.

==============  =====================  ==================
kind            canonical form         example
==============  =====================  ==================
module          ``[A-Z]``              ``G``
working paper   letter + 3 digits      ``F051``
sub-section     same as working paper  ``G100``
statement       ``<wp>!CtrlStat<NN>``  ``F051!CtrlStat00``
evidence        ``<wp>/<l1>[/<l2>]``   ``F051/1``
==============  =====================  ==================

Parsing is case-sensitive and accepts canonical text only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import RefError

_MODULE_RE = re.compile(r"[A-Z]")
_WP_RE = re.compile(r"([A-Z])(\d{3})")
_STMT_RE = re.compile(r"([A-Z])(\d{3})!CtrlStat(\d{2})")
_EVIDENCE_RE = re.compile(r"([A-Z])(\d{3})/(\d+)(?:/(\d+))?")

# For finding evidence citations inside free text.
EVIDENCE_CITATION_RE = re.compile(r"(?<![A-Za-z0-9/])[A-Z]\d{3}/[1-9]\d*(?:/\d+)?(?![0-9/])")

MAX_STATEMENT_INDEX = 99


@dataclass(frozen=True, order=True)
class WpRef:
    module: str
    number: int

    def __post_init__(self) -> None:
        if not (isinstance(self.module, str) and _MODULE_RE.fullmatch(self.module)):
            raise RefError(f"module letter must be A-Z, got {self.module!r}")
        if not 0 <= self.number <= 999:
            raise RefError(f"working paper number out of range: {self.number}")

    def __str__(self) -> str:
        return f"{self.module}{self.number:03d}"


# Sub-sections share the working-paper grammar; only their role differs.
SubSectionRef = WpRef


@dataclass(frozen=True, order=True)
class StmtRef:
    wp: WpRef
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index <= MAX_STATEMENT_INDEX:
            raise RefError(f"statement index out of range: {self.index}")

    def __str__(self) -> str:
        return f"{self.wp}!CtrlStat{self.index:02d}"


@dataclass(frozen=True, order=True)
class EvidenceRef:
    wp: WpRef
    layer1: int
    layer2: int = 0

    def __post_init__(self) -> None:
        if self.layer1 < 1:
            raise RefError("1st layer ref must be >= 1", code="zero-layer1", location=f"{self.wp}/{self.layer1}")
        if self.layer2 < 0:
            raise RefError(f"2nd layer ref must be >= 0, got {self.layer2}")

    def __str__(self) -> str:
        if self.layer2:
            return f"{self.wp}/{self.layer1}/{self.layer2}"
        return f"{self.wp}/{self.layer1}"

    @property
    def anchor(self) -> str:
        """HTML id used for this ref inside the rendered evidence index."""
        return "ev-" + str(self).replace("/", "-")


def parse_module_ref(text: str) -> str:
    if not isinstance(text, str) or not _MODULE_RE.fullmatch(text):
        raise RefError(f"not a module ref: {text!r}", location=str(text))
    return text


def parse_wp_ref(text: str) -> WpRef:
    m = _WP_RE.fullmatch(text) if isinstance(text, str) else None
    if m is None:
        raise RefError(f"not a working paper ref: {text!r}", location=str(text))
    return WpRef(m.group(1), int(m.group(2)))


parse_sub_section_ref = parse_wp_ref


def parse_stmt_ref(text: str) -> StmtRef:
    """Parse ``F051!CtrlStat00`` into ``StmtRef(WpRef('F', 51), 0)``."""
    m = _STMT_RE.fullmatch(text) if isinstance(text, str) else None
    if m is None:
        raise RefError(f"not a statement ref: {text!r}", location=str(text))
    return StmtRef(WpRef(m.group(1), int(m.group(2))), int(m.group(3)))


def parse_evidence_ref(text: str) -> EvidenceRef:
    """Parse ``F051/1`` or ``G101/2/3``.

    A written ``/0`` second layer is rejected as non-canonical since rendering
    omits it.
    """
    m = _EVIDENCE_RE.fullmatch(text) if isinstance(text, str) else None
    if m is None:
        raise RefError(f"not an evidence ref: {text!r}", location=str(text))
    l1, l2 = m.group(3), m.group(4)
    if l1 == "0":
        raise RefError("1st layer ref must be >= 1", code="zero-layer1", location=text)
    if l1.startswith("0") or (l2 is not None and l2.startswith("0")):
        raise RefError(f"non-canonical evidence ref: {text!r}", location=text)
    wp = WpRef(m.group(1), int(m.group(2)))
    try:
        return EvidenceRef(wp, int(l1), int(l2) if l2 is not None else 0)
    except RefError as exc:
        exc.location = text
        raise


def parse_layers(text: str) -> tuple[int, int]:
    """Parse the CLI's ``<l1>[/<l2>]`` layer argument."""
    m = re.fullmatch(r"(\d+)(?:/(\d+))?", text)
    if m is None:
        raise RefError(f"layers must look like 1 or 1/2, got {text!r}", location=text)
    layer1 = int(m.group(1))
    if layer1 < 1:
        raise RefError("1st layer ref must be >= 1", code="zero-layer1", location=text)
    return layer1, int(m.group(2) or 0)

