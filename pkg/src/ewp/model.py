"""In-memory project aggregate.

Refs are frozen values. The aggregate itself (``Project`` and the records it
owns) is mutable and is only changed through the operations in
:mod:`ewp.project`, :mod:`ewp.vault` and :mod:`ewp.graph`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterator

from .errors import ProjectError, StatementError
from .refs import EvidenceRef, StmtRef, SubSectionRef, WpRef


class Status(str, enum.Enum):
    DRAFT = "Draft"
    CLEARED = "Cleared"


@dataclass(frozen=True)
class StatementTypeDef:
    name: str
    allowed_successors: frozenset[str] = frozenset()
    requires_parent: bool = False
    is_terminal: bool = False

    def __post_init__(self) -> None:
        if self.is_terminal and self.allowed_successors:
            raise ValueError(f"terminal type {self.name} cannot have successors")

    @property
    def label(self) -> str:
        """Display form, ``SystemsDescription`` -> ``Systems Description``."""
        out = []
        for i, ch in enumerate(self.name):
            if i and ch.isupper() and not self.name[i - 1].isupper():
                out.append(" ")
            out.append(ch)
        return "".join(out)


DEFAULT_TYPE_REGISTRY: tuple[StatementTypeDef, ...] = (
    StatementTypeDef("SystemsDescription", frozenset({"SystemsDescription", "AuditFinding"})),
    StatementTypeDef("AuditFinding", frozenset({"AuditFinding", "Conclusion"})),
    StatementTypeDef("Conclusion", frozenset(), requires_parent=True, is_terminal=True),
)


@dataclass
class EvidenceItem:
    ref: EvidenceRef
    description: str
    original_filename: str
    vault_path: str  # posix, relative to the project root
    content_hash: str
    size_bytes: int
    registered_at: datetime

    @property
    def return_ref(self) -> WpRef:
        return self.ref.wp


@dataclass
class ControlledStatement:
    ref: StmtRef
    type_name: str
    heading: str
    body: str
    author: str
    created_at: datetime
    status: Status = Status.DRAFT
    forward_links: list[StmtRef] = field(default_factory=list)
    backward_links: list[StmtRef] = field(default_factory=list)


@dataclass
class WorkingPaper:
    ref: WpRef
    title: str
    sub_section: SubSectionRef
    evidence: list[EvidenceItem] = field(default_factory=list)
    statements: list[ControlledStatement] = field(default_factory=list)
    # Monotone: statement indices are never reused.
    next_statement_index: int = 0


@dataclass
class SubSection:
    ref: SubSectionRef
    title: str


@dataclass
class Module:
    ref: str
    title: str
    sub_sections: list[SubSection] = field(default_factory=list)


@dataclass
class Project:
    name: str
    anchor_root: str
    modules: list[Module] = field(default_factory=list)
    type_registry: list[StatementTypeDef] = field(default_factory=lambda: list(DEFAULT_TYPE_REGISTRY))
    working_papers: dict[WpRef, WorkingPaper] = field(default_factory=dict)
    # Where the project was actually loaded from; not persisted.
    root: Path | None = field(default=None, compare=False, repr=False)

    # -- lookups -----------------------------------------------------------

    def module(self, ref: str) -> Module:
        for mod in self.modules:
            if mod.ref == ref:
                return mod
        raise ProjectError(f"no module {ref}", code="unknown-module", location=ref)

    def has_module(self, ref: str) -> bool:
        return any(mod.ref == ref for mod in self.modules)

    def sub_section(self, ref: SubSectionRef) -> tuple[Module, SubSection]:
        for mod in self.modules:
            for sec in mod.sub_sections:
                if sec.ref == ref:
                    return mod, sec
        raise ProjectError(f"no sub-section {ref}", code="unknown-section", location=str(ref))

    def working_paper(self, ref: WpRef) -> WorkingPaper:
        try:
            return self.working_papers[ref]
        except KeyError:
            raise ProjectError(f"no working paper {ref}", code="unknown-wp", location=str(ref)) from None

    def module_of(self, wp: WpRef) -> str:
        """Module letter that owns working paper ``wp`` via its sub-section."""
        mod, _ = self.sub_section(self.working_paper(wp).sub_section)
        return mod.ref

    def papers_in_module(self, module_ref: str) -> list[WorkingPaper]:
        mod = self.module(module_ref)
        secs = {sec.ref for sec in mod.sub_sections}
        return sorted(
            (wp for wp in self.working_papers.values() if wp.sub_section in secs),
            key=lambda wp: wp.ref,
        )

    def type_def(self, name: str) -> StatementTypeDef:
        for td in self.type_registry:
            if td.name == name:
                return td
        raise StatementError(f"statement type {name!r} is not registered", code="unknown-type", location=name)

    def find_statement(self, ref: StmtRef) -> ControlledStatement | None:
        wp = self.working_papers.get(ref.wp)
        if wp is None:
            return None
        for stmt in wp.statements:
            if stmt.ref == ref:
                return stmt
        return None

    def statement(self, ref: StmtRef) -> ControlledStatement:
        stmt = self.find_statement(ref)
        if stmt is None:
            raise StatementError(f"no statement {ref}", code="unknown-ref", location=str(ref))
        return stmt

    def statements(self) -> Iterator[ControlledStatement]:
        """All statements in (WpRef, index) order."""
        for wp_ref in sorted(self.working_papers):
            yield from sorted(self.working_papers[wp_ref].statements, key=lambda s: s.ref)

    def evidence_items(self) -> Iterator[EvidenceItem]:
        for wp_ref in sorted(self.working_papers):
            yield from self.working_papers[wp_ref].evidence

    def find_evidence(self, ref: EvidenceRef) -> EvidenceItem | None:
        wp = self.working_papers.get(ref.wp)
        if wp is None:
            return None
        return next((item for item in wp.evidence if item.ref == ref), None)
