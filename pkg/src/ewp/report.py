"""Report control sheet and draft report.

The control sheet is an ordered list of rows of three kinds: module headings
(level 1), working-paper headings (level 2) and statements (level 3, rendered
as a heading plus the statement body). Row order is report order. The sheet is
kept in ``report_control.json`` so it can be edited by hand and re-checked.
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Union

from .diagnostics import Diagnostic, diag, has_errors
from .errors import ProjectError, RefError, ReportError
from .model import Project, Status
from .project import CONTROL_FILE, OUT_DIR
from .refs import EVIDENCE_CITATION_RE, StmtRef, WpRef, parse_evidence_ref, parse_module_ref, parse_stmt_ref, parse_wp_ref
from .review import flatten_order, included_statements

SHEET_FORMAT = "ewp-report-control/1"


class RowKind(str, enum.Enum):
    MODULE = "ModuleHeading"
    WP = "WpHeading"
    STATEMENT = "Statement"

    @property
    def level(self) -> int:
        return {"ModuleHeading": 1, "WpHeading": 2, "Statement": 3}[self.value]


@dataclass(frozen=True)
class ControlSheetRow:
    kind: RowKind
    full_heading: str
    module_ref: str | None = None
    wp_ref: WpRef | None = None
    stmt_ref: StmtRef | None = None

    def __post_init__(self) -> None:
        carried = {
            RowKind.MODULE: self.module_ref,
            RowKind.WP: self.wp_ref,
            RowKind.STATEMENT: self.stmt_ref,
        }
        if carried[self.kind] is None or sum(v is not None for v in carried.values()) != 1:
            raise ValueError(f"{self.kind.value} row must carry exactly its own ref")
        if not self.full_heading.strip():
            raise ReportError("heading must not be empty", code="empty-heading", location=self.ref_text)

    @classmethod
    def module(cls, ref: str, heading: str) -> ControlSheetRow:
        return cls(RowKind.MODULE, heading, module_ref=ref)

    @classmethod
    def wp(cls, ref: WpRef, heading: str) -> ControlSheetRow:
        return cls(RowKind.WP, heading, wp_ref=ref)

    @classmethod
    def statement(cls, ref: StmtRef, heading: str) -> ControlSheetRow:
        return cls(RowKind.STATEMENT, heading, stmt_ref=ref)

    @property
    def ref_text(self) -> str:
        return str(self.module_ref or self.wp_ref or self.stmt_ref)


@dataclass(frozen=True)
class ControlSheet:
    title: str
    rows: tuple[ControlSheetRow, ...] = ()


# -- edits --------------------------------------------------------------------


@dataclass(frozen=True)
class MoveRow:
    """Take row ``src`` out and reinsert it so it ends up at index ``dst``."""

    src: int
    dst: int


@dataclass(frozen=True)
class DeleteRow:
    index: int


@dataclass(frozen=True)
class RetitleRow:
    index: int
    heading: str


SheetEdit = Union[MoveRow, DeleteRow, RetitleRow]


def apply_sheet_edit(sheet: ControlSheet, edit: SheetEdit) -> ControlSheet:
    rows = list(sheet.rows)

    def check(i: int) -> None:
        if not 0 <= i < len(rows):
            raise ReportError(f"row {i} out of range 0..{len(rows) - 1}", code="index-out-of-range", location=str(i))

    if isinstance(edit, MoveRow):
        check(edit.src)
        check(edit.dst)
        rows.insert(edit.dst, rows.pop(edit.src))
    elif isinstance(edit, DeleteRow):
        check(edit.index)
        del rows[edit.index]
    elif isinstance(edit, RetitleRow):
        check(edit.index)
        if not edit.heading.strip():
            raise ReportError("heading must not be empty", code="empty-heading", location=str(edit.index))
        rows[edit.index] = replace(rows[edit.index], full_heading=edit.heading)
    else:
        raise TypeError(f"unknown edit {edit!r}")
    return replace(sheet, rows=tuple(rows))


# -- generation -----------------------------------------------------------------


def generate_control_sheet(project: Project, module_order: list[str], title: str | None = None) -> ControlSheet:
    """Initial sheet for the modules in ``module_order``.

    Each module contributes its own Cleared statements in review order. A
    working-paper heading is placed wherever the owning paper changes, so a
    paper whose statements are split by another paper's appears twice rather
    than pulling its statements ahead of their predecessors.
    """
    if len(set(module_order)) != len(module_order):
        raise ReportError("module listed twice", code="duplicate-module", location=",".join(module_order))
    rows: list[ControlSheetRow] = []
    for m in module_order:
        if not project.has_module(m):
            raise ReportError(f"no module {m}", code="unknown-module", location=m)
        mod = project.module(m)
        rows.append(ControlSheetRow.module(m, mod.title or m))
        included = included_statements(project, m, include_drafts=False)
        current: WpRef | None = None
        for ref in flatten_order(included):
            if project.module_of(ref.wp) != m:
                continue
            if ref.wp != current:
                current = ref.wp
                rows.append(ControlSheetRow.wp(ref.wp, project.working_paper(ref.wp).title or str(ref.wp)))
            rows.append(ControlSheetRow.statement(ref, included[ref].heading or str(ref)))
    if title is None:
        title = f"Project Report Control Sheet ({project.name})"
    return ControlSheet(title, tuple(rows))


# -- integrity check -------------------------------------------------------------


def check_report_order(sheet: ControlSheet, project: Project) -> list[Diagnostic]:
    """The sheet's "Check Integrity of Report Order".

    Errors: unknown-ref, duplicate-statement. Warnings: unreported-statement,
    empty-section, precedence-inversion.
    """
    out: list[Diagnostic] = []
    listed: set[str] = set()
    position: dict[StmtRef, int] = {}

    def owner(wp: WpRef) -> str | None:
        try:
            return project.module_of(wp)
        except ProjectError:
            return None

    for i, row in enumerate(sheet.rows):
        if row.kind is RowKind.MODULE:
            if project.has_module(row.module_ref):  # type: ignore[arg-type]
                listed.add(row.module_ref)  # type: ignore[arg-type]
            else:
                out.append(diag("unknown-ref", row.module_ref, f"row {i}: no such module"))
        elif row.kind is RowKind.WP:
            if row.wp_ref in project.working_papers and owner(row.wp_ref) is not None:  # type: ignore[arg-type]
                listed.add(owner(row.wp_ref))  # type: ignore[arg-type]
            else:
                out.append(diag("unknown-ref", row.wp_ref, f"row {i}: no such working paper"))
        else:
            ref = row.stmt_ref
            assert ref is not None
            if project.find_statement(ref) is None:
                out.append(diag("unknown-ref", ref, f"row {i}: no such statement"))
                continue
            if ref in position:
                out.append(diag("duplicate-statement", ref, f"rows {position[ref]} and {i}"))
                continue
            position[ref] = i
            mod = owner(ref.wp)
            if mod is not None:
                listed.add(mod)

    for m in sorted(listed):
        for wp in project.papers_in_module(m):
            for s in wp.statements:
                if s.status is Status.CLEARED and s.ref not in position:
                    out.append(diag("unreported-statement", s.ref, f"Cleared statement of module {m} is not on the sheet"))

    rows = sheet.rows
    for i, row in enumerate(rows):
        if row.kind is RowKind.STATEMENT:
            continue
        has_content = False
        for later in rows[i + 1 :]:
            if later.kind is RowKind.STATEMENT:
                has_content = True
                break
            if later.kind.level <= row.kind.level:
                break
        if not has_content:
            out.append(diag("empty-section", row.ref_text, f"row {i}: heading has no statements under it"))

    for ref, pos in position.items():
        for prev in project.statement(ref).backward_links:
            if prev in position and position[prev] > pos:
                out.append(
                    diag("precedence-inversion", ref, f"row {pos} comes before its predecessor {prev} at row {position[prev]}")
                )
    return out


# -- draft report ---------------------------------------------------------------------


@dataclass(frozen=True)
class ReportDocument:
    title: str
    text: str


def _one_line(text: str) -> str:
    return " ".join(text.split())


def link_evidence(text: str, project: Project) -> str:
    """Turn registered evidence refs cited in ``text`` into index links."""

    def sub(m: re.Match[str]) -> str:
        try:
            ref = parse_evidence_ref(m.group(0))
        except RefError:
            return m.group(0)
        if project.find_evidence(ref) is None:
            return m.group(0)
        return f"[{ref}](evidence_index.md#{ref.anchor})"

    return EVIDENCE_CITATION_RE.sub(sub, text)


def build_report(sheet: ControlSheet, project: Project) -> ReportDocument:
    problems = [d for d in check_report_order(sheet, project) if d.severity.value == "Error"]
    if problems:
        raise ReportError(
            "; ".join(str(d) for d in problems),
            code="integrity-errors-present",
            location=sheet.title,
        )
    blocks = [f"<!-- Draft report: {_one_line(sheet.title).replace('--', '- -')} -->"]
    for row in sheet.rows:
        heading = "#" * row.kind.level + " " + _one_line(row.full_heading)
        blocks.append(heading)
        if row.kind is RowKind.STATEMENT:
            body = project.statement(row.stmt_ref).body.strip()  # type: ignore[arg-type]
            if body:
                blocks.append(link_evidence(body, project))
    return ReportDocument(sheet.title, "\n\n".join(blocks) + "\n")


def write_report(project: Project, doc: ReportDocument) -> Path:
    out = Path(project.root) / OUT_DIR  # type: ignore[arg-type]
    out.mkdir(exist_ok=True)
    path = out / "report.md"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(doc.text)
    return path


# -- persistence ----------------------------------------------------------------------

_REF_KEY = {RowKind.MODULE: "module_ref", RowKind.WP: "wp_ref", RowKind.STATEMENT: "stmt_ref"}


def sheet_to_json(sheet: ControlSheet) -> dict[str, Any]:
    return {
        "format": SHEET_FORMAT,
        "title": sheet.title,
        "rows": [
            {"kind": row.kind.value, _REF_KEY[row.kind]: row.ref_text, "full_heading": row.full_heading}
            for row in sheet.rows
        ],
    }


def dumps_sheet(sheet: ControlSheet) -> str:
    return json.dumps(sheet_to_json(sheet), indent=2, ensure_ascii=False) + "\n"


def loads_sheet(text: str, source: str = CONTROL_FILE) -> ControlSheet:
    def fail(where: str, message: str) -> ProjectError:
        return ProjectError(message, code="parse-failure", location=f"{source}:{where}")

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProjectError(
            f"invalid JSON: {exc.msg}", code="parse-failure", location=f"{source}:line {exc.lineno} col {exc.colno}"
        ) from None
    if not isinstance(data, dict) or data.get("format") != SHEET_FORMAT:
        raise fail("$.format", f"expected {SHEET_FORMAT!r}")
    title = data.get("title")
    raw_rows = data.get("rows")
    if not isinstance(title, str):
        raise fail("$.title", "expected string")
    if not isinstance(raw_rows, list):
        raise fail("$.rows", "expected list")
    parsers = {RowKind.MODULE: parse_module_ref, RowKind.WP: parse_wp_ref, RowKind.STATEMENT: parse_stmt_ref}
    rows = []
    for i, raw in enumerate(raw_rows):
        where = f"$.rows[{i}]"
        if not isinstance(raw, dict):
            raise fail(where, "expected object")
        try:
            kind = RowKind(raw.get("kind"))
        except ValueError:
            raise fail(f"{where}.kind", f"unknown row kind {raw.get('kind')!r}") from None
        key = _REF_KEY[kind]
        extra = set(raw) - {"kind", key, "full_heading"}
        if extra:
            raise fail(where, f"unexpected fields {sorted(extra)} on a {kind.value} row")
        ref_text, heading = raw.get(key), raw.get("full_heading")
        if not isinstance(ref_text, str):
            raise fail(f"{where}.{key}", "expected string")
        if not isinstance(heading, str) or not heading.strip():
            raise fail(f"{where}.full_heading", "expected non-empty string")
        try:
            ref = parsers[kind](ref_text)
        except RefError as exc:
            raise fail(f"{where}.{key}", exc.message) from None
        rows.append(ControlSheetRow(kind, heading, **{key: ref}))
    return ControlSheet(title, tuple(rows))


def save_control_sheet(sheet: ControlSheet, root: str | os.PathLike[str]) -> Path:
    path = Path(root) / CONTROL_FILE
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_sheet(sheet))
    return path


def load_control_sheet(root: str | os.PathLike[str]) -> ControlSheet:
    path = Path(root) / CONTROL_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ProjectError(f"no {CONTROL_FILE}; run `report init` first", code="parse-failure", location=str(path)) from None
    return loads_sheet(text, source=str(path))


def report_has_errors(sheet: ControlSheet, project: Project) -> bool:
    return has_errors(check_report_order(sheet, project))
