"""Project creation, structure editing and ``project.json`` persistence.

Root layout::

    <root>/project.json    the whole project value
    <root>/report_control.json
    <root>/evidence/       vault of copied source files
    <root>/out/            generated index, reviews, report, diagnostics
    <root>/.lock           present while a mutating command runs
"""

from __future__ import annotations

import contextlib
import json
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Iterator

from .diagnostics import Diagnostic, diag
from .errors import ProjectError, RefError
from .model import (
    ControlledStatement,
    EvidenceItem,
    Module,
    Project,
    StatementTypeDef,
    Status,
    SubSection,
    WorkingPaper,
)
from .refs import (
    MAX_STATEMENT_INDEX,
    SubSectionRef,
    WpRef,
    parse_evidence_ref,
    parse_module_ref,
    parse_stmt_ref,
    parse_wp_ref,
)

PROJECT_FILE = "project.json"
CONTROL_FILE = "report_control.json"
EVIDENCE_DIR = "evidence"
OUT_DIR = "out"
LOCK_FILE = ".lock"
FORMAT = "ewp-project/1"


# -- creation and structure -----------------------------------------------


def init_project(path: str | os.PathLike[str], name: str) -> Project:
    root = Path(path)
    if root.exists() and (not root.is_dir() or any(root.iterdir())):
        raise ProjectError(f"{root} exists and is not empty", code="path-occupied", location=str(root))
    try:
        root.mkdir(parents=True, exist_ok=True)
        (root / EVIDENCE_DIR).mkdir()
        (root / OUT_DIR).mkdir()
    except OSError as exc:
        raise ProjectError(str(exc), code="io-failure", location=str(root)) from exc
    root = root.resolve()
    project = Project(name=name, anchor_root=str(root), root=root)
    save_project(project, root)
    return project


def _assert_ref_free(project: Project, ref: WpRef) -> None:
    """Sub-section and working-paper refs share one namespace."""
    if ref in project.working_papers:
        raise ProjectError(f"{ref} is already a working paper", code="ref-collision", location=str(ref))
    for mod in project.modules:
        if any(sec.ref == ref for sec in mod.sub_sections):
            raise ProjectError(f"{ref} is already a sub-section", code="ref-collision", location=str(ref))


def add_module(project: Project, ref: str, title: str) -> Module:
    parse_module_ref(ref)
    if project.has_module(ref):
        raise ProjectError(f"module {ref} already exists", code="ref-collision", location=ref)
    mod = Module(ref, title)
    project.modules.append(mod)
    return mod


def add_sub_section(project: Project, ref: SubSectionRef, module_ref: str, title: str) -> SubSection:
    mod = project.module(module_ref)
    _assert_ref_free(project, ref)
    sec = SubSection(ref, title)
    mod.sub_sections.append(sec)
    return sec


def add_working_paper(project: Project, ref: WpRef, sub_section: SubSectionRef, title: str) -> WorkingPaper:
    project.sub_section(sub_section)
    _assert_ref_free(project, ref)
    wp = WorkingPaper(ref, title, sub_section)
    project.working_papers[ref] = wp
    return wp


def check_layout(project: Project) -> list[Diagnostic]:
    """Style warnings for the numbering convention (A050 holds A051..., G100
    holds G101...). Membership itself is whatever the project file declares."""
    out = []
    for mod in project.modules:
        ordered = sorted(mod.sub_sections, key=lambda s: s.ref)
        bounds = {}
        for i, sec in enumerate(ordered):
            if sec.ref.module != mod.ref:
                out.append(diag("section-numbering", sec.ref, f"sub-section letter differs from module {mod.ref}"))
            upper = ordered[i + 1].ref.number if i + 1 < len(ordered) else 1000
            bounds[sec.ref] = (sec.ref.number, upper)
        for wp in project.papers_in_module(mod.ref):
            lo, hi = bounds[wp.sub_section]
            if wp.ref.module != mod.ref:
                out.append(diag("section-numbering", wp.ref, f"working paper letter differs from module {mod.ref}"))
            elif not lo < wp.ref.number < hi:
                out.append(
                    diag("section-numbering", wp.ref, f"number outside the range of sub-section {wp.sub_section}")
                )
    return out


# -- locking ----------------------------------------------------------------


@contextlib.contextmanager
def project_lock(root: str | os.PathLike[str]) -> Iterator[None]:
    """Single-writer guard. Fails fast rather than waiting."""
    lock = Path(root) / LOCK_FILE
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ProjectError(
            f"{lock} exists; another command is running (delete it if stale)",
            code="project-locked",
            location=str(lock),
        ) from None
    except OSError as exc:
        raise ProjectError(str(exc), code="io-failure", location=str(lock)) from exc
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock.unlink()


# -- serialization ------------------------------------------------------------


def _type_to_json(td: StatementTypeDef) -> dict[str, Any]:
    return {
        "name": td.name,
        "allowed_successors": sorted(td.allowed_successors),
        "requires_parent": td.requires_parent,
        "is_terminal": td.is_terminal,
    }


def _evidence_to_json(item: EvidenceItem) -> dict[str, Any]:
    return {
        "ref": str(item.ref),
        "description": item.description,
        "original_filename": item.original_filename,
        "vault_path": item.vault_path,
        "content_hash": item.content_hash,
        "size_bytes": item.size_bytes,
        "registered_at": item.registered_at.isoformat(),
    }


def _statement_to_json(stmt: ControlledStatement) -> dict[str, Any]:
    return {
        "ref": str(stmt.ref),
        "type": stmt.type_name,
        "heading": stmt.heading,
        "body": stmt.body,
        "author": stmt.author,
        "created_at": stmt.created_at.isoformat(),
        "status": stmt.status.value,
        "forward_links": [str(r) for r in stmt.forward_links],
        "backward_links": [str(r) for r in stmt.backward_links],
    }


def project_to_json(project: Project) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "name": project.name,
        "anchor_root": project.anchor_root,
        "type_registry": [_type_to_json(td) for td in project.type_registry],
        "modules": [
            {
                "ref": mod.ref,
                "title": mod.title,
                "sub_sections": [{"ref": str(sec.ref), "title": sec.title} for sec in mod.sub_sections],
            }
            for mod in project.modules
        ],
        "working_papers": [
            {
                "ref": str(wp.ref),
                "title": wp.title,
                "sub_section": str(wp.sub_section),
                "next_statement_index": wp.next_statement_index,
                "evidence": [_evidence_to_json(item) for item in wp.evidence],
                "statements": [_statement_to_json(s) for s in wp.statements],
            }
            for _, wp in sorted(project.working_papers.items())
        ],
    }


def dumps_project(project: Project) -> str:
    return json.dumps(project_to_json(project), indent=2, ensure_ascii=False) + "\n"


def save_project(project: Project, path: str | os.PathLike[str] | None = None) -> Path:
    root = Path(path) if path is not None else project.root
    if root is None:
        raise ProjectError("no root to save to", code="io-failure")
    target = root / PROJECT_FILE
    tmp = target.with_name(PROJECT_FILE + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_project(project))
        os.replace(tmp, target)
    except OSError as exc:
        raise ProjectError(str(exc), code="io-failure", location=str(target)) from exc
    return target


class _Reader:
    """Typed field access that reports the JSON path on failure."""

    def __init__(self, source: str) -> None:
        self.source = source

    def fail(self, where: str, message: str) -> ProjectError:
        return ProjectError(message, code="parse-failure", location=f"{self.source}:{where}")

    def get(self, obj: Any, key: str, kind: type | tuple[type, ...], where: str) -> Any:
        if not isinstance(obj, dict):
            raise self.fail(where, "expected an object")
        if key not in obj:
            raise self.fail(f"{where}.{key}", "missing field")
        value = obj[key]
        # bool is an int subclass; keep them apart
        if kind is int and isinstance(value, bool) or not isinstance(value, kind):
            raise self.fail(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
        return value

    def ref(self, parser: Any, text: str, where: str) -> Any:
        try:
            return parser(text)
        except RefError as exc:
            raise self.fail(where, exc.message) from None

    def stamp(self, text: str, where: str) -> datetime:
        try:
            return datetime.fromisoformat(text)
        except ValueError:
            raise self.fail(where, f"bad timestamp {text!r}") from None


def loads_project(text: str, source: str = PROJECT_FILE) -> Project:
    r = _Reader(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProjectError(
            f"invalid JSON: {exc.msg}", code="parse-failure", location=f"{source}:line {exc.lineno} col {exc.colno}"
        ) from None
    if r.get(data, "format", str, "$") != FORMAT:
        raise r.fail("$.format", f"unsupported format {data['format']!r}")

    registry = []
    seen_types: set[str] = set()
    for i, raw in enumerate(r.get(data, "type_registry", list, "$")):
        where = f"$.type_registry[{i}]"
        name = r.get(raw, "name", str, where)
        if name in seen_types:
            raise ProjectError(f"type {name} defined twice", code="ref-collision", location=f"{source}:{where}")
        seen_types.add(name)
        succ = r.get(raw, "allowed_successors", list, where)
        if not all(isinstance(s, str) for s in succ):
            raise r.fail(f"{where}.allowed_successors", "expected list of type names")
        try:
            registry.append(
                StatementTypeDef(
                    name,
                    frozenset(succ),
                    r.get(raw, "requires_parent", bool, where),
                    r.get(raw, "is_terminal", bool, where),
                )
            )
        except ValueError as exc:
            raise r.fail(where, str(exc)) from None
    for td in registry:
        for succ in td.allowed_successors:
            if succ not in seen_types:
                raise r.fail(f"$.type_registry.{td.name}", f"successor {succ!r} is not a registered type")

    project = Project(
        name=r.get(data, "name", str, "$"),
        anchor_root=r.get(data, "anchor_root", str, "$"),
        type_registry=registry,
    )

    def collide(ref: object, where: str) -> ProjectError:
        return ProjectError(f"{ref} is defined more than once", code="ref-collision", location=f"{source}:{where}")

    section_refs: set[WpRef] = set()
    for i, raw in enumerate(r.get(data, "modules", list, "$")):
        where = f"$.modules[{i}]"
        mref = r.ref(parse_module_ref, r.get(raw, "ref", str, where), f"{where}.ref")
        if project.has_module(mref):
            raise collide(mref, where)
        mod = Module(mref, r.get(raw, "title", str, where))
        for j, rsec in enumerate(r.get(raw, "sub_sections", list, where)):
            swhere = f"{where}.sub_sections[{j}]"
            sref = r.ref(parse_wp_ref, r.get(rsec, "ref", str, swhere), f"{swhere}.ref")
            if sref in section_refs:
                raise collide(sref, swhere)
            section_refs.add(sref)
            mod.sub_sections.append(SubSection(sref, r.get(rsec, "title", str, swhere)))
        project.modules.append(mod)

    for i, raw in enumerate(r.get(data, "working_papers", list, "$")):
        where = f"$.working_papers[{i}]"
        wref = r.ref(parse_wp_ref, r.get(raw, "ref", str, where), f"{where}.ref")
        if wref in project.working_papers or wref in section_refs:
            raise collide(wref, where)
        parent = r.ref(parse_wp_ref, r.get(raw, "sub_section", str, where), f"{where}.sub_section")
        if parent not in section_refs:
            raise r.fail(f"{where}.sub_section", f"unknown sub-section {parent}")
        wp = WorkingPaper(
            wref,
            r.get(raw, "title", str, where),
            parent,
            next_statement_index=r.get(raw, "next_statement_index", int, where),
        )
        for j, rev in enumerate(r.get(raw, "evidence", list, where)):
            ewhere = f"{where}.evidence[{j}]"
            eref = r.ref(parse_evidence_ref, r.get(rev, "ref", str, ewhere), f"{ewhere}.ref")
            if eref.wp != wref:
                raise r.fail(f"{ewhere}.ref", f"{eref} does not belong to {wref}")
            if any(item.ref == eref for item in wp.evidence):
                raise collide(eref, ewhere)
            digest = r.get(rev, "content_hash", str, ewhere)
            if len(digest) != 64 or any(c not in "0123456789abcdef" for c in digest):
                raise r.fail(f"{ewhere}.content_hash", "expected 64 lowercase hex characters")
            wp.evidence.append(
                EvidenceItem(
                    ref=eref,
                    description=r.get(rev, "description", str, ewhere),
                    original_filename=r.get(rev, "original_filename", str, ewhere),
                    vault_path=r.get(rev, "vault_path", str, ewhere),
                    content_hash=digest,
                    size_bytes=r.get(rev, "size_bytes", int, ewhere),
                    registered_at=r.stamp(r.get(rev, "registered_at", str, ewhere), f"{ewhere}.registered_at"),
                )
            )
        for j, rst in enumerate(r.get(raw, "statements", list, where)):
            swhere = f"{where}.statements[{j}]"
            sref = r.ref(parse_stmt_ref, r.get(rst, "ref", str, swhere), f"{swhere}.ref")
            if sref.wp != wref:
                raise r.fail(f"{swhere}.ref", f"{sref} does not belong to {wref}")
            if any(s.ref == sref for s in wp.statements):
                raise collide(sref, swhere)
            if sref.index >= wp.next_statement_index:
                raise r.fail(f"{where}.next_statement_index", f"must exceed used index {sref.index}")
            status = r.get(rst, "status", str, swhere)
            try:
                status_value = Status(status)
            except ValueError:
                raise r.fail(f"{swhere}.status", f"unknown status {status!r}") from None
            links = {}
            for key in ("forward_links", "backward_links"):
                items = r.get(rst, key, list, swhere)
                if not all(isinstance(x, str) for x in items):
                    raise r.fail(f"{swhere}.{key}", "expected list of statement refs")
                links[key] = [r.ref(parse_stmt_ref, x, f"{swhere}.{key}") for x in items]
            wp.statements.append(
                ControlledStatement(
                    ref=sref,
                    type_name=r.get(rst, "type", str, swhere),
                    heading=r.get(rst, "heading", str, swhere),
                    body=r.get(rst, "body", str, swhere),
                    author=r.get(rst, "author", str, swhere),
                    created_at=r.stamp(r.get(rst, "created_at", str, swhere), f"{swhere}.created_at"),
                    status=status_value,
                    forward_links=links["forward_links"],
                    backward_links=links["backward_links"],
                )
            )
        if not 0 <= wp.next_statement_index <= MAX_STATEMENT_INDEX + 1:
            raise r.fail(f"{where}.next_statement_index", "out of range")
        project.working_papers[wref] = wp
    return project


def load_project(path: str | os.PathLike[str]) -> Project:
    root = Path(path)
    target = root / PROJECT_FILE
    try:
        text = target.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ProjectError(f"no {PROJECT_FILE} under {root}", code="parse-failure", location=str(target)) from None
    except OSError as exc:
        raise ProjectError(str(exc), code="io-failure", location=str(target)) from exc
    project = loads_project(text, source=str(target))
    project.root = root.resolve()
    return project


def is_anchored(project: Project) -> bool:
    """True when the project sits where it was initialised (or last rebound)."""
    if project.root is None:
        return False
    return str(Path(project.root).resolve()) == project.anchor_root


__all__ = [
    "CONTROL_FILE",
    "EVIDENCE_DIR",
    "OUT_DIR",
    "PROJECT_FILE",
    "add_module",
    "add_sub_section",
    "add_working_paper",
    "check_layout",
    "dumps_project",
    "init_project",
    "is_anchored",
    "load_project",
    "loads_project",
    "project_lock",
    "save_project",
]
