"""Module layer review: one module's statement chains as a single readable
document.

The included set is every statement owned by the module's working papers
plus whatever those reach by forward links, so chains that wander into other
modules are followed. Ordering is a depth-first walk from the chain roots:
roots in (WpRef, index) order, children in link-creation order. A statement
with several included parents is emitted when the walk arrives from its last
one, which keeps the result a topological order even where chains merge.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from . import _clock
from .errors import ReviewError, StatementError
from .model import ControlledStatement, Project, Status
from .project import OUT_DIR
from .refs import StmtRef


@dataclass(frozen=True)
class ReviewEntry:
    ref: StmtRef
    type_label: str
    heading: str
    body: str
    # Module letter when the statement lives outside the reviewed module.
    foreign_module: str | None = None


@dataclass(frozen=True)
class ReviewDocument:
    module: str
    title: str
    entries: tuple[ReviewEntry, ...]
    generated_at: datetime
    author: str

    @property
    def refs(self) -> list[StmtRef]:
        return [e.ref for e in self.entries]


def _require_module(project: Project, module_ref: str) -> None:
    if not project.has_module(module_ref):
        raise ReviewError(f"no module {module_ref}", code="unknown-module", location=module_ref)


def included_statements(project: Project, module_ref: str, include_drafts: bool = False) -> dict[StmtRef, ControlledStatement]:
    _require_module(project, module_ref)

    def keep(stmt: ControlledStatement | None) -> bool:
        return stmt is not None and (include_drafts or stmt.status is Status.CLEARED)

    found: dict[StmtRef, ControlledStatement] = {}
    stack = [s for wp in project.papers_in_module(module_ref) for s in wp.statements if keep(s)]
    while stack:
        stmt = stack.pop()
        if stmt.ref in found:
            continue
        found[stmt.ref] = stmt
        for tgt in stmt.forward_links:
            nxt = project.find_statement(tgt)
            if keep(nxt) and tgt not in found:
                stack.append(nxt)  # type: ignore[arg-type]
    return dict(sorted(found.items()))


def _roots(included: dict[StmtRef, ControlledStatement]) -> list[StmtRef]:
    return [ref for ref, s in included.items() if not any(b in included for b in s.backward_links)]


def chain_roots(project: Project, module_ref: str, include_drafts: bool = False) -> list[StmtRef]:
    return _roots(included_statements(project, module_ref, include_drafts))


def flatten_order(included: dict[StmtRef, ControlledStatement]) -> list[StmtRef]:
    succ = {ref: [t for t in s.forward_links if t in included] for ref, s in included.items()}
    pending = {ref: 0 for ref in included}
    for targets in succ.values():
        for t in targets:
            pending[t] += 1

    order: list[StmtRef] = []
    for root in _roots(included):
        order.append(root)
        stack = [iter(succ[root])]
        while stack:
            for child in stack[-1]:
                pending[child] -= 1
                if pending[child] == 0:
                    order.append(child)
                    stack.append(iter(succ[child]))
                    break
            else:
                stack.pop()

    if len(order) != len(included):
        stuck = sorted(set(included) - set(order))
        raise ReviewError(
            "forward links form a cycle among " + ", ".join(map(str, stuck)),
            code="cycle-detected",
            location=str(stuck[0]),
        )
    return order


def flatten_module(
    project: Project,
    module_ref: str,
    include_drafts: bool = False,
    *,
    author: str | None = None,
    generated_at: datetime | None = None,
) -> ReviewDocument:
    """Build the review document for ``module_ref``.

    ``author`` defaults to the distinct authors of the included statements.
    """
    included = included_statements(project, module_ref, include_drafts)
    entries = []
    for ref in flatten_order(included):
        stmt = included[ref]
        owner = project.module_of(ref.wp)
        try:
            label = project.type_def(stmt.type_name).label
        except StatementError:
            label = stmt.type_name
        entries.append(
            ReviewEntry(ref, label, stmt.heading, stmt.body, owner if owner != module_ref else None)
        )
    if author is None:
        author = ", ".join(sorted({included[e.ref].author for e in entries if included[e.ref].author}))
    return ReviewDocument(
        module=module_ref,
        title=project.module(module_ref).title,
        entries=tuple(entries),
        generated_at=generated_at or _clock.local_now(),
        author=author,
    )


def render_review(doc: ReviewDocument) -> str:
    lines = [f"# {doc.title}", ""]
    for e in doc.entries:
        marker = f"<code>{e.ref}</code>"
        if e.foreign_module is not None:
            marker += f" <em>(from {e.ref.wp}, module {e.foreign_module})</em>"
        lines += [f"**{e.type_label}**", "", e.body, "", f'<p align="right">{marker}</p>', ""]
    lines += ["---", "", doc.author, "", _clock.format_stamp(doc.generated_at)]
    return "\n".join(lines) + "\n"


def write_review(project: Project, doc: ReviewDocument) -> Path:
    out = Path(project.root) / OUT_DIR  # type: ignore[arg-type]
    out.mkdir(exist_ok=True)
    path = out / f"review_{doc.module}.md"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_review(doc))
    return path
