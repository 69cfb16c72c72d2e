"""Controlled Statements and the links that chain them into arguments.

A forward link ``a -> b`` is stored twice: ``b`` in ``a.forward_links`` and
``a`` in ``b.backward_links``. Links obey the project's type registry and the
forward relation is kept acyclic.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping

from . import _clock
from .diagnostics import Diagnostic, diag
from .errors import StatementError
from .model import ControlledStatement, Project, Status
from .refs import MAX_STATEMENT_INDEX, StmtRef, WpRef


def create_statement(
    project: Project,
    wp_ref: WpRef,
    type_name: str,
    heading: str,
    body: str,
    author: str,
) -> ControlledStatement:
    if wp_ref not in project.working_papers:
        raise StatementError(f"no working paper {wp_ref}", code="unknown-wp", location=str(wp_ref))
    project.type_def(type_name)
    wp = project.working_papers[wp_ref]
    if wp.next_statement_index > MAX_STATEMENT_INDEX:
        raise StatementError(
            f"{wp_ref} already used all {MAX_STATEMENT_INDEX + 1} statement refs",
            code="index-exhausted",
            location=str(wp_ref),
        )
    stmt = ControlledStatement(
        ref=StmtRef(wp_ref, wp.next_statement_index),
        type_name=type_name,
        heading=heading,
        body=body,
        author=author,
        created_at=_clock.local_now(),
    )
    wp.statements.append(stmt)
    wp.next_statement_index += 1
    return stmt


def reachable(start: StmtRef, succ: Mapping[StmtRef, Iterable[StmtRef]]) -> set[StmtRef]:
    """Nodes reachable from ``start`` (inclusive) along ``succ``."""
    seen = {start}
    stack = [start]
    while stack:
        for nxt in succ.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def forward_map(project: Project) -> dict[StmtRef, list[StmtRef]]:
    return {s.ref: list(s.forward_links) for s in project.statements()}


def link_statements(project: Project, from_ref: StmtRef, to_ref: StmtRef) -> None:
    if from_ref == to_ref:
        raise StatementError("a statement cannot link to itself", code="self-link", location=str(from_ref))
    src = project.statement(from_ref)
    dst = project.statement(to_ref)
    if to_ref in src.forward_links:
        raise StatementError(f"{from_ref} already links to {to_ref}", code="duplicate-link", location=str(from_ref))
    if from_ref in reachable(to_ref, forward_map(project)):
        raise StatementError(
            f"linking {from_ref} -> {to_ref} would close a cycle",
            code="cycle-detected",
            location=str(from_ref),
        )
    src_type = project.type_def(src.type_name)
    if dst.type_name not in src_type.allowed_successors:
        raise StatementError(
            f"{src.type_name} cannot be followed by {dst.type_name}",
            code="incompatible-types",
            location=str(from_ref),
        )
    src.forward_links.append(to_ref)
    dst.backward_links.append(from_ref)


def set_status(project: Project, stmt_ref: StmtRef, status: Status) -> None:
    project.statement(stmt_ref).status = Status(status)


def strongly_connected(nodes: Iterable[StmtRef], succ: Mapping[StmtRef, Iterable[StmtRef]]) -> list[list[StmtRef]]:
    """Tarjan's SCCs, iterative. Edges to nodes outside ``nodes`` are ignored."""
    nodes = list(nodes)
    members = set(nodes)
    index: dict[StmtRef, int] = {}
    low: dict[StmtRef, int] = {}
    on_stack: set[StmtRef] = set()
    stack: list[StmtRef] = []
    out: list[list[StmtRef]] = []
    counter = 0
    for start in nodes:
        if start in index:
            continue
        work = [(start, iter([n for n in succ.get(start, ()) if n in members]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, children = work[-1]
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter([n for n in succ.get(child, ()) if n in members])))
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        top = stack.pop()
                        on_stack.discard(top)
                        comp.append(top)
                        if top == node:
                            break
                    out.append(sorted(comp))
    return out


def validate_graph(project: Project) -> list[Diagnostic]:
    """Check a (possibly hand-edited) project's statement graph.

    Errors: dangling-link, asymmetric-link, unknown-type, incompatible-types,
    missing-parent, cycle. Warnings: branch, orphan, draft-in-chain.
    """
    stmts = {s.ref: s for s in project.statements()}
    types = {td.name: td for td in project.type_registry}
    out: list[Diagnostic] = []

    for ref, s in stmts.items():
        if s.type_name not in types:
            out.append(diag("unknown-type", ref, f"type {s.type_name!r} is not registered"))
        for tgt in s.forward_links:
            other = stmts.get(tgt)
            if other is None:
                out.append(diag("dangling-link", ref, f"forward link to missing {tgt}"))
                continue
            if ref not in other.backward_links:
                out.append(diag("asymmetric-link", ref, f"{tgt} has no backward link to {ref}"))
            td = types.get(s.type_name)
            if td is not None and other.type_name not in td.allowed_successors:
                out.append(diag("incompatible-types", ref, f"{s.type_name} cannot be followed by {other.type_name}"))
            if s.status is Status.CLEARED and other.status is Status.DRAFT:
                out.append(diag("draft-in-chain", tgt, f"Draft statement linked from Cleared {ref}"))
        for src in s.backward_links:
            other = stmts.get(src)
            if other is None:
                out.append(diag("dangling-link", ref, f"backward link to missing {src}"))
            elif ref not in other.forward_links:
                out.append(diag("asymmetric-link", ref, f"{src} has no forward link to {ref}"))
        td = types.get(s.type_name)
        if td is not None and td.requires_parent and not s.backward_links:
            out.append(diag("missing-parent", ref, f"{s.type_name} must have a parent statement"))
        if len(s.forward_links) >= 2:
            targets = ", ".join(str(t) for t in s.forward_links)
            out.append(diag("branch", ref, f"chain branches to {targets}"))

    succ = {ref: [t for t in s.forward_links if t in stmts] for ref, s in stmts.items()}
    for comp in strongly_connected(stmts, succ):
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            out.append(diag("cycle", comp[0], "forward links form a cycle through " + ", ".join(map(str, comp))))

    roots = [ref for ref, s in stmts.items() if not s.backward_links]
    seen: set[StmtRef] = set()
    for r in roots:
        seen |= reachable(r, succ)
    for ref in stmts:
        if ref not in seen:
            out.append(diag("orphan", ref, "not reachable from any chain root"))
    return out
