"""Command-line interface.

Exit codes: 0 success, 1 validation errors, 2 integrity failure (hash or
anchor), 3 usage error. Diagnostics go to stderr; data goes to stdout or to
files under the project root.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Callable, NoReturn, Sequence

from . import project as store
from .diagnostics import Diagnostic, has_errors, to_json
from .errors import EwpError
from .model import Status
from .refs import parse_layers, parse_module_ref, parse_stmt_ref, parse_wp_ref

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTEGRITY = 2
EXIT_USAGE = 3

_INTEGRITY_CODES = {"unanchored-project", "vault-incomplete"}
_USAGE_CODES = {"malformed-ref", "zero-layer1"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _root(args: argparse.Namespace) -> Path:
    if args.root:
        return Path(args.root)
    return Path(os.environ.get("EWP_ROOT") or os.getcwd())


def _emit(diags: Sequence[Diagnostic]) -> None:
    for d in diags:
        print(d, file=sys.stderr)


def _load(args: argparse.Namespace):
    proj = store.load_project(_root(args))
    if not store.is_anchored(proj):
        raise EwpError(
            f"project is at {proj.root} but anchored to {proj.anchor_root}; verify, then run `rebind`",
            code="unanchored-project",
            location=str(proj.root),
        )
    return proj


def _mutate(args: argparse.Namespace, action: Callable) -> int:
    root = _root(args)
    with store.project_lock(root):
        proj = _load(args)
        result = action(proj)
        store.save_project(proj)
    return result or EXIT_OK


# -- handlers ---------------------------------------------------------------------


def cmd_init(args):
    proj = store.init_project(args.path, args.name)
    print(proj.anchor_root)
    return EXIT_OK


def cmd_module_add(args):
    def act(p):
        store.add_module(p, parse_module_ref(args.ref), args.title)

    return _mutate(args, act)


def cmd_section_add(args):
    def act(p):
        store.add_sub_section(p, parse_wp_ref(args.ref), parse_module_ref(args.module), args.title)

    return _mutate(args, act)


def cmd_wp_add(args):
    def act(p):
        store.add_working_paper(p, parse_wp_ref(args.ref), parse_wp_ref(args.section), args.title)

    return _mutate(args, act)


def cmd_evidence_add(args):
    from . import vault

    layer1, layer2 = parse_layers(args.layers)

    def act(p):
        item = vault.register_evidence(p, parse_wp_ref(args.wp), layer1, layer2, args.desc, args.file)
        print(f"{item.ref} {item.content_hash} {item.vault_path}")

    return _mutate(args, act)


def cmd_evidence_verify(args):
    from . import vault

    proj = store.load_project(_root(args))
    rep = vault.verify_evidence(proj)
    for item in rep.items:
        print(f"{item.status.value} {item.ref} {item.vault_path}")
    if not store.is_anchored(proj):
        print(
            f"Error unanchored-project {proj.root}: anchored to {proj.anchor_root}; run `rebind` once the move is confirmed",
            file=sys.stderr,
        )
        return EXIT_INTEGRITY
    return EXIT_OK if rep.overall else EXIT_INTEGRITY


def cmd_evidence_index(args):
    from . import vault

    proj = _load(args)
    for path in vault.write_evidence_index(proj):
        print(path.relative_to(proj.root))
    return EXIT_OK


def cmd_rebind(args):
    from . import vault

    root = _root(args)
    with store.project_lock(root):
        proj = store.load_project(root)
        vault.rebind_project(proj, root)
        store.save_project(proj)
    print(proj.anchor_root)
    return EXIT_OK


def cmd_stmt_add(args):
    from . import graph

    def act(p):
        stmt = graph.create_statement(p, parse_wp_ref(args.wp), args.type, args.heading, args.body, args.author)
        print(stmt.ref)

    return _mutate(args, act)


def cmd_stmt_link(args):
    from . import graph

    src, dst = parse_stmt_ref(args.src), parse_stmt_ref(args.dst)
    return _mutate(args, lambda p: graph.link_statements(p, src, dst))


def _status_cmd(status: Status):
    def handler(args):
        from . import graph

        refs = [parse_stmt_ref(r) for r in args.refs]

        def act(p):
            for ref in refs:
                graph.set_status(p, ref, status)

        return _mutate(args, act)

    return handler


def cmd_graph_check(args):
    from . import graph

    proj = _load(args)
    diags = graph.validate_graph(proj) + store.check_layout(proj)
    out = Path(proj.root) / store.OUT_DIR
    out.mkdir(exist_ok=True)
    (out / "diagnostics.json").write_text(to_json(diags), encoding="utf-8")
    _emit(diags)
    return EXIT_VALIDATION if has_errors(diags) else EXIT_OK


def cmd_review(args):
    from . import review

    proj = _load(args)
    doc = review.flatten_module(proj, parse_module_ref(args.module), args.include_drafts, author=args.author)
    print(review.write_review(proj, doc).relative_to(proj.root))
    return EXIT_OK


def cmd_report_init(args):
    from . import report

    def act(p):
        sheet = report.generate_control_sheet(p, [parse_module_ref(m) for m in args.modules], args.title)
        print(report.save_control_sheet(sheet, p.root).relative_to(p.root))

    return _mutate(args, act)


def cmd_report_check(args):
    from . import report

    proj = _load(args)
    diags = report.check_report_order(report.load_control_sheet(proj.root), proj)
    _emit(diags)
    return EXIT_VALIDATION if has_errors(diags) else EXIT_OK


def cmd_report_build(args):
    from . import report

    proj = _load(args)
    sheet = report.load_control_sheet(proj.root)
    diags = report.check_report_order(sheet, proj)
    _emit(diags)
    if has_errors(diags):
        return EXIT_VALIDATION
    doc = report.build_report(sheet, proj)
    print(report.write_report(proj, doc).relative_to(proj.root))
    return EXIT_OK


def _edit_cmd(make_edit):
    def handler(args):
        from . import report

        proj = _load(args)
        with store.project_lock(proj.root):
            sheet = report.load_control_sheet(proj.root)
            report.save_control_sheet(report.apply_sheet_edit(sheet, make_edit(report, args)), proj.root)
        return EXIT_OK

    return handler


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ewp", description="Evidence-linked working papers.")
    parser.add_argument("--root", help="project root (default: $EWP_ROOT, else the current directory)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a new project directory")
    p.add_argument("path")
    p.add_argument("--name", required=True)
    p.set_defaults(func=cmd_init)

    for noun, handler, extra in (
        ("module", cmd_module_add, None),
        ("section", cmd_section_add, "--module"),
        ("wp", cmd_wp_add, "--section"),
    ):
        grp = sub.add_parser(noun).add_subparsers(dest="action", required=True)
        p = grp.add_parser("add")
        p.add_argument("ref")
        p.add_argument("--title", required=True)
        if extra:
            p.add_argument(extra, required=True)
        p.set_defaults(func=handler)

    ev = sub.add_parser("evidence", help="evidence vault").add_subparsers(dest="action", required=True)
    p = ev.add_parser("add", help="copy a source file into the vault")
    p.add_argument("wp")
    p.add_argument("layers", help="1st layer, optionally /2nd layer, e.g. 3 or 3/1")
    p.add_argument("--desc", required=True)
    p.add_argument("file")
    p.set_defaults(func=cmd_evidence_add)
    ev.add_parser("verify").set_defaults(func=cmd_evidence_verify)
    ev.add_parser("index").set_defaults(func=cmd_evidence_index)

    sub.add_parser("rebind", help="accept the project's current location").set_defaults(func=cmd_rebind)

    st = sub.add_parser("stmt", help="Controlled Statements").add_subparsers(dest="action", required=True)
    p = st.add_parser("add")
    p.add_argument("wp")
    p.add_argument("--type", required=True)
    p.add_argument("--heading", required=True)
    p.add_argument("--body", required=True)
    p.add_argument("--author", required=True)
    p.set_defaults(func=cmd_stmt_add)
    p = st.add_parser("link")
    p.add_argument("src")
    p.add_argument("dst")
    p.set_defaults(func=cmd_stmt_link)
    for name, status in (("clear", Status.CLEARED), ("reopen", Status.DRAFT)):
        p = st.add_parser(name)
        p.add_argument("refs", nargs="+", metavar="ref")
        p.set_defaults(func=_status_cmd(status))

    gr = sub.add_parser("graph").add_subparsers(dest="action", required=True)
    gr.add_parser("check").set_defaults(func=cmd_graph_check)

    p = sub.add_parser("review", help="module layer review")
    p.add_argument("module")
    p.add_argument("--include-drafts", action="store_true")
    p.add_argument("--author")
    p.set_defaults(func=cmd_review)

    rp = sub.add_parser("report", help="report control sheet").add_subparsers(dest="action", required=True)
    p = rp.add_parser("init")
    p.add_argument("modules", nargs="+")
    p.add_argument("--title")
    p.set_defaults(func=cmd_report_init)
    rp.add_parser("check").set_defaults(func=cmd_report_check)
    rp.add_parser("build").set_defaults(func=cmd_report_build)
    p = rp.add_parser("move")
    p.add_argument("src", type=int)
    p.add_argument("dst", type=int)
    p.set_defaults(func=_edit_cmd(lambda report, a: report.MoveRow(a.src, a.dst)))
    p = rp.add_parser("delete")
    p.add_argument("index", type=int)
    p.set_defaults(func=_edit_cmd(lambda report, a: report.DeleteRow(a.index)))
    p = rp.add_parser("retitle")
    p.add_argument("index", type=int)
    p.add_argument("heading")
    p.set_defaults(func=_edit_cmd(lambda report, a: report.RetitleRow(a.index, a.heading)))
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except EwpError as exc:
        print(exc.render(), file=sys.stderr)
        if exc.code in _INTEGRITY_CODES:
            return EXIT_INTEGRITY
        if exc.code in _USAGE_CODES:
            return EXIT_USAGE
        return EXIT_VALIDATION


def main() -> NoReturn:
    sys.exit(run())
