import random

import pytest
from hypothesis import given, settings, strategies as st

from builders import figure4_project, random_dag_project, table1_project
from ewp import graph, project as store, report
from ewp.diagnostics import Severity
from ewp.errors import ProjectError, ReportError
from ewp.model import Project, Status
from ewp.refs import WpRef, parse_stmt_ref as S
from ewp.report import ControlSheet, ControlSheetRow, DeleteRow, MoveRow, RetitleRow, RowKind


@pytest.fixture
def table1(tmp_path):
    return table1_project(tmp_path / "p", tmp_path / "src")


def as_tsv(sheet):
    return "".join(f"{r.kind.value}\t{r.ref_text}\t{r.full_heading}\n" for r in sheet.rows)


def codes(diags):
    return [(d.code, d.location) for d in diags]


def row_of(sheet, ref_text):
    return next(i for i, r in enumerate(sheet.rows) if r.ref_text == ref_text)


def test_figure5_generation(table1, golden):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    assert as_tsv(sheet) == golden("control_sheet_figure5.tsv")
    assert sheet.title == "Project Report Control Sheet (EUSPRIG 2012)"


def test_empty_module_list(table1):
    assert report.generate_control_sheet(table1, []).rows == ()


def test_module_without_statements(table1):
    sheet = report.generate_control_sheet(table1, ["A"])
    assert [(r.kind, r.full_heading) for r in sheet.rows] == [(RowKind.MODULE, "Index")]
    # a lone heading is, by definition, an empty section
    assert codes(report.check_report_order(sheet, table1)) == [("empty-section", "A")]


def test_unknown_module(table1):
    with pytest.raises(ReportError) as exc:
        report.generate_control_sheet(table1, ["D", "Q"])
    assert exc.value.code == "unknown-module"


def test_pristine_sheets_are_clean(table1):
    assert report.check_report_order(report.generate_control_sheet(table1, ["D", "G"]), table1) == []
    proj = figure4_project()
    assert report.check_report_order(report.generate_control_sheet(proj, ["F"]), proj) == []


def test_figure4_sheet_splits_wp_to_keep_chain_order():
    proj = figure4_project()
    sheet = report.generate_control_sheet(proj, ["F"])
    stmts = [str(r.stmt_ref) for r in sheet.rows if r.kind is RowKind.STATEMENT]
    assert stmts[0] == "F051!CtrlStat00" and stmts[-1] == "F001!CtrlStat01"
    wp_rows = [r.ref_text for r in sheet.rows if r.kind is RowKind.WP]
    assert wp_rows == ["F051", "F052", "F053", "F001", "F101", "F102", "F001"]


def test_swap_yields_precedence_inversion():
    proj = figure4_project()
    sheet = report.generate_control_sheet(proj, ["F"])
    src, dst = row_of(sheet, "F051!CtrlStat00"), row_of(sheet, "F052!CtrlStat00")
    edited = report.apply_sheet_edit(sheet, MoveRow(src, dst))
    assert row_of(edited, "F051!CtrlStat00") > row_of(edited, "F052!CtrlStat00")
    found = report.check_report_order(edited, proj)
    # oracle: every forward link whose rows are out of order
    pos = {r.stmt_ref: i for i, r in enumerate(edited.rows) if r.kind is RowKind.STATEMENT}
    expected = sorted(
        str(b) for a in pos for b in proj.statement(a).forward_links if b in pos and pos[b] < pos[a]
    )
    assert sorted(d.location for d in found if d.code == "precedence-inversion") == expected == ["F051!CtrlStat01"]
    assert all(d.severity is Severity.WARNING for d in found)


def test_deleted_statement_row_is_unreported(table1):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    edited = report.apply_sheet_edit(sheet, DeleteRow(row_of(sheet, "G003!CtrlStat00")))
    found = codes(report.check_report_order(edited, table1))
    assert ("unreported-statement", "G003!CtrlStat00") in found
    assert ("empty-section", "G003") in found


def test_unknown_and_duplicate_refs(table1):
    sheet = report.generate_control_sheet(table1, ["D"])
    rows = sheet.rows + (
        ControlSheetRow.statement(S("D003!CtrlStat00"), "again"),
        ControlSheetRow.statement(S("D003!CtrlStat07"), "ghost"),
        ControlSheetRow.wp(WpRef("D", 999), "ghost paper"),
        ControlSheetRow.module("Q", "ghost module"),
    )
    found = report.check_report_order(ControlSheet("t", rows), table1)
    errors = [(d.code, d.location) for d in found if d.severity is Severity.ERROR]
    assert errors == [
        ("duplicate-statement", "D003!CtrlStat00"),
        ("unknown-ref", "D003!CtrlStat07"),
        ("unknown-ref", "D999"),
        ("unknown-ref", "Q"),
    ]


def test_cross_module_order_against_links_warns(table1):
    graph.link_statements(table1, S("G003!CtrlStat00"), S("D003!CtrlStat00"))
    found = codes(report.check_report_order(report.generate_control_sheet(table1, ["D", "G"]), table1))
    assert found == [("precedence-inversion", "D003!CtrlStat00")]
    assert report.check_report_order(report.generate_control_sheet(table1, ["G", "D"]), table1) == []


def test_move_last_statement_above_first(table1):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    last, first = len(sheet.rows) - 1, row_of(sheet, "D003!CtrlStat00")
    edited = report.apply_sheet_edit(sheet, MoveRow(last, first))
    expected = list(sheet.rows)
    expected.insert(first, expected.pop(last))
    assert list(edited.rows) == expected
    assert edited.rows[first].ref_text == "G003!CtrlStat00"


def test_delete_wp_heading_keeps_statements(table1):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    i = row_of(sheet, "G003")
    edited = report.apply_sheet_edit(sheet, DeleteRow(i))
    assert len(edited.rows) == len(sheet.rows) - 1
    assert edited.rows[i].ref_text == "G003!CtrlStat00"
    assert edited.rows[i - 2].ref_text == "G002"
    text = report.build_report(edited, table1).text
    assert "## Module Level Review of 'Linked Statements in Practice'" not in text
    assert "### Two Types of Long Chains" in text


def test_edits_are_pure_and_validated(table1):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    before = sheet.rows
    renamed = report.apply_sheet_edit(sheet, RetitleRow(0, "Introduction"))
    assert renamed.rows[0].full_heading == "Introduction" and sheet.rows == before
    with pytest.raises(ReportError) as exc:
        report.apply_sheet_edit(sheet, RetitleRow(0, ""))
    assert exc.value.code == "empty-heading"
    with pytest.raises(ReportError) as exc:
        report.apply_sheet_edit(sheet, RetitleRow(0, "   "))
    assert exc.value.code == "empty-heading"
    for edit in (DeleteRow(99), MoveRow(0, 99), MoveRow(-1, 0), RetitleRow(8, "x")):
        with pytest.raises(ReportError) as exc:
            report.apply_sheet_edit(sheet, edit)
        assert exc.value.code == "index-out-of-range"


def test_row_invariants():
    with pytest.raises(ValueError):
        ControlSheetRow(RowKind.MODULE, "x", wp_ref=WpRef("D", 3))
    with pytest.raises(ValueError):
        ControlSheetRow(RowKind.STATEMENT, "x", module_ref="D", stmt_ref=S("D003!CtrlStat00"))
    with pytest.raises(ReportError):
        ControlSheetRow.module("D", "")


def test_figure5_report(table1, golden):
    doc = report.build_report(report.generate_control_sheet(table1, ["D", "G"]), table1)
    assert doc.text == golden("report_figure5.md")
    headings = [line for line in doc.text.splitlines() if line.startswith("#")]
    assert headings[:3] == [
        "# Report",
        "## Module Level Review of 'EuSpRIG 2012'",
        "### Aide Memoire for Talk/Demonstration at EuSpRIG 2012",
    ]


def test_empty_sheet_report(table1):
    text = report.build_report(ControlSheet("Empty"), table1).text
    assert text == "<!-- Draft report: Empty -->\n"


def test_report_refuses_integrity_errors(table1):
    sheet = ControlSheet("t", (ControlSheetRow.statement(S("D003!CtrlStat05"), "ghost"),))
    with pytest.raises(ReportError) as exc:
        report.build_report(sheet, table1)
    assert exc.value.code == "integrity-errors-present"


def test_evidence_citations_linked_only_when_registered(table1):
    text = report.link_evidence("See G101/1, G101/2 and G101/1/3; not X101/1x.", table1)
    assert text == "See [G101/1](evidence_index.md#ev-G101-1), G101/2 and G101/1/3; not X101/1x."


def test_sheet_file_round_trip(table1):
    sheet = report.generate_control_sheet(table1, ["D", "G"])
    path = report.save_control_sheet(sheet, table1.root)
    assert path.name == "report_control.json"
    assert report.load_control_sheet(table1.root) == sheet
    assert report.dumps_sheet(report.load_control_sheet(table1.root)) == path.read_text()


@pytest.mark.parametrize(
    "patch, where",
    [
        ({"kind": "Chapter"}, "kind"),
        ({"full_heading": ""}, "full_heading"),
        ({"module_ref": "dd"}, "module_ref"),
        ({"wp_ref": "D003"}, "rows[0]"),
    ],
)
def test_sheet_file_errors(table1, patch, where):
    import json

    data = report.sheet_to_json(report.generate_control_sheet(table1, ["D"]))
    data["rows"][0].update(patch)
    with pytest.raises(ProjectError) as exc:
        report.loads_sheet(json.dumps(data))
    assert exc.value.code == "parse-failure"
    assert where in exc.value.location


# -- invariants ---------------------------------------------------------------------------


def single_module_projects(seed):
    rng = random.Random(seed)
    proj = random_dag_project(rng, 12, modules="F")
    # a module with nothing Cleared yields a lone heading (empty-section)
    first = next(proj.statements())
    graph.set_status(proj, first.ref, Status.CLEARED)
    return proj


@pytest.mark.parametrize("seed", range(60))
def test_generation_soundness_and_report_order(seed):
    proj = single_module_projects(seed)
    sheet = report.generate_control_sheet(proj, ["F"])
    assert report.check_report_order(sheet, proj) == []
    text = report.build_report(sheet, proj).text
    lines = text.splitlines()
    headings = [line for line in lines if line.startswith("#")]
    expected = ["#" * r.kind.level + " " + r.full_heading for r in sheet.rows]
    assert headings == expected
    for r in sheet.rows:
        if r.kind is RowKind.STATEMENT:
            assert lines.count(proj.statement(r.stmt_ref).body) == 1
    body_lines = [line for line in lines if line.startswith("body ")]
    assert len(body_lines) == sum(r.kind is RowKind.STATEMENT for r in sheet.rows)


edits = st.one_of(
    st.builds(MoveRow, st.integers(-2, 14), st.integers(-2, 14)),
    st.builds(DeleteRow, st.integers(-2, 14)),
    st.builds(RetitleRow, st.integers(-2, 14), st.sampled_from(["", "New heading", "#"])),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(edits, max_size=12))
def test_edit_closure(edit_list):
    proj = figure4_project()
    sheet = report.generate_control_sheet(proj, ["F"])
    for edit in edit_list:
        try:
            sheet = report.apply_sheet_edit(sheet, edit)
        except ReportError as exc:
            assert exc.code in {"index-out-of-range", "empty-heading"}
        diags = report.check_report_order(sheet, proj)
        assert all(d.code in {"unreported-statement", "empty-section", "precedence-inversion"} for d in diags)
        report.build_report(sheet, proj)
