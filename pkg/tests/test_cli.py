import json
import shutil

import pytest

from builders import figure4_project, table1_project
from ewp import project as store
from ewp.cli import run
from ewp.refs import parse_stmt_ref


@pytest.fixture
def t1(tmp_path):
    return table1_project(tmp_path / "p", tmp_path / "src").root


def ewp(root, *args):
    return run(["--root", str(root), *args])


def test_usage_errors(capsys, tmp_path):
    assert run([]) == 3
    assert run(["frobnicate"]) == 3
    assert run(["stmt", "add", "D003"]) == 3
    assert "usage" in capsys.readouterr().err
    assert run(["--help"]) == 0


def test_malformed_ref_is_usage_error(t1, capsys):
    assert ewp(t1, "stmt", "clear", "D003/1") == 3
    assert "malformed-ref" in capsys.readouterr().err


def test_init_and_occupied(tmp_path, capsys):
    assert run(["init", str(tmp_path / "n"), "--name", "EuSpRIG 2012"]) == 0
    assert run(["init", str(tmp_path / "n"), "--name", "again"]) == 1
    assert "Error path-occupied" in capsys.readouterr().err


def test_tampered_vault_exits_2(t1, capsys):
    target = t1 / "evidence/G101/1/long_chains.txt"
    target.write_bytes(b"X" + target.read_bytes()[1:])
    assert ewp(t1, "evidence", "verify") == 2
    assert "HASH_MISMATCH G101/1 evidence/G101/1/long_chains.txt" in capsys.readouterr().out


def test_verify_clean(t1, capsys):
    assert ewp(t1, "evidence", "verify") == 0
    assert capsys.readouterr().out == "OK G101/1 evidence/G101/1/long_chains.txt\n"


def test_relocation_and_rebind(t1, tmp_path, capsys):
    moved = tmp_path / "moved"
    shutil.move(str(t1), moved)
    assert ewp(moved, "evidence", "verify") == 2
    captured = capsys.readouterr()
    assert "UNANCHORED G101/1" in captured.out
    assert "unanchored-project" in captured.err
    assert ewp(moved, "review", "G") == 2
    assert ewp(moved, "rebind") == 0
    assert ewp(moved, "evidence", "verify") == 0


def test_cycle_link_exits_1(t1, capsys):
    assert ewp(t1, "stmt", "link", "G003!CtrlStat00", "G002!CtrlStat00") == 1
    assert "Error cycle-detected G003!CtrlStat00:" in capsys.readouterr().err


def test_stmt_add_prints_ref(t1, capsys):
    assert ewp(t1, "stmt", "add", "G101", "--type", "Conclusion", "--heading", "h", "--body", "b", "--author", "SWA") == 0
    assert capsys.readouterr().out == "G101!CtrlStat00\n"
    assert ewp(t1, "graph", "check") == 1
    err = capsys.readouterr().err
    assert "Error missing-parent G101!CtrlStat00: Conclusion must have a parent statement" in err
    data = json.loads((t1 / "out/diagnostics.json").read_text())
    assert data == [
        {
            "severity": "Error",
            "code": "missing-parent",
            "location": "G101!CtrlStat00",
            "message": "Conclusion must have a parent statement",
        }
    ]


def test_evidence_add_with_second_layer(t1, tmp_path, capsys):
    src = tmp_path / "extra.csv"
    src.write_text("a,b\n")
    assert ewp(t1, "evidence", "add", "G101", "1/2", "--desc", "detail", str(src)) == 0
    assert "G101/1/2" in capsys.readouterr().out
    assert ewp(t1, "evidence", "add", "G101", "1/2", "--desc", "detail", str(src)) == 1
    assert "duplicate-evidence-ref" in capsys.readouterr().err
    assert ewp(t1, "evidence", "add", "G101", "0", "--desc", "detail", str(src)) == 3


def test_report_build_figure5(t1, golden):
    assert ewp(t1, "evidence", "index") == 0
    assert ewp(t1, "report", "init", "D", "G") == 0
    assert ewp(t1, "report", "check") == 0
    assert ewp(t1, "report", "build") == 0
    assert (t1 / "out/report.md").read_text() == golden("report_figure5.md")


def test_report_edit_commands(t1, capsys):
    assert ewp(t1, "report", "init", "D", "G") == 0
    assert ewp(t1, "report", "move", "7", "2") == 0
    assert ewp(t1, "report", "check") == 0
    assert ewp(t1, "report", "retitle", "0", "") == 1
    assert ewp(t1, "report", "delete", "2") == 0
    capsys.readouterr()
    assert ewp(t1, "report", "check") == 0
    assert "Warning unreported-statement G003!CtrlStat00" in capsys.readouterr().err
    rows = json.loads((t1 / "report_control.json").read_text())["rows"]
    assert len(rows) == 7


def test_report_build_blocked_by_errors(t1, capsys):
    assert ewp(t1, "report", "init", "D") == 0
    sheet = json.loads((t1 / "report_control.json").read_text())
    sheet["rows"].append({"kind": "Statement", "stmt_ref": "D001!CtrlStat00", "full_heading": "ghost"})
    (t1 / "report_control.json").write_text(json.dumps(sheet))
    assert ewp(t1, "report", "check") == 1
    assert ewp(t1, "report", "build") == 1
    assert "Error unknown-ref D001!CtrlStat00" in capsys.readouterr().err
    assert not (t1 / "out/report.md").exists()


def test_review_writes_file(tmp_path, golden, monkeypatch):
    root = tmp_path / "f4"
    figure4_project(root)
    # 2011-11-20 06:40 UTC
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1321771200")
    assert ewp(root, "review", "F", "--author", "SWA") == 0
    assert (root / "out/review_F.md").read_text() == golden("review_figure4.md")


def test_root_resolution(t1, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("EWP_ROOT", str(t1))
    assert run(["evidence", "verify"]) == 0
    monkeypatch.setenv("EWP_ROOT", str(tmp_path / "nowhere"))
    assert run(["--root", str(t1), "evidence", "verify"]) == 0
    assert run(["evidence", "verify"]) == 1
    monkeypatch.delenv("EWP_ROOT")
    monkeypatch.chdir(t1)
    assert run(["evidence", "verify"]) == 0


def test_mutations_respect_lock(t1, capsys):
    with store.project_lock(t1):
        assert ewp(t1, "stmt", "clear", "D003!CtrlStat00") == 1
    assert "project-locked" in capsys.readouterr().err
    assert ewp(t1, "stmt", "reopen", "D003!CtrlStat00") == 0
    assert store.load_project(t1).statement(parse_stmt_ref("D003!CtrlStat00")).status.value == "Draft"


def test_structure_commands(tmp_path, capsys):
    root = tmp_path / "s"
    assert run(["init", str(root), "--name", "x"]) == 0
    assert ewp(root, "module", "add", "A", "--title", "Index") == 0
    assert ewp(root, "section", "add", "A050", "--module", "A", "--title", "Draft Report Structures") == 0
    assert ewp(root, "wp", "add", "A052", "--section", "A050", "--title", "Control sheet") == 0
    assert ewp(root, "wp", "add", "A052", "--section", "A050", "--title", "again") == 1
    assert ewp(root, "wp", "add", "A053", "--section", "A060", "--title", "orphan") == 1
    assert "ref-collision" in capsys.readouterr().err
