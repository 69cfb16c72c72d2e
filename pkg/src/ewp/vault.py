"""Evidence vault and the Documentary Evidence Index.

Source files are copied under ``<root>/evidence/<wp>/<l1>[/<l2>]/<name>`` and
fingerprinted with SHA-256. Validity is bound to the project's location: once
the root moves away from the recorded anchor every item reports
``UNANCHORED`` until :func:`rebind_project` is run.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import os
from dataclasses import dataclass
from pathlib import Path, PurePosixPath

from . import _clock
from .errors import EvidenceError
from .model import EvidenceItem, Project
from .project import EVIDENCE_DIR, OUT_DIR, is_anchored
from .refs import EvidenceRef, WpRef

INDEX_COLUMNS = (
    "Evidence Reference",
    "EWP Ref",
    "1st Layer Ref",
    "2nd Layer Ref",
    "Working Paper Heading or Description",
    "Return Ref",
)

_CHUNK = 1 << 16


class ItemStatus(str, enum.Enum):
    OK = "OK"
    HASH_MISMATCH = "HASH_MISMATCH"
    MISSING = "MISSING"
    UNANCHORED = "UNANCHORED"


@dataclass(frozen=True)
class ItemCheck:
    ref: EvidenceRef
    status: ItemStatus
    vault_path: str


@dataclass(frozen=True)
class VerificationReport:
    items: tuple[ItemCheck, ...]

    @property
    def overall(self) -> bool:
        return all(item.status is ItemStatus.OK for item in self.items)

    def status_of(self, ref: EvidenceRef) -> ItemStatus:
        return next(item.status for item in self.items if item.ref == ref)


@dataclass(frozen=True)
class EvidenceIndexRow:
    evidence_reference: str
    ewp_ref: str
    layer1: int
    layer2: int
    description: str
    return_ref: str
    vault_path: str = ""

    def columns(self) -> tuple[str, str, str, str, str, str]:
        return (
            self.evidence_reference,
            self.ewp_ref,
            str(self.layer1),
            str(self.layer2),
            self.description,
            self.return_ref,
        )


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(_CHUNK), b""):
            digest.update(block)
    return digest.hexdigest()


def _require_root(project: Project) -> Path:
    if project.root is None or not is_anchored(project):
        raise EvidenceError(
            f"project is at {project.root} but anchored to {project.anchor_root}; run rebind",
            code="unanchored-project",
            location=str(project.root),
        )
    return Path(project.root)


def vault_relpath(ref: EvidenceRef, filename: str) -> str:
    parts = [EVIDENCE_DIR, str(ref.wp), str(ref.layer1)]
    if ref.layer2:
        parts.append(str(ref.layer2))
    parts.append(filename)
    return str(PurePosixPath(*parts))


def register_evidence(
    project: Project,
    wp_ref: WpRef,
    layer1: int,
    layer2: int,
    description: str,
    source_path: str | os.PathLike[str],
) -> EvidenceItem:
    """Copy ``source_path`` into the vault and attach it to ``wp_ref``.

    The working paper's evidence list is the context side of the link; the
    item's ``return_ref`` (its owning working paper) is the index side.
    """
    root = _require_root(project)
    wp = project.working_paper(wp_ref)
    ref = EvidenceRef(wp_ref, layer1, layer2)
    if project.find_evidence(ref) is not None:
        raise EvidenceError(f"{ref} is already registered", code="duplicate-evidence-ref", location=str(ref))
    source = Path(source_path)
    if not source.is_file():
        raise EvidenceError(f"cannot read {source}", code="source-missing", location=str(source))

    rel = vault_relpath(ref, source.name)
    target = root / rel
    target.parent.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256()
    size = 0
    try:
        with open(source, "rb") as src, open(target, "wb") as dst:
            for block in iter(lambda: src.read(_CHUNK), b""):
                digest.update(block)
                dst.write(block)
                size += len(block)
    except OSError as exc:
        raise EvidenceError(str(exc), code="source-missing", location=str(source)) from exc

    item = EvidenceItem(
        ref=ref,
        description=description,
        original_filename=source.name,
        vault_path=rel,
        content_hash=digest.hexdigest(),
        size_bytes=size,
        registered_at=_clock.utc_now(),
    )
    wp.evidence.append(item)
    return item


def verify_evidence(project: Project) -> VerificationReport:
    items = sorted(project.evidence_items(), key=lambda it: it.ref)
    if not is_anchored(project):
        return VerificationReport(tuple(ItemCheck(it.ref, ItemStatus.UNANCHORED, it.vault_path) for it in items))
    root = Path(project.root)  # type: ignore[arg-type]
    checks = []
    for it in items:
        path = root / it.vault_path
        if not path.is_file():
            status = ItemStatus.MISSING
        elif path.stat().st_size != it.size_bytes or file_sha256(path) != it.content_hash:
            status = ItemStatus.HASH_MISMATCH
        else:
            status = ItemStatus.OK
        checks.append(ItemCheck(it.ref, status, it.vault_path))
    return VerificationReport(tuple(checks))


def rebind_project(project: Project, confirmed_new_root: str | os.PathLike[str]) -> None:
    """Accept ``confirmed_new_root`` as the project's new home.

    Refuses when any vault file is absent there. Content is not re-hashed, so
    tampering is still reported by the next :func:`verify_evidence`.
    """
    new_root = Path(confirmed_new_root).resolve()
    missing = [str(it.ref) for it in project.evidence_items() if not (new_root / it.vault_path).is_file()]
    if missing:
        raise EvidenceError(
            f"vault files missing for {', '.join(missing)}",
            code="vault-incomplete",
            location=str(new_root),
        )
    project.anchor_root = str(new_root)
    project.root = new_root


def build_evidence_index(project: Project) -> list[EvidenceIndexRow]:
    rows = [
        EvidenceIndexRow(
            evidence_reference=str(it.ref),
            ewp_ref=str(it.ref.wp),
            layer1=it.ref.layer1,
            layer2=it.ref.layer2,
            description=it.description,
            return_ref=str(it.return_ref),
            vault_path=it.vault_path,
        )
        for it in project.evidence_items()
    ]
    rows.sort(key=lambda row: (row.ewp_ref, row.layer1, row.layer2))
    return rows


def render_index_csv(rows: list[EvidenceIndexRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(INDEX_COLUMNS)
    for row in rows:
        writer.writerow(row.columns())
    return buf.getvalue()


def _cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ")


def render_index_markdown(rows: list[EvidenceIndexRow]) -> str:
    """Table for ``out/evidence_index.md``. Links are relative to ``out/``."""
    lines = [
        "# Documentary Evidence Index",
        "",
        "| " + " | ".join(INDEX_COLUMNS) + " |",
        "|" + "---|" * len(INDEX_COLUMNS),
    ]
    for row in rows:
        anchor = "ev-" + row.evidence_reference.replace("/", "-")
        ref_cell = f'<a id="{anchor}"></a>[{row.evidence_reference}](../{row.vault_path})'
        cells = [ref_cell, row.ewp_ref, str(row.layer1), str(row.layer2), _cell(row.description), row.return_ref]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_evidence_index(project: Project) -> tuple[Path, Path]:
    root = Path(project.root)  # type: ignore[arg-type]
    rows = build_evidence_index(project)
    out = root / OUT_DIR
    out.mkdir(exist_ok=True)
    md_path, csv_path = out / "evidence_index.md", out / "evidence_index.csv"
    with open(md_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_index_markdown(rows))
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_index_csv(rows))
    return md_path, csv_path
