"""Load entity collections and ground truth from CSV / JSON-lines files."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .datamodel import EntityCollection, EntityProfile, GroundTruth
from .errors import DuplicateIdError, MissingIdColumnError, ParseError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetBundle:
    """Two entity collections plus an optional ground truth."""

    e1: EntityCollection
    e2: EntityCollection
    gt: Optional[GroundTruth]
    name: str = ""


@dataclass
class ValidationReport:
    e1_count: int
    e2_count: int
    gt_count: int
    violations: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "e1_count": self.e1_count,
            "e2_count": self.e2_count,
            "gt_count": self.gt_count,
            "violations": [list(v) for v in self.violations],
            "warnings": list(self.warnings),
        }


def _detect_format(path: Path, fmt: Optional[str]) -> str:
    if fmt is not None:
        return fmt
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    return "csv"


def load_collection(
    path: str | Path,
    format: Optional[str] = None,
    id_column: str = "id",
    source_id: str = "E1",
) -> EntityCollection:
    """Load one entity collection from a CSV (with header) or JSON-lines file.

    Every non-id column becomes an attribute-value pair; missing cells become
    absent pairs rather than empty-string pairs.
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    if fmt == "csv":
        entities = _load_csv(path, id_column)
    elif fmt == "jsonl":
        entities = _load_jsonl(path, id_column)
    else:
        raise ParseError(f"unknown format {fmt!r} (expected 'csv' or 'jsonl')")
    if not entities:
        raise ParseError(f"{path}: no records found")
    return EntityCollection(source_id=source_id, entities=tuple(entities))


def _load_csv(path: Path, id_column: str) -> list[EntityProfile]:
    entities: list[EntityProfile] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file")
            if id_column not in header:
                raise MissingIdColumnError(f"{path}: id column {id_column!r} not in header {header}")
            id_pos = header.index(id_column)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) > len(header):
                    raise ParseError(f"{path}:{lineno}: row has more cells than the header")
                eid = row[id_pos] if id_pos < len(row) else ""
                if not eid:
                    raise MissingIdColumnError(f"{path}:{lineno}: empty id cell")
                attrs = [
                    (header[i], row[i])
                    for i in range(len(row))
                    if i != id_pos and row[i] != ""
                ]
                entities.append(EntityProfile(id=eid, attributes=tuple(attrs)))
    except csv.Error as exc:
        raise ParseError(f"{path}: malformed CSV: {exc}") from exc
    return entities


def _load_jsonl(path: Path, id_column: str) -> list[EntityProfile]:
    entities: list[EntityProfile] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            if id_column not in record:
                raise MissingIdColumnError(f"{path}:{lineno}: id column {id_column!r} missing")
            eid = str(record[id_column])
            if not eid:
                raise MissingIdColumnError(f"{path}:{lineno}: empty id")
            attrs = [
                (k, str(v))
                for k, v in record.items()
                if k != id_column and v is not None
            ]
            entities.append(EntityProfile(id=eid, attributes=tuple(attrs)))
    return entities


def write_collection_csv(collection: EntityCollection, path: str | Path, id_column: str = "id") -> None:
    """Write a collection back to canonical CSV (id column first, attributes in
    first-seen order). Used for round-tripping and debugging."""
    columns: list[str] = []
    seen: set[str] = set()
    for e in collection.entities:
        for name, _ in e.attributes:
            if name not in seen:
                seen.add(name)
                columns.append(name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([id_column] + columns)
        for e in collection.entities:
            values = {}
            for name, value in e.attributes:
                # repeated attribute names keep the first occurrence in CSV form
                values.setdefault(name, value)
            writer.writerow([e.id] + [values.get(c, "") for c in columns])


def load_ground_truth(path: str | Path, bundle: Optional[DatasetBundle] = None) -> GroundTruth:
    """Load a two-column (id1, id2) CSV of known matches.

    The file may be headered or headerless; when a bundle is supplied the
    header is auto-detected by attempting id resolution on the first row.
    Duplicate pairs are collapsed and counted.
    """
    path = Path(path)
    rows: list[tuple[str, str]] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
                rows.append((row[0], row[1]))
    except csv.Error as exc:
        raise ParseError(f"{path}: malformed CSV: {exc}") from exc
    if rows and bundle is not None:
        first = rows[0]
        resolvable = first[0] in bundle.e1.id_set() and first[1] in bundle.e2.id_set()
        if not resolvable:
            rows = rows[1:]
    pairs = set(rows)
    dropped = len(rows) - len(pairs)
    if dropped:
        log.warning("%s: collapsed %d duplicate ground-truth pair(s)", path, dropped)
    return GroundTruth(pairs=frozenset(pairs), duplicates_dropped=dropped)


def validate_bundle(b: DatasetBundle) -> ValidationReport:
    """Report counts, unresolved ground-truth ids, and Clean-Clean violations.

    Findings are carried in the report; nothing is raised.
    """
    gt_count = len(b.gt) if b.gt is not None else 0
    report = ValidationReport(e1_count=len(b.e1), e2_count=len(b.e2), gt_count=gt_count)
    if b.gt is None:
        return report
    e1_ids = b.e1.id_set()
    e2_ids = b.e2.id_set()
    left_seen: dict[str, int] = {}
    right_seen: dict[str, int] = {}
    for id1, id2 in sorted(b.gt.pairs):
        if id1 not in e1_ids:
            report.violations.append(("UnresolvedId", f"E1 id {id1!r} not found"))
        if id2 not in e2_ids:
            report.violations.append(("UnresolvedId", f"E2 id {id2!r} not found"))
        left_seen[id1] = left_seen.get(id1, 0) + 1
        right_seen[id2] = right_seen.get(id2, 0) + 1
    # Clean-Clean ER: each id should appear in at most one pair per side.
    for eid, count in sorted(left_seen.items()):
        if count > 1:
            report.warnings.append(f"E1 id {eid!r} appears in {count} ground-truth pairs")
    for eid, count in sorted(right_seen.items()):
        if count > 1:
            report.warnings.append(f"E2 id {eid!r} appears in {count} ground-truth pairs")
    return report
