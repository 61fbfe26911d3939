"""Focal file, focal method and focal class resolution for discovered tests."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .discovery import ProjectIndex, TestFileRecord, TestMethodRecord
from .fuzzy import METHOD_CUTOFF, best_match
from .indexer import ClassRecord, FileIndex, MethodRecord, Position

FILE_CUTOFF = 0


@dataclass(frozen=True)
class FocalMethodRef:
    name: str
    position: Position


@dataclass(frozen=True)
class FocalEntry:
    test_position: Position
    focal_method: FocalMethodRef
    focal_class: str | None = None


@dataclass
class FocalMapping:
    test_file: str
    focal_file: str
    entries: dict[str, FocalEntry] = field(default_factory=dict)


def _stem(path: str) -> str:
    return os.path.basename(path)[:-3]


def _strip_test_marker(stem: str) -> str:
    if stem.startswith("test_"):
        return stem[len("test_"):]
    if stem.endswith("_test"):
        return stem[: -len("_test")]
    return stem


def resolve_focal_file(tf: TestFileRecord, project: ProjectIndex) -> str | None:
    fi = project.files.get(tf.path)
    if fi is None or not fi.parse_ok:
        return None
    imported = project.imported_files(fi)
    if len(imported) == 1:
        return imported[0]

    candidates = [
        p for p in sorted(project.files)
        if p != tf.path
        and not project.is_test_file(p)
        and os.path.basename(p) != "__init__.py"
    ]
    test_stem = _stem(tf.path)
    stripped = _strip_test_marker(test_stem)
    matches = [p for p in candidates if stripped.endswith(_stem(p))]
    if not matches and stripped != test_stem:
        matches = [p for p in candidates if test_stem.endswith(_stem(p))]
    if not matches:
        return None
    if len(matches) == 1:
        return matches[0]
    hit = best_match(test_stem, [(_stem(p), p) for p in matches], FILE_CUTOFF)
    return hit[1] if hit is not None else None


def _definitions(focal_fi: FileIndex) -> dict[str, list[MethodRecord]]:
    defs: dict[str, list[MethodRecord]] = {}
    for m in focal_fi.all_methods():
        defs.setdefault(m.name, []).append(m)
    return defs


def _pick_definition(focal_fi: FileIndex, defs: list[MethodRecord], qualified: str | None) -> MethodRecord:
    """Prefer the definition in the class the call resolved to, else the earliest."""
    if qualified and len(defs) > 1:
        prefix = focal_fi.module_name + "."
        if qualified.startswith(prefix):
            owner = qualified[len(prefix):].rsplit(".", 1)[0]
            for c in focal_fi.classes:
                if c.qualname == owner:
                    m = c.method(defs[0].name)
                    if m is not None:
                        return m
    return defs[0]


def resolve_focal_method(t: TestMethodRecord, focal_fi: FileIndex) -> FocalMethodRef | None:
    defs = _definitions(focal_fi)
    candidates: dict[str, str | None] = {}
    for c in t.project_calls:
        if c.terminal in defs and c.terminal not in candidates:
            candidates[c.terminal] = c.qualified
    if not candidates:
        return None

    ends = [n for n in candidates if t.name.endswith(n)]
    if ends:
        # longest name first, then earliest definition
        chosen = min(ends, key=lambda n: (-len(n), defs[n][0].position.line))
    else:
        hit = best_match(t.name, [(n, n) for n in candidates], METHOD_CUTOFF)
        if hit is None:
            return None
        chosen = hit[0]
    m = _pick_definition(focal_fi, defs[chosen], candidates[chosen])
    return FocalMethodRef(m.name, m.position)


def _strip_class_marker(name: str) -> str:
    if name.startswith("Test"):
        name = name[len("Test"):]
    elif name.endswith("Tests"):
        name = name[: -len("Tests")]
    elif name.endswith("Test"):
        name = name[: -len("Test")]
    return name.strip("_")


def _class_owning(focal_fi: FileIndex, fm: FocalMethodRef) -> ClassRecord | None:
    for c in focal_fi.classes:
        for m in c.methods:
            if m.name == fm.name and m.position == fm.position:
                return c
    return None


def match_focal_class(t: TestMethodRecord, focal_fi: FileIndex, fm: FocalMethodRef) -> ClassRecord | None:
    """Class-stage resolution returning the class record itself."""
    if t.enclosing_class:
        wanted = _strip_class_marker(t.enclosing_class)
        by_name = None
        for c in focal_fi.classes:
            if c.name == wanted:
                by_name = c
                break
        if by_name is None and wanted:
            hit = best_match(wanted, [(c.name, c) for c in focal_fi.classes], METHOD_CUTOFF)
            by_name = hit[1] if hit is not None else None
        if by_name is not None and by_name.method(fm.name) is not None:
            return by_name
    owner = _class_owning(focal_fi, fm)
    if owner is not None:
        return owner
    # innermost class whose span encloses the method
    enclosing = [c for c in focal_fi.classes if c.position.encloses(fm.position) and c.position.line < fm.position.line]
    if enclosing:
        return max(enclosing, key=lambda c: c.position.line)
    return None


def resolve_focal_class(t: TestMethodRecord, focal_fi: FileIndex, fm: FocalMethodRef) -> str | None:
    c = match_focal_class(t, focal_fi, fm)
    return f"{focal_fi.module_name}.{c.qualname}" if c is not None else None


def _entry_key(t: TestMethodRecord, duplicated: set[str]) -> str:
    if t.name in duplicated and t.enclosing_class:
        return f"{t.enclosing_class}.{t.name}"
    return t.name


def build_focal_mapping(tf: TestFileRecord, project: ProjectIndex) -> FocalMapping | None:
    focal_path = resolve_focal_file(tf, project)
    if focal_path is None:
        return None
    focal_fi = project.files[focal_path]
    if not focal_fi.parse_ok:
        return None

    names = [t.name for t in tf.tests]
    duplicated = {n for n in names if names.count(n) > 1}
    mapping = FocalMapping(tf.path, focal_path)
    for t in tf.tests:
        fm = resolve_focal_method(t, focal_fi)
        if fm is None:
            continue
        cls = match_focal_class(t, focal_fi, fm)
        focal_class = None
        if cls is not None:
            # keep the reported position inside the reported class
            m = cls.method(fm.name)
            if m is not None:
                fm = FocalMethodRef(m.name, m.position)
            focal_class = f"{focal_fi.module_name}.{cls.qualname}"
        key = _entry_key(t, duplicated)
        if key not in mapping.entries:
            mapping.entries[key] = FocalEntry(t.position, fm, focal_class)
    return mapping if mapping.entries else None


def build_repository_mappings(tests: list[TestFileRecord], project: ProjectIndex) -> list[FocalMapping]:
    out = []
    for tf in tests:
        if not tf.tests:
            continue
        m = build_focal_mapping(tf, project)
        if m is not None:
            out.append(m)
    return out
