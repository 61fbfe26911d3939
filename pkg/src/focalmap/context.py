"""Focal context rendering: the focal method plus the surrounding class outline.

For a method inside a class the sections are, in order: class declaration,
focal method (verbatim body), constructor signature, the other method
signatures, class attributes, instance attributes. Non-focal members are
elided to ``def ...(...): ...``. Module-level focal functions get the body
followed by the elided signatures of the other module functions.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .indexer import ClassRecord, FileIndex, MethodRecord, decode_source, index_file, module_names
from .ingest import DEFAULT_REMOTE, RepoSpec, checkout_commit, discover_python_files, ensure_checkout
from .resolver import FocalEntry, FocalMapping
from .store import RepoOutputSet, dumps, read_focal, write_text_atomic

log = logging.getLogger(__name__)

MEMBER_INDENT = "    "
LABEL_GAP = 2
ELISION = " ..."

SECTION_ORDER = (
    "class_declaration",
    "focal_method",
    "constructor",
    "method_signatures",
    "class_attributes",
    "instance_attributes",
)
_LABELS = {
    "class_declaration": "focal class",
    "focal_method": "focal method",
    "constructor": "constructor",
    "method_signatures": "methods",
    "class_attributes": "class attributes",
    "instance_attributes": "instance attributes",
}
# a blank line separates consecutive groups
_GROUPS = {
    "class_declaration": 0,
    "focal_method": 0,
    "constructor": 1,
    "method_signatures": 1,
    "class_attributes": 2,
    "instance_attributes": 2,
}

_NEWLINE_RE = re.compile(r"\r\n|\r|\n")


class StaleCheckoutError(Exception):
    """The checkout does not match the commit a mapping was produced from."""


@dataclass
class FocalContext:
    sections: list[tuple[str, list[str]]] = field(default_factory=list)

    def section(self, label: str) -> list[str] | None:
        for name, lines in self.sections:
            if name == label:
                return lines
        return None

    def render(self) -> str:
        rows: list[tuple[str, str | None]] = []
        prev = None
        for label, lines in self.sections:
            group = _GROUPS[label]
            if prev is not None and group != prev:
                rows.append(("", None))
            prev = group
            tag = _LABELS[label]
            if not lines:
                rows.append((MEMBER_INDENT, f"# {tag} (none)"))
                continue
            rows.append((lines[0], f"# {tag}"))
            rows.extend((ln, None) for ln in lines[1:])

        col = max((len(t) for t, lab in rows if lab), default=0) + LABEL_GAP
        out = []
        for text, lab in rows:
            out.append(f"{text.ljust(col)}{lab}" if lab else text.rstrip())
        return "\n".join(out) + "\n"


def _dedent_line(line: str, indent: int) -> str:
    i = 0
    while i < indent and i < len(line) and line[i] in " \t\f":
        i += 1
    return line[i:]


def _statement_lines(text: str, prefix: str) -> list[str]:
    return [prefix + ln if ln.strip() else "" for ln in text.split("\n")]


def _attribute_lines(attrs: list[tuple[str, str]]) -> list[str]:
    out: list[str] = []
    prev = None
    for _, text in attrs:
        # `a, b = 1, 2` is recorded once per name
        if text != prev:
            out.extend(_statement_lines(text, MEMBER_INDENT))
        prev = text
    return out


def _elided(m: MethodRecord, prefix: str) -> str:
    return f"{prefix}{m.signature_text}:{ELISION}"


def _focal_body(lines: list[str], m: MethodRecord, prefix: str, commit: str | None) -> list[str]:
    pos = m.position
    where = f" (expected commit {commit})" if commit else ""
    if pos.line_end > len(lines):
        raise StaleCheckoutError(
            f"{m.name} spans lines {pos.line}-{pos.line_end} but the file has {len(lines)} lines{where}"
        )
    if not re.search(rf"\bdef\s+{re.escape(m.name)}\b", lines[pos.line - 1]):
        raise StaleCheckoutError(f"line {pos.line} does not define {m.name}{where}")
    out = []
    for ln in lines[pos.line - 1 : pos.line_end]:
        body = _dedent_line(ln, pos.indent).rstrip()
        out.append(prefix + body if body else "")
    return out


def _find_method(fi: FileIndex, entry: FocalEntry) -> tuple[MethodRecord, ClassRecord | None] | None:
    fm = entry.focal_method
    for c in fi.classes:
        for m in c.methods:
            if m.name == fm.name and m.position == fm.position:
                return m, c
    for m in fi.functions:
        if m.name == fm.name and m.position == fm.position:
            return m, None
    return None


def build_context(entry: FocalEntry, focal_fi: FileIndex, source: str, commit: str | None = None) -> FocalContext:
    """Assemble the context sections for one mapped focal method.

    Raises :class:`StaleCheckoutError` when the indexed checkout does not
    hold the focal method at the mapped position.
    """
    lines = _NEWLINE_RE.split(source)
    found = _find_method(focal_fi, entry)
    if found is None:
        pos = entry.focal_method.position
        # let the span/def checks produce the specific message when they can
        _focal_body(lines, MethodRecord(entry.focal_method.name, pos, ""), "", commit)
        where = f" (expected commit {commit})" if commit else ""
        raise StaleCheckoutError(
            f"no definition of {entry.focal_method.name} at line {pos.line} in {focal_fi.path}{where}"
        )
    method, owner = found
    cls = owner
    if entry.focal_class is not None:
        qual = entry.focal_class[len(focal_fi.module_name) + 1 :]
        cls = next((c for c in focal_fi.classes if c.qualname == qual), owner)

    ctx = FocalContext()
    if cls is None:
        ctx.sections.append(("focal_method", _focal_body(lines, method, "", commit)))
        others = [_elided(f, "") for f in focal_fi.functions if f is not method]
        if others:
            ctx.sections.append(("method_signatures", others))
        return ctx

    ctx.sections.append(("class_declaration", [f"{cls.declaration_text}:"]))
    ctx.sections.append(("focal_method", _focal_body(lines, method, MEMBER_INDENT, commit)))
    init = cls.method("__init__")
    if init is not None and init is not method:
        ctx.sections.append(("constructor", [_elided(init, MEMBER_INDENT)]))
    others = [_elided(m, MEMBER_INDENT) for m in cls.methods if m is not method and m is not init]
    if others:
        ctx.sections.append(("method_signatures", others))
    ctx.sections.append(("class_attributes", _attribute_lines(cls.class_attributes)))
    ctx.sections.append(("instance_attributes", _attribute_lines(cls.instance_attributes)))
    return ctx


def contexts_for_mappings(
    mappings: list[FocalMapping], root: str | os.PathLike, commit: str | None = None
) -> tuple[dict[str, dict[str, str]], list[str]]:
    """Render every mapped test against the checkout at *root*.

    Returns ``(contexts, notes)``; entries that cannot be rendered are
    skipped and described in *notes*.
    """
    root = Path(root)
    contexts: dict[str, dict[str, str]] = {}
    notes: list[str] = []
    indexed: dict[str, tuple[FileIndex, str] | None] = {}
    refs = module_names(discover_python_files(root)) if mappings else {}
    for m in mappings:
        if m.focal_file not in indexed:
            try:
                source = decode_source((root / m.focal_file).read_bytes())
            except OSError as e:
                indexed[m.focal_file] = None
                notes.append(f"{m.focal_file}: unreadable ({e.strerror})")
            else:
                ref = refs.get(m.focal_file)
                if ref is None:
                    indexed[m.focal_file] = None
                    notes.append(f"{m.focal_file}: not present in checkout")
                else:
                    indexed[m.focal_file] = (index_file(source, ref), source)
        got = indexed[m.focal_file]
        if got is None:
            continue
        fi, source = got
        for test_name, entry in sorted(m.entries.items()):
            try:
                text = build_context(entry, fi, source, commit).render()
            except StaleCheckoutError as e:
                notes.append(f"{m.test_file}::{test_name}: {e}")
                continue
            contexts.setdefault(m.test_file, {})[test_name] = text
    return contexts, notes


def generate_for_repo(
    focal_json_path: str | os.PathLike,
    repos_dir: str | os.PathLike,
    remote_template: str = DEFAULT_REMOTE,
) -> tuple[Path, list[str]]:
    """Check out the mapped commit and write ``<hash>.contexts.json`` beside the mapping."""
    out = RepoOutputSet.from_focal_path(focal_json_path)
    mappings = read_focal(focal_json_path)
    root = ensure_checkout(RepoSpec(out.owner, out.name), repos_dir, remote_template)
    checkout_commit(root, out.commit)
    contexts, notes = contexts_for_mappings(mappings, root, out.commit)
    for n in notes:
        log.warning("%s/%s: %s", out.owner, out.name, n)
    write_text_atomic(out.contexts_path, dumps(contexts))
    return out.contexts_path, notes
