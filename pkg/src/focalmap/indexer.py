"""Syntax-tree indexing of Python source files.

Every file becomes a :class:`FileIndex`: its imports, classes, module-level
functions and class methods, each with a (line, line_end, indent) position.
Only definitions at module or class scope are recorded; functions nested in
function bodies are folded into their parent.
"""

from __future__ import annotations

import ast
import io
import logging
import os
import re
import tokenize
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import SourceFileRef, discover_python_files, is_importable

log = logging.getLogger(__name__)

_NEWLINE_RE = re.compile(r"\r\n|\r|\n")
_WS_NEWLINE_RE = re.compile(r"\s*\\?\n\s*")
_DEF_NAME_RE = re.compile(r"(?:async\s+)?def\s+\w+|class\s+\w+")

_COMPOUND_FIELDS = ("body", "orelse", "finalbody")
_SELF_INIT = "__init__"


@dataclass(frozen=True)
class Position:
    line: int
    line_end: int
    indent: int

    def to_dict(self) -> dict:
        return {"line": self.line, "line_end": self.line_end, "indent": self.indent}

    @classmethod
    def from_dict(cls, d: dict) -> Position:
        return cls(d["line"], d["line_end"], d["indent"])

    def encloses(self, other: Position) -> bool:
        return self.line <= other.line and other.line_end <= self.line_end


@dataclass(frozen=True)
class ImportRecord:
    kind: str  # "plain" or "from"
    module: str
    relative_level: int
    names: tuple[tuple[str, str | None], ...]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "module": self.module,
            "relative_level": self.relative_level,
            "names": [[n, a] for n, a in self.names],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ImportRecord:
        return cls(d["kind"], d["module"], d["relative_level"], tuple((n, a) for n, a in d["names"]))


@dataclass(frozen=True)
class CalledName:
    dotted_path: str
    terminal: str
    # fully-qualified project target, filled in by call filtering
    qualified: str | None = None
    # for `Cls(...).method()`, the chain of the call that produced the receiver
    receiver: str | None = None

    @classmethod
    def of(cls, dotted: str, receiver: str | None = None) -> CalledName:
        return cls(dotted, dotted.rsplit(".", 1)[-1], receiver=receiver)

    def to_dict(self) -> dict:
        d = {"dotted_path": self.dotted_path, "terminal": self.terminal}
        if self.qualified is not None:
            d["qualified"] = self.qualified
        if self.receiver is not None:
            d["receiver"] = self.receiver
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CalledName:
        return cls(d["dotted_path"], d["terminal"], d.get("qualified"), d.get("receiver"))


@dataclass
class MethodRecord:
    name: str
    position: Position
    signature_text: str
    enclosing_class: str | None = None
    decorator_names: list[str] = field(default_factory=list)
    called_names: list[CalledName] = field(default_factory=list)
    # (target chain, value chain) for simple assignments in the body
    bindings: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            **self.position.to_dict(),
            "signature": self.signature_text,
            "decorators": self.decorator_names,
            "calls": [c.dotted_path for c in self.called_names],
            "bindings": [[t, v] for t, v in self.bindings],
        }
        receivers = {c.dotted_path: c.receiver for c in self.called_names if c.receiver is not None}
        if receivers:
            d["receivers"] = receivers
        if self.enclosing_class is not None:
            d["enclosing_class"] = self.enclosing_class
        return d

    @classmethod
    def from_dict(cls, d: dict) -> MethodRecord:
        return cls(
            name=d["name"],
            position=Position.from_dict(d),
            signature_text=d["signature"],
            enclosing_class=d.get("enclosing_class"),
            decorator_names=list(d["decorators"]),
            called_names=[CalledName.of(c, d.get("receivers", {}).get(c)) for c in d["calls"]],
            bindings=[(t, v) for t, v in d["bindings"]],
        )


@dataclass
class ClassRecord:
    name: str
    position: Position
    declaration_text: str
    qualname: str = ""
    base_exprs: list[str] = field(default_factory=list)
    methods: list[MethodRecord] = field(default_factory=list)
    class_attributes: list[tuple[str, str]] = field(default_factory=list)
    instance_attributes: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.qualname:
            self.qualname = self.name

    def method(self, name: str) -> MethodRecord | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "qualname": self.qualname,
            **self.position.to_dict(),
            "declaration": self.declaration_text,
            "bases": self.base_exprs,
            "methods": [m.to_dict() for m in self.methods],
            "class_attributes": [[n, t] for n, t in self.class_attributes],
            "instance_attributes": [[n, t] for n, t in self.instance_attributes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClassRecord:
        return cls(
            name=d["name"],
            position=Position.from_dict(d),
            declaration_text=d["declaration"],
            qualname=d["qualname"],
            base_exprs=list(d["bases"]),
            methods=[MethodRecord.from_dict(m) for m in d["methods"]],
            class_attributes=[(n, t) for n, t in d["class_attributes"]],
            instance_attributes=[(n, t) for n, t in d["instance_attributes"]],
        )


@dataclass
class FileIndex:
    file: SourceFileRef
    imports: list[ImportRecord] = field(default_factory=list)
    classes: list[ClassRecord] = field(default_factory=list)
    functions: list[MethodRecord] = field(default_factory=list)
    parse_ok: bool = True
    error_note: str | None = None

    @property
    def path(self) -> str:
        return self.file.relative_path

    @property
    def module_name(self) -> str:
        return self.file.module_name

    def all_methods(self) -> list[MethodRecord]:
        """Module functions and class methods, in source order."""
        out = list(self.functions)
        for c in self.classes:
            out.extend(c.methods)
        out.sort(key=lambda m: m.position.line)
        return out

    @property
    def method_count(self) -> int:
        return len(self.functions) + sum(len(c.methods) for c in self.classes)

    def top_level_names(self) -> set[str]:
        names = {f.name for f in self.functions}
        names.update(c.name for c in self.classes if c.qualname == c.name)
        return names

    def to_dict(self) -> dict:
        d = {
            "module_name": self.file.module_name,
            "importable": self.file.importable,
            "parse_ok": self.parse_ok,
            "imports": [i.to_dict() for i in self.imports],
            "classes": [c.to_dict() for c in self.classes],
            "functions": [f.to_dict() for f in self.functions],
        }
        if self.error_note is not None:
            d["error_note"] = self.error_note
        return d

    @classmethod
    def from_dict(cls, path: str, d: dict) -> FileIndex:
        return cls(
            file=SourceFileRef(path, d["module_name"], d["importable"]),
            imports=[ImportRecord.from_dict(i) for i in d["imports"]],
            classes=[ClassRecord.from_dict(c) for c in d["classes"]],
            functions=[MethodRecord.from_dict(f) for f in d["functions"]],
            parse_ok=d["parse_ok"],
            error_note=d.get("error_note"),
        )


def decode_source(data: bytes) -> str:
    """UTF-8 (BOM tolerated), then Latin-1."""
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def name_chain(node: ast.AST) -> str | None:
    """Dotted text of a Name/Attribute chain.

    For targets rooted in a call result or subscript only the trailing
    attribute names are kept; ``None`` when nothing nameable remains.
    """
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
    if not parts:
        return None
    parts.reverse()
    return ".".join(parts)


def receiver_chain(func: ast.AST) -> str | None:
    """For ``f(...).a.b``, the plain chain of ``f``; otherwise ``None``."""
    while isinstance(func, ast.Attribute):
        func = func.value
    return _pure_chain(func.func) if isinstance(func, ast.Call) else None


def _pure_chain(node: ast.AST) -> str | None:
    """Like :func:`name_chain` but only for chains rooted in a plain name."""
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if not isinstance(node, ast.Name):
        return None
    parts.append(node.id)
    parts.reverse()
    return ".".join(parts)


class _FileIndexer:
    def __init__(self, text: str, ref: SourceFileRef):
        self.lines = _NEWLINE_RE.split(text)
        self.ref = ref
        self.imports: list[tuple[int, int, ImportRecord]] = []
        self.classes: list[ClassRecord] = []
        self.functions: list[MethodRecord] = []

    # -- text helpers -----------------------------------------------------

    def _char_col(self, lineno: int, byte_col: int) -> int:
        line = self.lines[lineno - 1]
        if line.isascii():
            return byte_col
        return len(line.encode("utf-8")[:byte_col].decode("utf-8", errors="ignore"))

    def segment(self, node: ast.AST) -> str:
        l0, l1 = node.lineno, node.end_lineno
        c0 = self._char_col(l0, node.col_offset)
        c1 = self._char_col(l1, node.end_col_offset)
        if l0 == l1:
            return self.lines[l0 - 1][c0:c1]
        parts = [self.lines[l0 - 1][c0:]]
        parts.extend(self.lines[l0:l1 - 1])
        parts.append(self.lines[l1 - 1][:c1])
        return "\n".join(parts)

    def statement_text(self, node: ast.stmt) -> str:
        """Segment with continuation lines shifted left by the statement's own column."""
        text = self.segment(node)
        c0 = self._char_col(node.lineno, node.col_offset)
        if "\n" not in text or c0 == 0:
            return text
        first, *rest = text.split("\n")
        shifted = [ln[c0:] if ln[:c0].isspace() else ln.lstrip() for ln in rest]
        return "\n".join([first, *shifted])

    def _header(self, node: ast.AST, parts: list[ast.AST]) -> str:
        """Source of a def/class header, up to but excluding its colon."""
        l0 = node.lineno
        c0 = self._char_col(l0, node.col_offset)
        line0 = self.lines[l0 - 1]
        m = _DEF_NAME_RE.match(line0, c0)
        row, col = (l0, m.end()) if m else (l0, c0)
        for p in parts:
            end = (p.end_lineno, self._char_col(p.end_lineno, p.end_col_offset))
            if end > (row, col):
                row, col = end
        # only brackets, commas, arrows, whitespace and comments remain before ':'
        while row <= len(self.lines):
            line = self.lines[row - 1]
            while col < len(line):
                ch = line[col]
                if ch == ":":
                    return self._join_header(l0, c0, row, col)
                if ch == "#":
                    break
                col += 1
            row, col = row + 1, 0
        return line0[c0:].rstrip().rstrip(":")

    def _join_header(self, l0: int, c0: int, l1: int, c1: int) -> str:
        if l0 == l1:
            return self.lines[l0 - 1][c0:c1].rstrip()
        raw = "\n".join([self.lines[l0 - 1][c0:], *self.lines[l0:l1 - 1], self.lines[l1 - 1][:c1]])
        if "#" in raw:
            raw = _strip_comments(raw)
        text = _WS_NEWLINE_RE.sub(" ", raw)
        text = re.sub(r"([(\[])\s+", r"\1", text)
        text = re.sub(r",?\s*([)\]])", r"\1", text)
        return text.strip()

    # -- traversal --------------------------------------------------------

    def run(self, tree: ast.Module) -> None:
        self._scope(tree.body, None, "")

    def _scope(self, stmts: list[ast.stmt], cls: ClassRecord | None, prefix: str) -> None:
        for st in stmts:
            t = type(st)
            if t is ast.FunctionDef or t is ast.AsyncFunctionDef:
                m = self._method(st, cls)
                (cls.methods if cls is not None else self.functions).append(m)
            elif t is ast.ClassDef:
                self._class(st, prefix)
            elif t is ast.Import or t is ast.ImportFrom:
                self._import(st)
            elif cls is not None and (t is ast.Assign or t is ast.AnnAssign):
                self._class_attr(st, cls)
            else:
                for fname in _COMPOUND_FIELDS:
                    sub = getattr(st, fname, None)
                    if sub:
                        self._scope(sub, cls, prefix)
                for h in getattr(st, "handlers", ()):
                    self._scope(h.body, cls, prefix)
                for case in getattr(st, "cases", ()):
                    self._scope(case.body, cls, prefix)

    def _class(self, node: ast.ClassDef, prefix: str) -> None:
        parts = [*node.bases, *node.keywords, *getattr(node, "type_params", ())]
        qual = f"{prefix}{node.name}"
        rec = ClassRecord(
            name=node.name,
            qualname=qual,
            position=Position(node.lineno, node.end_lineno, node.col_offset),
            declaration_text=self._header(node, parts),
            base_exprs=[self.segment(b) for b in node.bases],
        )
        self.classes.append(rec)
        self._scope(node.body, rec, qual + ".")

    def _class_attr(self, st: ast.stmt, cls: ClassRecord) -> None:
        targets = st.targets if isinstance(st, ast.Assign) else [st.target]
        seen = {n for n, _ in cls.class_attributes}
        text = self.statement_text(st)
        for tgt in targets:
            elts = tgt.elts if isinstance(tgt, (ast.Tuple, ast.List)) else [tgt]
            for e in elts:
                if isinstance(e, ast.Name) and e.id not in seen:
                    seen.add(e.id)
                    cls.class_attributes.append((e.id, text))

    def _import(self, st: ast.Import | ast.ImportFrom) -> None:
        if isinstance(st, ast.Import):
            rec = ImportRecord("plain", "", 0, tuple((a.name, a.asname) for a in st.names))
        else:
            rec = ImportRecord(
                "from", st.module or "", st.level or 0, tuple((a.name, a.asname) for a in st.names)
            )
        self.imports.append((st.lineno, st.col_offset, rec))

    def _method(self, node: ast.FunctionDef | ast.AsyncFunctionDef, cls: ClassRecord | None) -> MethodRecord:
        a = node.args
        parts: list[ast.AST] = [*a.posonlyargs, *a.args, *a.kwonlyargs, *a.defaults]
        parts.extend(d for d in a.kw_defaults if d is not None)
        if a.vararg:
            parts.append(a.vararg)
        if a.kwarg:
            parts.append(a.kwarg)
        if node.returns is not None:
            parts.append(node.returns)
        parts.extend(getattr(node, "type_params", ()))
        rec = MethodRecord(
            name=node.name,
            position=Position(node.lineno, node.end_lineno, node.col_offset),
            signature_text=self._header(node, parts),
            enclosing_class=cls.name if cls is not None else None,
            decorator_names=[c for c in map(name_chain, (_decorator_target(d) for d in node.decorator_list)) if c],
        )
        self_name = None
        if cls is not None and node.name == _SELF_INIT and (a.posonlyargs or a.args):
            self_name = (a.posonlyargs or a.args)[0].arg
        self._body(node, rec, cls if self_name else None, self_name)
        return rec

    def _body(self, node: ast.AST, rec: MethodRecord, cls: ClassRecord | None, self_name: str | None) -> None:
        calls: list[tuple[int, int, int, int, str, str]] = []
        seen_attrs = set()
        for st in node.body:
            for n in ast.walk(st):
                t = type(n)
                if t is ast.Call:
                    chain = name_chain(n.func)
                    if chain:
                        calls.append((n.lineno, n.col_offset, -n.end_lineno, -n.end_col_offset, chain,
                                      receiver_chain(n.func) or ""))
                elif t is ast.Assign or t is ast.AnnAssign:
                    value = n.value
                    if value is None:
                        continue
                    vchain = _pure_chain(value.func if type(value) is ast.Call else value)
                    targets = n.targets if t is ast.Assign else [n.target]
                    for tgt in targets:
                        tchain = _pure_chain(tgt)
                        if tchain is None:
                            continue
                        if vchain:
                            rec.bindings.append((tchain, vchain))
                        if cls is not None and type(tgt) is ast.Attribute and type(tgt.value) is ast.Name \
                                and tgt.value.id == self_name and tgt.attr not in seen_attrs:
                            seen_attrs.add(tgt.attr)
                            cls.instance_attributes.append((tgt.attr, self.statement_text(n)))
                elif t is ast.withitem:
                    if n.optional_vars is not None:
                        tchain = _pure_chain(n.optional_vars)
                        ce = n.context_expr
                        vchain = _pure_chain(ce.func if type(ce) is ast.Call else ce)
                        if tchain and vchain:
                            rec.bindings.append((tchain, vchain))
                elif t is ast.Import or t is ast.ImportFrom:
                    self._import(n)
        calls.sort()
        seen = set()
        for *_, chain, receiver in calls:
            if chain not in seen:
                seen.add(chain)
                rec.called_names.append(CalledName.of(chain, receiver or None))

    def result(self) -> FileIndex:
        self.imports.sort(key=lambda x: (x[0], x[1]))
        return FileIndex(
            file=self.ref,
            imports=[r for _, _, r in self.imports],
            classes=self.classes,
            functions=self.functions,
        )


def _decorator_target(node: ast.AST) -> ast.AST:
    return node.func if isinstance(node, ast.Call) else node


def _strip_comments(text: str) -> str:
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(text + "\n").readline))
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return text
    lines = text.split("\n")
    for tok in reversed(toks):
        if tok.type == tokenize.COMMENT:
            (r, c0), (_, c1) = tok.start, tok.end
            lines[r - 1] = lines[r - 1][:c0] + lines[r - 1][c1:]
    return "\n".join(lines)


def index_file(source: str | bytes, file: SourceFileRef) -> FileIndex:
    """Index one file. Syntax errors yield ``parse_ok=False``, never raise."""
    text = decode_source(source) if isinstance(source, bytes) else source
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            tree = ast.parse(text, filename=file.relative_path)
    except (SyntaxError, ValueError, RecursionError, MemoryError) as e:
        return FileIndex(file=file, parse_ok=False, error_note=f"{type(e).__name__}: {e}")
    ix = _FileIndexer(text, file)
    try:
        ix.run(tree)
    except RecursionError as e:
        return FileIndex(file=file, parse_ok=False, error_note=f"{type(e).__name__}: {e}")
    return ix.result()


def module_names(files: list[str]) -> dict[str, SourceFileRef]:
    """SourceFileRefs for a discovered file list, without further filesystem access.

    A directory counts as a package when the list contains its ``__init__.py``.
    """
    pkg_dirs = {f[: -len("/__init__.py")] for f in files if f.endswith("/__init__.py")}
    refs = {}
    for f in files:
        parts = f.split("/")
        stem = parts[-1][:-3]
        chain: list[str] = []
        for i in range(len(parts) - 1, 0, -1):
            if "/".join(parts[:i]) in pkg_dirs:
                chain.append(parts[i - 1])
            else:
                break
        chain.reverse()
        mod = ".".join(chain) if stem == "__init__" and chain else ".".join(chain + [stem])
        refs[f] = SourceFileRef(f, mod, is_importable(mod))
    return refs


def _index_path(args: tuple[str, SourceFileRef]) -> FileIndex:
    root, ref = args
    try:
        data = Path(root, ref.relative_path).read_bytes()
    except OSError as e:
        log.warning("unreadable file %s: %s", ref.relative_path, e)
        return FileIndex(file=ref, parse_ok=False, error_note=f"unreadable: {e.strerror}")
    return index_file(data, ref)


def index_repository(root: str | os.PathLike, jobs: int = 1) -> dict[str, FileIndex]:
    """Index every Python file of a checkout, keyed by relative path (sorted)."""
    root = os.fspath(root)
    refs = module_names(discover_python_files(root))
    work = [(root, refs[f]) for f in sorted(refs)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_index_path, work, chunksize=max(1, len(work) // (jobs * 8))))
    else:
        results = [_index_path(w) for w in work]
    return {fi.path: fi for fi in results}


def count_definitions(index: dict[str, FileIndex]) -> tuple[int, int, int]:
    """(files, classes, methods) for a repository index."""
    classes = sum(len(fi.classes) for fi in index.values())
    methods = sum(fi.method_count for fi in index.values())
    return len(index), classes, methods
