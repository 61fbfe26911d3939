"""Per-repository JSON artifacts under ``data/<owner>/<name>/``.

``<hash>.json``        file index (intermediary)
``<hash>.tests.json``  discovered tests (intermediary)
``<hash>.focal.json``  test -> focal method mapping
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from jsonschema import Draft202012Validator

from .discovery import TestFileRecord
from .indexer import FileIndex, Position
from .resolver import FocalEntry, FocalMapping, FocalMethodRef

SCHEMA_VERSION = 1

INDEX_SUFFIX = ".json"
TESTS_SUFFIX = ".tests.json"
FOCAL_SUFFIX = ".focal.json"
CONTEXTS_SUFFIX = ".contexts.json"

_HASH_NAME_RE = re.compile(r"^([0-9a-f]{40})\.json$")
_FOCAL_NAME_RE = re.compile(r"^([0-9a-f]{40})\.focal\.json$")

_POSITION = {
    "line": {"type": "integer", "minimum": 1},
    "line_end": {"type": "integer", "minimum": 1},
    "indent": {"type": "integer", "minimum": 0},
}

FOCAL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": {
        "type": "object",
        "required": ["focal_file", "methods"],
        "additionalProperties": False,
        "properties": {
            "focal_file": {"type": "string", "minLength": 1},
            "methods": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "required": ["line", "line_end", "indent", "focal_method"],
                    "additionalProperties": False,
                    "properties": {
                        **_POSITION,
                        "focal_class": {"type": "string", "minLength": 1},
                        "focal_method": {
                            "type": "object",
                            "required": ["line", "line_end", "indent", "name"],
                            "additionalProperties": False,
                            "properties": {**_POSITION, "name": {"type": "string", "minLength": 1}},
                        },
                    },
                },
            },
        },
    },
}

_focal_validator = Draft202012Validator(FOCAL_SCHEMA)


class SchemaError(ValueError):
    """A focal document violates the expected layout; ``key_path`` locates the fault."""

    def __init__(self, key_path: tuple[str, ...], message: str):
        self.key_path = key_path
        if key_path:
            where = f"{key_path[0]}: {'.'.join(key_path[1:])}" if len(key_path) > 1 else key_path[0]
        else:
            where = "<root>"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class RepoOutputSet:
    data_dir: Path
    owner: str
    name: str
    commit: str

    @property
    def directory(self) -> Path:
        return Path(self.data_dir) / self.owner / self.name

    @property
    def index_path(self) -> Path:
        return self.directory / f"{self.commit}{INDEX_SUFFIX}"

    @property
    def tests_path(self) -> Path:
        return self.directory / f"{self.commit}{TESTS_SUFFIX}"

    @property
    def focal_path(self) -> Path:
        return self.directory / f"{self.commit}{FOCAL_SUFFIX}"

    @property
    def contexts_path(self) -> Path:
        return self.directory / f"{self.commit}{CONTEXTS_SUFFIX}"

    @classmethod
    def from_focal_path(cls, path: str | os.PathLike) -> RepoOutputSet:
        """Parse ``<data>/<owner>/<name>/<hash>.focal.json``."""
        p = Path(path)
        m = _FOCAL_NAME_RE.match(p.name)
        if m is None or len(p.parts) < 3:
            raise ValueError(f"expected <data>/<owner>/<name>/<hash>.focal.json, got {path}")
        return cls(p.parent.parent.parent, p.parent.parent.name, p.parent.name, m.group(1))

    @classmethod
    def from_index_path(cls, path: str | os.PathLike) -> RepoOutputSet:
        p = Path(path)
        m = _HASH_NAME_RE.match(p.name)
        if m is None or len(p.parts) < 3:
            raise ValueError(f"expected <data>/<owner>/<name>/<hash>.json, got {path}")
        return cls(p.parent.parent.parent, p.parent.parent.name, p.parent.name, m.group(1))


def dumps(obj, compact: bool = False) -> str:
    if compact:
        return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def write_text_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str | os.PathLike):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# -- focal ------------------------------------------------------------------


def _position_dict(p: Position) -> dict:
    return {"line": p.line, "line_end": p.line_end, "indent": p.indent}


def focal_to_dict(mappings: list[FocalMapping]) -> dict:
    doc = {}
    for m in mappings:
        methods = {}
        for name, e in m.entries.items():
            entry = _position_dict(e.test_position)
            if e.focal_class is not None:
                entry["focal_class"] = e.focal_class
            entry["focal_method"] = {**_position_dict(e.focal_method.position), "name": e.focal_method.name}
            methods[name] = entry
        doc[m.test_file] = {"focal_file": m.focal_file, "methods": methods}
    return doc


def validate_focal(doc) -> None:
    errors = sorted(_focal_validator.iter_errors(doc), key=lambda e: [str(x) for x in e.absolute_path])
    if not errors:
        return
    err = errors[0]
    path = tuple(str(x) for x in err.absolute_path)
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path = path + (missing[0],)
            raise SchemaError(path, "required field missing")
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if extra:
            raise SchemaError(path + (extra[0],), "unexpected field")
    raise SchemaError(path, err.message)


def focal_from_dict(doc) -> list[FocalMapping]:
    validate_focal(doc)
    out = []
    for test_file in sorted(doc):
        body = doc[test_file]
        entries = {}
        for name in sorted(body["methods"]):
            e = body["methods"][name]
            fm = e["focal_method"]
            entries[name] = FocalEntry(
                Position.from_dict(e),
                FocalMethodRef(fm["name"], Position.from_dict(fm)),
                e.get("focal_class"),
            )
        out.append(FocalMapping(test_file, body["focal_file"], entries))
    return out


def write_focal(mappings: list[FocalMapping], out: RepoOutputSet) -> Path | None:
    """Write the focal document; nothing is written for an empty mapping list."""
    if not mappings:
        return None
    doc = focal_to_dict(mappings)
    validate_focal(doc)
    write_text_atomic(out.focal_path, dumps(doc))
    return out.focal_path


def read_focal(path: str | os.PathLike) -> list[FocalMapping]:
    return focal_from_dict(_read_json(path))


# -- intermediaries -----------------------------------------------------------


def _check_header(doc, kind: str, path) -> None:
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError((str(path),), f"not a version-{SCHEMA_VERSION} {kind} document")


def write_index(index: dict[str, FileIndex], out: RepoOutputSet) -> Path:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "repository": f"{out.owner}/{out.name}",
        "commit": out.commit,
        "files": {path: index[path].to_dict() for path in sorted(index)},
    }
    write_text_atomic(out.index_path, dumps(doc, compact=True))
    return out.index_path


def read_index(path: str | os.PathLike) -> dict[str, FileIndex]:
    doc = _read_json(path)
    _check_header(doc, "index", path)
    return {p: FileIndex.from_dict(p, d) for p, d in sorted(doc["files"].items())}


def write_tests(records: list[TestFileRecord], out: RepoOutputSet) -> Path:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "repository": f"{out.owner}/{out.name}",
        "commit": out.commit,
        "test_files": [r.to_dict() for r in sorted(records, key=lambda r: r.path)],
    }
    write_text_atomic(out.tests_path, dumps(doc, compact=True))
    return out.tests_path


def read_tests(path: str | os.PathLike) -> list[TestFileRecord]:
    doc = _read_json(path)
    _check_header(doc, "tests", path)
    return [TestFileRecord.from_dict(d) for d in doc["test_files"]]


def find_index_files(data_dir: str | os.PathLike) -> list[Path]:
    """Every ``<owner>/<name>/<hash>.json`` under *data_dir*, sorted."""
    base = Path(data_dir)
    if not base.is_dir():
        return []
    return sorted(p for p in base.glob("*/*/*.json") if _HASH_NAME_RE.match(p.name))
