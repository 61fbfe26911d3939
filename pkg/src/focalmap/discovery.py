"""Test file classification, test method discovery and project-call filtering."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

from .indexer import CalledName, ClassRecord, FileIndex, ImportRecord, MethodRecord, Position
from .ingest import SourceFileRef

TEST_PREFIX = "test"
# setup hooks whose ``self.x = ...`` bindings are visible to every test in the class
_SETUP_HOOKS = ("setUp", "setUpClass", "asyncSetUp", "setup_method", "setup_class", "setup")
_MAX_ALIAS_DEPTH = 4


class Framework(str, enum.Enum):
    PYTEST = "pytest"
    UNITTEST = "unittest"
    BOTH = "both"


@dataclass
class TestMethodRecord:
    name: str
    position: Position
    framework: Framework
    enclosing_class: str | None = None
    project_calls: list[CalledName] = field(default_factory=list)
    local_imports: list[ImportRecord] = field(default_factory=list)

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            **self.position.to_dict(),
            "framework": self.framework.value,
            "project_calls": [c.to_dict() for c in self.project_calls],
            "local_imports": [i.to_dict() for i in self.local_imports],
        }
        if self.enclosing_class is not None:
            d["enclosing_class"] = self.enclosing_class
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TestMethodRecord:
        return cls(
            name=d["name"],
            position=Position.from_dict(d),
            framework=Framework(d["framework"]),
            enclosing_class=d.get("enclosing_class"),
            project_calls=[CalledName.from_dict(c) for c in d["project_calls"]],
            local_imports=[ImportRecord.from_dict(i) for i in d["local_imports"]],
        )


@dataclass
class TestFileRecord:
    file: SourceFileRef
    framework: Framework
    tests: list[TestMethodRecord] = field(default_factory=list)

    __test__ = False

    @property
    def path(self) -> str:
        return self.file.relative_path

    def to_dict(self) -> dict:
        return {
            "file": self.file.relative_path,
            "module_name": self.file.module_name,
            "importable": self.file.importable,
            "framework": self.framework.value,
            "tests": [t.to_dict() for t in self.tests],
        }

    @classmethod
    def from_dict(cls, d: dict) -> TestFileRecord:
        return cls(
            file=SourceFileRef(d["file"], d["module_name"], d["importable"]),
            framework=Framework(d["framework"]),
            tests=[TestMethodRecord.from_dict(t) for t in d["tests"]],
        )


# -- framework detection -----------------------------------------------------


def _referenced_modules(imp: ImportRecord) -> list[str]:
    if imp.kind == "plain":
        return [n for n, _ in imp.names]
    if imp.relative_level:
        return []
    if imp.module == "unittest":
        # ``from unittest import mock`` is the mocking library, not the runner
        return [f"unittest.{n}" if n != "*" else "unittest" for n, _ in imp.names]
    return [imp.module]


def _is_pytest(mod: str) -> bool:
    return mod == "pytest" or mod.startswith("pytest.")


def _is_unittest(mod: str) -> bool:
    if mod != "unittest" and not mod.startswith("unittest."):
        return False
    return not (mod == "unittest.mock" or mod.startswith("unittest.mock."))


def has_test_filename(path: str) -> bool:
    stem = os.path.basename(path)[:-3]
    return stem.startswith("test_") or stem.endswith("_test")


def classify_test_file(fi: FileIndex) -> Framework | None:
    if not fi.parse_ok:
        return None
    mods = [m for imp in fi.imports for m in _referenced_modules(imp)]
    uses_pytest = any(_is_pytest(m) for m in mods)
    uses_unittest = any(_is_unittest(m) for m in mods)
    if uses_pytest and uses_unittest:
        return Framework.BOTH
    if uses_unittest:
        return Framework.UNITTEST
    if uses_pytest and has_test_filename(fi.path):
        return Framework.PYTEST
    return None


def _testcase_names(fi: FileIndex) -> set[str]:
    """Base-expression spellings that denote ``unittest.TestCase`` in *fi*."""
    names = set()
    for imp in fi.imports:
        if imp.kind == "plain":
            for n, alias in imp.names:
                if n == "unittest":
                    names.add(f"{alias or 'unittest'}.TestCase")
                    names.add(f"{alias or 'unittest'}.case.TestCase")
                elif n == "unittest.case":
                    names.add(f"{alias}.TestCase" if alias else "unittest.case.TestCase")
        elif imp.relative_level == 0 and imp.module in ("unittest", "unittest.case"):
            for n, alias in imp.names:
                if n in ("TestCase", "*"):
                    names.add(alias or "TestCase")
                elif n == "case" and imp.module == "unittest":
                    names.add(f"{alias or 'case'}.TestCase")
    return names


def is_test_name(name: str) -> bool:
    return name.startswith(TEST_PREFIX)


# -- project symbol table ----------------------------------------------------


class ProjectIndex:
    """Read-only view over a repository index for import and call resolution."""

    def __init__(self, repo_index: dict[str, FileIndex]):
        self.files = repo_index
        self.modules: dict[str, FileIndex] = {}
        for path in sorted(repo_index):
            fi = repo_index[path]
            if fi.parse_ok and fi.file.importable:
                self.modules.setdefault(fi.module_name, fi)
        self.frameworks: dict[str, Framework] = {}
        for path in sorted(repo_index):
            fw = classify_test_file(repo_index[path])
            if fw is not None:
                self.frameworks[path] = fw
        self._bindings: dict[str, dict[str, str]] = {}

    def is_test_file(self, path: str) -> bool:
        return path in self.frameworks

    def absolute_module(self, fi: FileIndex, imp: ImportRecord) -> str | None:
        if imp.relative_level == 0:
            return imp.module
        parts = fi.module_name.split(".")
        pkg = parts if os.path.basename(fi.path) == "__init__.py" else parts[:-1]
        up = imp.relative_level - 1
        if up > len(pkg):
            return None
        base = pkg[: len(pkg) - up]
        if imp.module:
            base = [*base, imp.module]
        return ".".join(base) or None

    def module_prefix(self, qualified: str) -> tuple[FileIndex, str] | None:
        """Longest leading segment run of *qualified* naming a project module."""
        segs = qualified.split(".")
        for i in range(len(segs), 0, -1):
            fi = self.modules.get(".".join(segs[:i]))
            if fi is not None:
                return fi, ".".join(segs[i:])
        return None

    def import_bindings(self, fi: FileIndex) -> dict[str, str]:
        """Local name -> fully qualified dotted target, from *fi*'s imports."""
        cached = self._bindings.get(fi.path)
        if cached is not None:
            return cached
        b: dict[str, str] = {}
        for imp in fi.imports:
            if imp.kind == "plain":
                for n, alias in imp.names:
                    if alias:
                        b[alias] = n
                    else:
                        root = n.split(".", 1)[0]
                        b[root] = root
                continue
            base = self.absolute_module(fi, imp)
            if base is None:
                continue
            for n, alias in imp.names:
                if n == "*":
                    target = self.modules.get(base)
                    if target is not None:
                        for tn in sorted(target.top_level_names()):
                            b[tn] = f"{base}.{tn}"
                else:
                    b[alias or n] = f"{base}.{n}"
        self._bindings[fi.path] = b
        return b

    def imported_modules(self, fi: FileIndex, imp: ImportRecord) -> list[FileIndex]:
        """Project modules an import statement pulls in (deepest module per name)."""
        out = []
        if imp.kind == "plain":
            for n, _ in imp.names:
                hit = self.module_prefix(n)
                if hit is not None:
                    out.append(hit[0])
            return out
        base = self.absolute_module(fi, imp)
        if base is None:
            return out
        for n, _ in imp.names:
            target = self.modules.get(f"{base}.{n}") if n != "*" else None
            if target is None:
                target = self.modules.get(base)
            if target is not None:
                out.append(target)
        return out

    def local_imports(self, fi: FileIndex) -> list[ImportRecord]:
        keep = []
        for imp in fi.imports:
            if any(not self.is_test_file(m.path) for m in self.imported_modules(fi, imp)):
                keep.append(imp)
        return keep

    def imported_files(self, fi: FileIndex) -> list[str]:
        """Distinct non-test project files imported by *fi*, in import order."""
        seen: dict[str, None] = {}
        for imp in fi.imports:
            for m in self.imported_modules(fi, imp):
                if m.path != fi.path and not self.is_test_file(m.path):
                    seen.setdefault(m.path, None)
        return list(seen)

    def resolve_class(self, fi: FileIndex, base_expr: str) -> tuple[FileIndex, ClassRecord] | None:
        for c in fi.classes:
            if c.qualname == base_expr:
                return fi, c
        root, _, rest = base_expr.partition(".")
        target = self.import_bindings(fi).get(root)
        if target is None:
            return None
        hit = self.module_prefix(f"{target}.{rest}" if rest else target)
        if hit is None:
            return None
        mod, attr = hit
        for c in mod.classes:
            if c.qualname == attr:
                return mod, c
        return None

    def resolve_call(self, fi: FileIndex, dotted: str, local: dict[str, str], depth: int = 0) -> str | None:
        """Qualified project target of a call chain, or ``None`` when not project code."""
        if depth > _MAX_ALIAS_DEPTH:
            return None
        segs = dotted.split(".")
        for i in range(len(segs), 0, -1):
            key = ".".join(segs[:i])
            value = local.get(key)
            if value is not None and value != key:
                rest = segs[i:]
                return self.resolve_call(fi, ".".join([value, *rest]), local, depth + 1)
        target = self.import_bindings(fi).get(segs[0])
        if target is None:
            return None
        qualified = ".".join([target, *segs[1:]])
        hit = self.module_prefix(qualified)
        if hit is None or self.is_test_file(hit[0].path):
            return None
        return qualified


def _is_testcase_class(c: ClassRecord, fi: FileIndex, project: ProjectIndex | None, direct_only: bool = False) -> bool:
    names = _testcase_names(fi)
    if any(b in names for b in c.base_exprs):
        return True
    if direct_only or project is None:
        return False
    # one level of indirection: class T(Base) where Base derives from TestCase
    for b in c.base_exprs:
        hit = project.resolve_class(fi, b)
        if hit is not None and hit[1] is not c and _is_testcase_class(hit[1], hit[0], project, direct_only=True):
            return True
    return False


def filter_project_calls(
    t: MethodRecord,
    fi: FileIndex,
    project: ProjectIndex,
    extra_bindings: list[tuple[str, str]] = (),
) -> list[CalledName]:
    """Keep only calls whose root resolves, via *fi*'s imports, into non-test project code.

    A call on a fresh instance (``Cls(...).method()``) is qualified through
    the constructor chain when the chain itself is unresolvable.
    """
    local = dict(extra_bindings)
    local.update(t.bindings)
    kept = []
    for c in t.called_names:
        q = project.resolve_call(fi, c.dotted_path, local)
        if q is None and c.receiver is not None:
            owner = project.resolve_call(fi, c.receiver, local)
            if owner is not None:
                q = f"{owner}.{c.dotted_path}"
        if q is not None:
            kept.append(CalledName(c.dotted_path, c.terminal, q, c.receiver))
    return kept


def _class_bindings(c: ClassRecord) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    for hook in _SETUP_HOOKS:
        m = c.method(hook)
        if m is not None:
            out.extend(b for b in m.bindings if "." in b[0])
    return out


def discover_tests(fi: FileIndex, fw: Framework, project: ProjectIndex | None = None) -> list[TestMethodRecord]:
    """Test methods of a classified file, in source order.

    With a *project* the tests also carry their project-local calls and
    imports; without one those lists stay empty.
    """
    found: list[tuple[MethodRecord, Framework, ClassRecord | None]] = []
    pytest_rule = fw in (Framework.PYTEST, Framework.BOTH)
    unittest_rule = fw in (Framework.UNITTEST, Framework.BOTH)
    if pytest_rule:
        found.extend((m, Framework.PYTEST, None) for m in fi.functions if is_test_name(m.name))
    for c in fi.classes:
        tc = unittest_rule and _is_testcase_class(c, fi, project)
        if not tc and not pytest_rule:
            continue
        tag = Framework.UNITTEST if tc else Framework.PYTEST
        found.extend((m, tag, c) for m in c.methods if is_test_name(m.name))
    found.sort(key=lambda x: x[0].position.line)

    local_imports = project.local_imports(fi) if project is not None else []
    tests = []
    for m, tag, c in found:
        calls = []
        if project is not None:
            extra = _class_bindings(c) if c is not None else []
            calls = filter_project_calls(m, fi, project, extra)
        tests.append(
            TestMethodRecord(
                name=m.name,
                position=m.position,
                framework=tag,
                enclosing_class=c.name if c is not None else None,
                project_calls=calls,
                local_imports=list(local_imports),
            )
        )
    return tests


def discover_repository(project: ProjectIndex) -> list[TestFileRecord]:
    """A TestFileRecord for every classified file (possibly with zero tests), path-sorted."""
    out = []
    for path in sorted(project.frameworks):
        fi = project.files[path]
        fw = project.frameworks[path]
        out.append(TestFileRecord(fi.file, fw, discover_tests(fi, fw, project)))
    return out
