import textwrap

from focalmap.discovery import Framework, ProjectIndex, TestFileRecord, TestMethodRecord, discover_repository
from focalmap.fuzzy import similarity
from focalmap.indexer import CalledName, Position, index_repository
from focalmap.resolver import (
    FocalMethodRef,
    build_focal_mapping,
    build_repository_mappings,
    resolve_focal_class,
    resolve_focal_file,
    resolve_focal_method,
)

from conftest import FIXTURES, index_tree


def record(project: ProjectIndex, path: str) -> TestFileRecord:
    return next(r for r in discover_repository(project) if r.path == path)


def test_method(name, calls, enclosing=None):
    return TestMethodRecord(
        name, Position(1, 2, 0), Framework.PYTEST, enclosing,
        project_calls=[CalledName(c, c.rsplit(".", 1)[-1]) for c in calls],
    )


test_method.__test__ = False


class TestFocalFile:
    def test_single_import(self):
        project = ProjectIndex(index_repository(FIXTURES / "gordon"))
        tf = record(project, "tests/unit/metrics/test_ffwd.py")
        assert resolve_focal_file(tf, project) == "gordon/metrics/ffwd.py"

    def test_filename_suffix(self):
        project = ProjectIndex(index_tree({
            "foo.py": "def bar():\n    pass\n",
            "other.py": "",
            "test_foo.py": "import pytest\ndef test_bar():\n    pass\n",
        }))
        assert resolve_focal_file(record(project, "test_foo.py"), project) == "foo.py"

    def test_suffix_tie_goes_to_first_sorted_path(self):
        project = ProjectIndex(index_tree({
            "a/util.py": "",
            "b/util.py": "",
            "tests/test_util.py": "import pytest\ndef test_x():\n    pass\n",
        }))
        assert resolve_focal_file(record(project, "tests/test_util.py"), project) == "a/util.py"

    def test_several_suffix_matches_take_best_score(self):
        project = ProjectIndex(index_tree({
            "a/config.py": "",
            "b/loader_config.py": "",
            "tests/test_loader_config.py": "import pytest\ndef test_x():\n    pass\n",
        }))
        # both stems are suffixes; the full stem scores higher
        assert similarity("test_loader_config", "loader_config") > similarity("test_loader_config", "config")
        assert resolve_focal_file(record(project, "tests/test_loader_config.py"), project) == "b/loader_config.py"

    def test_multiple_imports_fall_back_to_filename(self):
        project = ProjectIndex(index_tree({
            "app/__init__.py": "",
            "app/db.py": "",
            "app/web.py": "",
            "tests/test_web.py": "import pytest\nfrom app import db, web\ndef test_x():\n    pass\n",
        }))
        assert resolve_focal_file(record(project, "tests/test_web.py"), project) == "app/web.py"

    def test_raw_suffix_fallback(self):
        project = ProjectIndex(index_tree({
            "web_test.py": "",
            "tests/test_app_web_test.py": "import pytest\ndef test_x():\n    pass\n",
        }))
        # stripped stem "app_web_test" ends with "web_test"
        assert resolve_focal_file(record(project, "tests/test_app_web_test.py"), project) == "web_test.py"

    def test_nothing_found(self):
        project = ProjectIndex(index_tree({
            "lib.py": "",
            "tests/test_zzz.py": "import pytest\nimport os\ndef test_x():\n    pass\n",
        }))
        assert resolve_focal_file(record(project, "tests/test_zzz.py"), project) is None


class TestFocalMethod:
    def setup_method(self):
        src = (FIXTURES / "relay/relaylib/log.py").read_text()
        self.fi = index_tree({"relaylib/__init__.py": "", "relaylib/log.py": src})["relaylib/log.py"]

    def test_ends_with(self):
        fm = resolve_focal_method(test_method("test_create_metric", ["r._create_metric", "r.incr"]), self.fi)
        assert "test_create_metric".endswith("_create_metric")
        assert fm == FocalMethodRef("_create_metric", Position(20, 22, 4))

    def test_longest_ends_with_wins(self):
        fm = resolve_focal_method(test_method("test_set", ["r.set", "r.timer"]), self.fi)
        assert fm.name == "set"

    def test_empty_candidates(self):
        assert resolve_focal_method(test_method("test_x", []), self.fi) is None

    def test_calls_not_defined_in_focal_file_ignored(self):
        assert resolve_focal_method(test_method("test_x", ["os.path.join", "other"]), self.fi) is None

    def test_fuzzy_stage(self):
        fm = resolve_focal_method(test_method("test_cleanup_resets", ["r.incr", "r.cleanup"]), self.fi)
        assert similarity("test_cleanup_resets", "cleanup") >= 50
        assert fm.name == "cleanup"


class TestFocalClass:
    def setup_method(self):
        self.index = index_tree({
            "pkg/__init__.py": "",
            "pkg/mod.py": textwrap.dedent("""
                class Helper:
                    def run(self):
                        pass

                class LogRelay:
                    def run(self):
                        pass

                    def _create_metric(self):
                        pass

                def free():
                    pass
            """),
        })
        self.fi = self.index["pkg/mod.py"]

    def fm(self, name, cls=None):
        for m in self.fi.all_methods():
            if m.name == name and (cls is None or m.enclosing_class == cls):
                return FocalMethodRef(m.name, m.position)

    def test_name_stage(self):
        t = test_method("test_run", [], enclosing="TestLogRelay")
        # the position points at Helper.run, the name stage still picks LogRelay
        assert resolve_focal_class(t, self.fi, self.fm("run", "Helper")) == "pkg.mod.LogRelay"

    def test_name_stage_requires_membership(self):
        t = test_method("test_create", [], enclosing="TestHelper")
        assert resolve_focal_class(t, self.fi, self.fm("_create_metric")) == "pkg.mod.LogRelay"

    def test_position_stage(self):
        t = test_method("test_run", [])
        assert resolve_focal_class(t, self.fi, self.fm("run", "Helper")) == "pkg.mod.Helper"

    def test_module_function_has_no_class(self):
        assert resolve_focal_class(test_method("test_free", []), self.fi, self.fm("free")) is None


class TestBuildMapping:
    def test_gordon_mapping(self):
        project = ProjectIndex(index_repository(FIXTURES / "gordon"))
        m = build_focal_mapping(record(project, "tests/unit/metrics/test_ffwd.py"), project)
        assert m.focal_file == "gordon/metrics/ffwd.py"
        e = m.entries["test_ffwd_protocol_connection_made"]
        assert e.test_position == Position(23, 32, 0)
        assert e.focal_class == "gordon.metrics.ffwd.UDPClientProtocol"
        assert e.focal_method == FocalMethodRef("connection_made", Position(59, 67, 4))

    def test_partial_resolution(self):
        project = ProjectIndex(index_repository(FIXTURES / "calc"))
        m = build_focal_mapping(record(project, "tests/test_ops.py"), project)
        # test_subtract vs sub scores 38, test_types calls nothing local
        assert list(m.entries) == ["test_add"]

    def test_exhausted_cascade(self):
        project = ProjectIndex(index_tree({
            "lib.py": "def f():\n    pass\n",
            "tests/test_zzz.py": "import pytest\ndef test_f():\n    pass\n",
        }))
        assert build_focal_mapping(record(project, "tests/test_zzz.py"), project) is None

    def test_unparsable_focal_file(self):
        project = ProjectIndex(index_tree({
            "foo.py": "def f(:\n",
            "test_foo.py": "import pytest\nimport foo\ndef test_f():\n    foo.f()\n",
        }))
        assert build_focal_mapping(record(project, "test_foo.py"), project) is None

    def test_duplicate_test_names_are_qualified(self):
        project = ProjectIndex(index_tree({
            "shapes.py": "class A:\n    def area(self):\n        pass\nclass B:\n    def area(self):\n        pass\n",
            "test_shapes.py": textwrap.dedent("""
                import pytest
                from shapes import A, B
                class TestA:
                    def test_area(self):
                        A().area()
                        a = A()
                        a.area()
                class TestB:
                    def test_area(self):
                        b = B()
                        b.area()
            """),
        }))
        m = build_focal_mapping(record(project, "test_shapes.py"), project)
        assert sorted(m.entries) == ["TestA.test_area", "TestB.test_area"]
        assert m.entries["TestA.test_area"].focal_class == "shapes.A"
        assert m.entries["TestB.test_area"].focal_class == "shapes.B"
        assert m.entries["TestB.test_area"].focal_method.position.line == 5

    def test_invariants_on_fixture_corpus(self):
        for name in ("gordon", "relay", "calc"):
            project = ProjectIndex(index_repository(FIXTURES / name))
            tests = discover_repository(project)
            by_test = {(tf.path, t.name): t for tf in tests for t in tf.tests}
            for m in build_repository_mappings(tests, project):
                focal_fi = project.files[m.focal_file]
                defs = {(d.name, d.position) for d in focal_fi.all_methods()}
                for key, e in m.entries.items():
                    assert (e.focal_method.name, e.focal_method.position) in defs
                    if e.focal_class is not None:
                        assert e.focal_class.startswith(focal_fi.module_name + ".")
                    t = by_test[(m.test_file, key)]
                    assert t.name.endswith(e.focal_method.name) or similarity(t.name, e.focal_method.name) >= 50
