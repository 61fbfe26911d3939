import textwrap
from hypothesis import given, settings, strategies as st

from focalmap.indexer import (
    CalledName,
    FileIndex,
    Position,
    count_definitions,
    index_file,
    index_repository,
)
from focalmap.ingest import SourceFileRef

from conftest import FIXTURES

REF = SourceFileRef("m.py", "m")


def ix(src: str) -> FileIndex:
    return index_file(textwrap.dedent(src), REF)


def test_gordon_focal_method_position():
    src = (FIXTURES / "gordon/gordon/metrics/ffwd.py").read_text()
    fi = index_file(src, SourceFileRef("gordon/metrics/ffwd.py", "gordon.metrics.ffwd"))
    cls = next(c for c in fi.classes if c.name == "UDPClientProtocol")
    m = cls.method("connection_made")
    assert m.position == Position(59, 67, 4)
    assert m.enclosing_class == "UDPClientProtocol"
    assert m.signature_text == "def connection_made(self, transport)"


def test_empty_file():
    fi = ix("")
    assert fi.parse_ok and fi.classes == [] and fi.functions == [] and fi.imports == []


def test_called_names_body_order():
    fi = ix("def f():\n    g(h.i())")
    assert fi.functions[0].called_names == [CalledName("g", "g"), CalledName("h.i", "i")]


def test_called_names_dedup_and_trailing_chains():
    fi = ix("""
        def f():
            a.b()
            x().y()
            a.b()
            d[0].e.g()
            (lambda: 1)()
    """)
    assert [c.dotted_path for c in fi.functions[0].called_names] == ["a.b", "y", "x", "e.g"]


def test_receiver_of_fresh_instance_recorded():
    fi = ix("def f():\n    mod.Cls(1).a.go()\n    g()[0].h()\n")
    calls = fi.functions[0].called_names
    assert [(c.dotted_path, c.receiver) for c in calls] == [("a.go", "mod.Cls"), ("mod.Cls", None), ("h", None), ("g", None)]
    assert FileIndex.from_dict("m.py", fi.to_dict()) == fi


def test_syntax_error_is_isolated():
    fi = ix("def f(:\n    pass\n")
    assert not fi.parse_ok
    assert fi.error_note and "SyntaxError" in fi.error_note
    assert fi.classes == [] and fi.functions == [] and fi.imports == []


def test_python2_print_fails():
    assert not ix('print "hi"\n').parse_ok


def test_latin1_fallback():
    fi = index_file("s = 'caf\xe9'\ndef f():\n    pass\n".encode("latin-1"), REF)
    assert fi.parse_ok and fi.functions[0].name == "f"


def test_nested_functions_not_emitted():
    fi = ix("""
        class A:
            def m(self):
                def inner():
                    helper()
                return inner()
        def top():
            def local():
                pass
    """)
    assert [m.name for m in fi.classes[0].methods] == ["m"]
    assert [f.name for f in fi.functions] == ["top"]
    assert "helper" in [c.dotted_path for c in fi.classes[0].methods[0].called_names]


def test_decorated_and_async():
    fi = ix("""
        import functools

        @functools.lru_cache(maxsize=None)
        @staticmethod
        async def fetch(url, *, timeout: float = 1.0) -> bytes:
            return await get(url)
    """)
    f = fi.functions[0]
    assert f.position == Position(6, 7, 0)
    assert f.decorator_names == ["functools.lru_cache", "staticmethod"]
    assert f.signature_text == "async def fetch(url, *, timeout: float = 1.0) -> bytes"


def test_multiline_signature_is_flattened():
    fi = ix("""
        def f(
            a,  # first
            b: "x:y" = {"k": 1},
            *args,
            **kw,
        ) -> dict[str, int]:
            return {}
    """)
    assert fi.functions[0].signature_text == 'def f(a, b: "x:y" = {"k": 1}, *args, **kw) -> dict[str, int]'


def test_signature_without_args_and_lambda_default():
    fi = ix("def f(): pass\ndef g(k=lambda x: x): pass\nclass C: pass\nclass D(C, metaclass=M): pass\n")
    assert [m.signature_text for m in fi.functions] == ["def f()", "def g(k=lambda x: x)"]
    assert [c.declaration_text for c in fi.classes] == ["class C", "class D(C, metaclass=M)"]


def test_positional_only_and_walrus():
    fi = ix("def f(a, /, b):\n    if (n := len(a)) > 1:\n        return n\n")
    assert fi.parse_ok and fi.functions[0].signature_text == "def f(a, /, b)"


def test_imports_in_source_order_including_conditional():
    fi = ix("""
        import os, sys as system
        try:
            from .pkg import mod as m
        except ImportError:
            mod = None
        def f():
            from pkg.sub import thing
    """)
    assert [(i.kind, i.module, i.relative_level, i.names) for i in fi.imports] == [
        ("plain", "", 0, (("os", None), ("sys", "system"))),
        ("from", "pkg", 1, (("mod", "m"),)),
        ("from", "pkg.sub", 0, (("thing", None),)),
    ]


def test_class_and_instance_attributes():
    fi = ix("""
        class A(Base):
            x = 1
            y: int = 2
            a, b = 3, 4

            def __init__(me, config):
                me.time_unit = config.get('time_unit', 1)
                if config:
                    me.logger = make(config)
                me.time_unit = 2
                other.attr = 3

            def method(self):
                self.late = 1
    """)
    c = fi.classes[0]
    assert c.base_exprs == ["Base"]
    assert [n for n, _ in c.class_attributes] == ["x", "y", "a", "b"]
    assert c.instance_attributes == [
        ("time_unit", "me.time_unit = config.get('time_unit', 1)"),
        ("logger", "me.logger = make(config)"),
    ]


def test_no_init_no_instance_attributes():
    fi = ix("class A:\n    def m(self):\n        self.x = 1\n")
    assert fi.classes[0].instance_attributes == []


def test_bindings_recorded():
    fi = ix("""
        def test_x(self):
            client = mod.Client(1)
            self.obj = Thing
            with open_it() as fh:
                pass
            z = 3
    """)
    assert fi.functions[0].bindings == [("client", "mod.Client"), ("self.obj", "Thing"), ("fh", "open_it")]


def test_nested_class_qualname():
    fi = ix("class Outer:\n    class Inner:\n        def m(self):\n            pass\n")
    assert [(c.name, c.qualname) for c in fi.classes] == [("Outer", "Outer"), ("Inner", "Outer.Inner")]
    assert fi.classes[1].methods[0].enclosing_class == "Inner"


def test_tab_indent_counts_one_column():
    fi = index_file("class A:\n\tdef m(self):\n\t\tpass\n", REF)
    assert fi.classes[0].methods[0].position.indent == 1


def test_fixture_repo_counts():
    # relay: 5 files; LoggerAdapter, LogRelay, TestLogRelay; 1 + 6 + 3 + 5 + 2 defs
    assert count_definitions(index_repository(FIXTURES / "relay")) == (5, 3, 17)
    assert count_definitions(index_repository(FIXTURES / "gordon")) == (4, 2, 11)


def test_repository_with_unparsable_file():
    index = index_repository(FIXTURES / "calc")
    assert len(index) == 6
    assert [p for p, fi in index.items() if not fi.parse_ok] == ["calc/legacy.py"]


def test_repository_without_python(tmp_path):
    (tmp_path / "README").write_text("nothing")
    assert index_repository(tmp_path) == {}


def test_index_jobs_equivalent():
    one = index_repository(FIXTURES / "relay", jobs=1)
    two = index_repository(FIXTURES / "relay", jobs=2)
    assert {p: fi.to_dict() for p, fi in one.items()} == {p: fi.to_dict() for p, fi in two.items()}


def test_serialization_round_trip():
    for path, fi in index_repository(FIXTURES / "relay").items():
        assert FileIndex.from_dict(path, fi.to_dict()) == fi


# -- properties over generated modules ---------------------------------------

_ident = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in {"if", "in", "is", "or", "as", "def", "del", "for", "and", "not", "try", "class", "pass"}
)


@st.composite
def modules(draw):
    lines = []
    expected = 0
    for _ in range(draw(st.integers(0, 4))):
        if draw(st.booleans()):
            lines.append(f"class {draw(_ident).capitalize()}X:")
            for _ in range(draw(st.integers(0, 3))):
                name = draw(_ident)
                body = draw(st.integers(1, 3))
                lines.append(f"    def {name}(self):")
                lines.extend(f"        v{i} = call_{i}()" for i in range(body))
                expected += 1
            lines.append("    attr = 1")
        else:
            lines.append(f"def {draw(_ident)}(a, b=2):")
            lines.append("    def nested():")
            lines.append("        pass")
            lines.extend("    x = 1" for _ in range(draw(st.integers(0, 2))))
            expected += 1
        lines.append("")
    return "\n".join(lines) + "\n", expected


@settings(max_examples=60, deadline=None)
@given(modules())
def test_generated_modules_invariants(mod):
    src, expected = mod
    fi = index_file(src, REF)
    assert fi.parse_ok
    assert fi.method_count == expected
    assert index_file(src, REF) == fi
    for f in fi.functions:
        assert f.position.indent == 0 and f.enclosing_class is None
    for c in fi.classes:
        for m in c.methods:
            assert c.position.line < m.position.line <= m.position.line_end <= c.position.line_end
            assert m.position.indent > c.position.indent
            assert m.enclosing_class == c.name
            assert m.signature_text.startswith("def ") and m.name in m.signature_text
    for m in fi.all_methods():
        assert 1 <= m.position.line <= m.position.line_end
        for c in m.called_names:
            assert c.terminal == c.dotted_path.rsplit(".", 1)[-1]
