"""Hypothesis generators for valid focal mappings."""

from hypothesis import strategies as st

from focalmap.indexer import Position
from focalmap.resolver import FocalEntry, FocalMapping, FocalMethodRef

_ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True)
_path = st.lists(_ident, min_size=1, max_size=3).map(lambda parts: "/".join(parts) + ".py")
_dotted = st.lists(_ident, min_size=1, max_size=4).map(".".join)


@st.composite
def positions(draw):
    line = draw(st.integers(1, 10_000))
    return Position(line, line + draw(st.integers(0, 500)), draw(st.integers(0, 40)))


entries = st.builds(
    FocalEntry,
    positions(),
    st.builds(FocalMethodRef, _ident, positions()),
    st.none() | _dotted,
)


@st.composite
def focal_mappings(draw, max_files=4):
    files = draw(st.lists(_path, min_size=1, max_size=max_files, unique=True))
    out = []
    for test_file in sorted(files):
        tests = draw(st.dictionaries(_ident | st.text(min_size=1, max_size=12), entries, min_size=1, max_size=5))
        out.append(FocalMapping(test_file, draw(_path), tests))
    return out
