from __future__ import annotations

import os
import shutil
import subprocess
from pathlib import Path

import pytest

from focalmap.indexer import index_file, module_names

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

# fixture repositories contain test_*.py files of their own
collect_ignore_glob = ["fixtures/*"]

GIT_ENV = {
    "GIT_AUTHOR_NAME": "fixture",
    "GIT_AUTHOR_EMAIL": "fixture@example.invalid",
    "GIT_COMMITTER_NAME": "fixture",
    "GIT_COMMITTER_EMAIL": "fixture@example.invalid",
    "GIT_AUTHOR_DATE": "2024-01-01T00:00:00+00:00",
    "GIT_COMMITTER_DATE": "2024-01-01T00:00:00+00:00",
    "GIT_CONFIG_GLOBAL": os.devnull,
    "GIT_CONFIG_NOSYSTEM": "1",
}


def git(*args: str, cwd: Path) -> str:
    proc = subprocess.run(
        ["git", *args], cwd=cwd, capture_output=True, text=True, check=True, env={**os.environ, **GIT_ENV}
    )
    return proc.stdout.strip()


def make_git_repo(dest: Path, source: Path | None = None, files: dict[str, str] | None = None) -> Path:
    """Create a single-commit repository at *dest* from a fixture tree or a file dict."""
    if source is not None:
        shutil.copytree(source, dest)
    else:
        dest.mkdir(parents=True)
    for rel, text in (files or {}).items():
        p = dest / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    git("init", "-q", "-b", "main", cwd=dest)
    git("add", "-A", cwd=dest)
    git("commit", "-q", "-m", "fixture", cwd=dest)
    return dest


def index_tree(files: dict[str, str]):
    """In-memory repository index from ``{relative_path: source}``."""
    refs = module_names(sorted(files))
    return {p: index_file(files[p], refs[p]) for p in sorted(files)}


@pytest.fixture
def corpus(tmp_path: Path) -> Path:
    """``repos/<owner>/<name>`` checkouts of the three vendored fixture repositories."""
    repos = tmp_path / "repos"
    for owner, name in [("spotify", "gordon"), ("acme", "relay"), ("acme", "calc")]:
        make_git_repo(repos / owner / name, FIXTURES / name)
    return repos


@pytest.fixture
def repo_list(tmp_path: Path) -> Path:
    p = tmp_path / "repos.txt"
    p.write_text("# fixture corpus\nspotify/gordon\nacme/relay\n\nacme/calc  # no tests mapped beyond one\n")
    return p


# (criterion number, passed, description) appended by tests/test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, text in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}")
