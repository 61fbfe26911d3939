"""Repository enumeration: Python files, module names, HEAD hashes, checkouts."""

from __future__ import annotations

import logging
import os
import re
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

EXCLUDED_DIRS = frozenset({".git", ".hg", ".svn", "node_modules"})
VCS_MARKERS = (".git", ".hg", ".svn")
DEFAULT_REMOTE = "https://github.com/{owner}/{name}.git"

_HASH_RE = re.compile(r"[0-9a-f]{40}")


class RepoError(Exception):
    """A per-repository failure; mining continues with the next repository."""


@dataclass(frozen=True)
class SourceFileRef:
    relative_path: str
    module_name: str
    importable: bool = True


@dataclass(frozen=True)
class RepoRef:
    owner: str
    name: str
    head_hash: str
    root: Path

    @property
    def slug(self) -> str:
        return f"{self.owner}/{self.name}"


@dataclass(frozen=True)
class RepoSpec:
    """One line of a repository list: ``owner/name`` plus an optional remote URL."""

    owner: str
    name: str
    remote: str | None = None

    @property
    def slug(self) -> str:
        return f"{self.owner}/{self.name}"


def _is_venv(path: str) -> bool:
    return os.path.isfile(os.path.join(path, "pyvenv.cfg"))


def _is_nested_vcs_root(path: str) -> bool:
    return any(os.path.exists(os.path.join(path, m)) for m in VCS_MARKERS)


def discover_python_files(root: str | os.PathLike) -> list[str]:
    """Return relative paths of every ``.py`` file under *root*, sorted.

    Symlinks are never followed. VCS metadata, ``node_modules``, virtual
    environments and nested repositories (submodules, vendored checkouts)
    are pruned.
    """
    root = os.fspath(root)
    if not os.path.isdir(root) or not os.access(root, os.R_OK | os.X_OK):
        raise RepoError(f"unreadable repository root: {root}")

    found: list[str] = []

    def onerror(err: OSError) -> None:
        log.warning("skipping unreadable directory %s: %s", err.filename, err.strerror)

    for dirpath, dirnames, filenames in os.walk(root, onerror=onerror, followlinks=False):
        keep = []
        for d in dirnames:
            full = os.path.join(dirpath, d)
            if d in EXCLUDED_DIRS or os.path.islink(full):
                continue
            if _is_venv(full) or _is_nested_vcs_root(full):
                continue
            keep.append(d)
        dirnames[:] = keep
        for fn in filenames:
            if not fn.endswith(".py"):
                continue
            full = os.path.join(dirpath, fn)
            if os.path.islink(full) or not os.path.isfile(full):
                continue
            rel = os.path.relpath(full, root)
            found.append(rel.replace(os.sep, "/"))
    found.sort()
    return found


def resolve_module_name(file: str, root: str | os.PathLike) -> str:
    """Approximate the dotted module name of *file* (relative to *root*).

    Directory segments are prepended while each directory holds an
    ``__init__.py``; the chain stops at the first directory without one.
    """
    parts = file.replace("\\", "/").split("/")
    stem = parts[-1][:-3] if parts[-1].endswith(".py") else parts[-1]
    dirs = parts[:-1]
    chain: list[str] = []
    root = Path(root)
    for i in range(len(dirs), 0, -1):
        if (root.joinpath(*dirs[:i]) / "__init__.py").is_file():
            chain.append(dirs[i - 1])
        else:
            break
    chain.reverse()
    if stem == "__init__" and chain:
        return ".".join(chain)
    return ".".join(chain + [stem])


def is_importable(module_name: str) -> bool:
    return all(seg.isidentifier() for seg in module_name.split("."))


def source_file_ref(file: str, root: str | os.PathLike) -> SourceFileRef:
    mod = resolve_module_name(file, root)
    return SourceFileRef(file, mod, is_importable(mod))


def _git(args: list[str], cwd: str | os.PathLike | None = None) -> str:
    env = dict(os.environ, GIT_TERMINAL_PROMPT="0", LC_ALL="C")
    proc = subprocess.run(
        ["git", *args], cwd=cwd, capture_output=True, text=True, env=env
    )
    if proc.returncode != 0:
        raise RepoError(f"git {' '.join(args)} failed: {proc.stderr.strip()}")
    return proc.stdout.strip()


def capture_head_commit(root: str | os.PathLike) -> str:
    root = Path(root)
    if not (root / ".git").exists():
        raise RepoError(f"not a git checkout: {root}")
    head = _git(["rev-parse", "HEAD"], cwd=root)
    if not _HASH_RE.fullmatch(head):
        raise RepoError(f"unexpected HEAD value {head!r} in {root}")
    return head


def ensure_checkout(
    ref: str | RepoSpec,
    repos_dir: str | os.PathLike,
    remote_template: str = DEFAULT_REMOTE,
) -> Path:
    """Return ``repos_dir/owner/name``, cloning it first if it is missing."""
    spec = ref if isinstance(ref, RepoSpec) else parse_repo_line(ref)
    if spec is None:
        raise RepoError(f"bad repository reference: {ref!r}")
    dest = Path(repos_dir) / spec.owner / spec.name
    if dest.is_dir():
        return dest
    remote = spec.remote or remote_template.format(owner=spec.owner, name=spec.name)
    dest.parent.mkdir(parents=True, exist_ok=True)
    log.info("cloning %s from %s", spec.slug, remote)
    try:
        _git(["clone", "--quiet", remote, str(dest)])
    except RepoError:
        # a failed clone may leave a partial directory behind
        if dest.exists():
            shutil.rmtree(dest, ignore_errors=True)
        raise
    return dest


def checkout_commit(root: str | os.PathLike, commit: str) -> None:
    try:
        _git(["-c", "advice.detachedHead=false", "checkout", "--quiet", "--detach", commit], cwd=root)
    except RepoError as e:
        raise RepoError(f"cannot check out {commit} in {root}: {e}") from None


def repo_ref(spec: RepoSpec, root: str | os.PathLike) -> RepoRef:
    return RepoRef(spec.owner, spec.name, capture_head_commit(root), Path(root))


def parse_repo_line(line: str) -> RepoSpec | None:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    fields = text.split()
    slug = fields[0].strip("/")
    if slug.count("/") != 1:
        raise ValueError(f"expected owner/name, got {slug!r}")
    owner, name = slug.split("/")
    if not owner or not name or owner in (".", "..") or name in (".", ".."):
        raise ValueError(f"expected owner/name, got {slug!r}")
    return RepoSpec(owner, name, fields[1] if len(fields) > 1 else None)


def read_repo_list(path: str | os.PathLike) -> list[RepoSpec]:
    specs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                spec = parse_repo_line(line)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
            if spec is not None:
                specs.append(spec)
    return specs
