"""Per-repository pipeline: checkout, index, discover, resolve, persist."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .discovery import ProjectIndex, TestFileRecord, discover_repository
from .indexer import FileIndex, index_repository
from .ingest import DEFAULT_REMOTE, RepoError, RepoSpec, capture_head_commit, ensure_checkout
from .resolver import FocalMapping, build_repository_mappings
from .store import RepoOutputSet, write_focal, write_index, write_tests

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RepoResult:
    slug: str
    ok: bool
    commit: str | None = None
    message: str = ""


def map_index(index: dict[str, FileIndex], out: RepoOutputSet) -> tuple[list[TestFileRecord], list[FocalMapping]]:
    """Discover tests and resolve focal methods from an index; write both artifacts."""
    project = ProjectIndex(index)
    tests = discover_repository(project)
    write_tests(tests, out)
    mappings = build_repository_mappings(tests, project)
    if not write_focal(mappings, out) and out.focal_path.exists():
        out.focal_path.unlink()
    return tests, mappings


def index_repo(
    spec: RepoSpec,
    repos_dir: str | os.PathLike,
    data_dir: str | os.PathLike,
    remote_template: str = DEFAULT_REMOTE,
    jobs: int = 1,
) -> tuple[dict[str, FileIndex], RepoOutputSet]:
    root = ensure_checkout(spec, repos_dir, remote_template)
    commit = capture_head_commit(root)
    index = index_repository(root, jobs=jobs)
    out = RepoOutputSet(Path(data_dir), spec.owner, spec.name, commit)
    write_index(index, out)
    return index, out


def process_repo(
    spec: RepoSpec,
    repos_dir: str | os.PathLike,
    data_dir: str | os.PathLike,
    remote_template: str = DEFAULT_REMOTE,
    jobs: int = 1,
    map_tests: bool = True,
) -> RepoResult:
    try:
        index, out = index_repo(spec, repos_dir, data_dir, remote_template, jobs)
        if not map_tests:
            return RepoResult(spec.slug, True, out.commit, f"{len(index)} files")
        tests, mappings = map_index(index, out)
    except (RepoError, OSError) as e:
        return RepoResult(spec.slug, False, message=str(e))
    n_tests = sum(len(t.tests) for t in tests)
    n_focal = sum(len(m.entries) for m in mappings)
    return RepoResult(
        spec.slug, True, out.commit, f"{len(index)} files, {n_tests} tests, {n_focal} focal methods"
    )


def _process_star(args: tuple) -> RepoResult:
    return process_repo(*args)


def run_repos(
    specs: list[RepoSpec],
    repos_dir: str | os.PathLike,
    data_dir: str | os.PathLike,
    jobs: int = 1,
    remote_template: str = DEFAULT_REMOTE,
    map_tests: bool = True,
) -> list[RepoResult]:
    """Process every repository; failures are reported, never raised.

    With several repositories the parallelism is spent across repositories,
    with a single one it is spent across its files.
    """
    if len(specs) == 1 or jobs <= 1:
        file_jobs = jobs if len(specs) == 1 else 1
        results = []
        for s in specs:
            results.append(process_repo(s, repos_dir, data_dir, remote_template, file_jobs, map_tests))
            _report(results[-1])
        return results
    work = [(s, repos_dir, data_dir, remote_template, 1, map_tests) for s in specs]
    results = []
    with ProcessPoolExecutor(max_workers=min(jobs, len(specs))) as pool:
        for r in pool.map(_process_star, work):
            _report(r)
            results.append(r)
    return results


def _report(r: RepoResult) -> None:
    if r.ok:
        log.info("%s@%s: %s", r.slug, (r.commit or "")[:12], r.message)
    else:
        log.error("%s: failed: %s", r.slug, r.message)
