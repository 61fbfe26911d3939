"""Corpus-level counters aggregated from the per-repository artifacts."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from .store import RepoOutputSet, find_index_files

log = logging.getLogger(__name__)

_TITLES = {
    "repositories": "Repositories",
    "all_files": "All Files",
    "test_files": "Test Files",
    "all_classes": "All Classes",
    "all_methods": "All Methods",
    "test_methods": "Test Methods",
    "focal_methods": "Focal Methods",
}


@dataclass(frozen=True)
class CorpusStats:
    repositories: int = 0
    all_files: int = 0
    test_files: int = 0
    all_classes: int = 0
    all_methods: int = 0
    test_methods: int = 0
    focal_methods: int = 0

    def __add__(self, other: CorpusStats) -> CorpusStats:
        return CorpusStats(*(a + b for a, b in zip(astuple(self), astuple(other))))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def table(self) -> str:
        width = max(len(t) for t in _TITLES.values())
        rows = [f"{_TITLES[k]:<{width}}  {v:>15,}" for k, v in self.as_dict().items()]
        return "\n".join(rows)


def _load(path: Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def snapshot_stats(out: RepoOutputSet) -> CorpusStats:
    """Counters for one ``<hash>`` artifact set, excluding the repository count."""
    files = _load(out.index_path)["files"]
    all_classes = sum(len(f["classes"]) for f in files.values())
    all_methods = sum(len(f["functions"]) + sum(len(c["methods"]) for c in f["classes"]) for f in files.values())
    test_files = test_methods = focal = 0
    if out.tests_path.exists():
        records = _load(out.tests_path)["test_files"]
        test_files = len(records)
        test_methods = sum(len(r["tests"]) for r in records)
    if out.focal_path.exists():
        focal = sum(len(v["methods"]) for v in _load(out.focal_path).values())
    return CorpusStats(0, len(files), test_files, all_classes, all_methods, test_methods, focal)


def collect_stats(data_dir: str | os.PathLike) -> CorpusStats:
    """Sum counters over every repository directory holding an index file."""
    total = CorpusStats()
    by_repo: dict[Path, list[Path]] = {}
    for p in find_index_files(data_dir):
        by_repo.setdefault(p.parent, []).append(p)
    for repo_dir, snaps in sorted(by_repo.items()):
        if len(snaps) > 1:
            log.warning("%s holds %d commits; counting all of them", repo_dir, len(snaps))
        total = total + CorpusStats(repositories=1)
        for p in snaps:
            total = total + snapshot_stats(RepoOutputSet.from_index_path(p))
    return total
