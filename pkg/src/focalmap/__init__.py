"""Mine Python repositories for unit tests mapped to the focal methods they exercise."""

from .context import FocalContext, StaleCheckoutError, build_context, generate_for_repo
from .discovery import (
    Framework,
    ProjectIndex,
    TestFileRecord,
    TestMethodRecord,
    classify_test_file,
    discover_tests,
    filter_project_calls,
)
from .fuzzy import best_match, similarity
from .indexer import (
    CalledName,
    ClassRecord,
    FileIndex,
    ImportRecord,
    MethodRecord,
    Position,
    index_file,
    index_repository,
)
from .ingest import (
    RepoError,
    RepoRef,
    SourceFileRef,
    capture_head_commit,
    discover_python_files,
    ensure_checkout,
    resolve_module_name,
)
from .resolver import (
    FocalEntry,
    FocalMapping,
    FocalMethodRef,
    build_focal_mapping,
    resolve_focal_class,
    resolve_focal_file,
    resolve_focal_method,
)
from .stats import CorpusStats, collect_stats
from .store import RepoOutputSet, SchemaError, read_focal, write_focal

__version__ = "0.1.0"

__all__ = [
    "CalledName",
    "ClassRecord",
    "CorpusStats",
    "FileIndex",
    "FocalContext",
    "FocalEntry",
    "FocalMapping",
    "FocalMethodRef",
    "Framework",
    "ImportRecord",
    "MethodRecord",
    "Position",
    "ProjectIndex",
    "RepoError",
    "RepoOutputSet",
    "RepoRef",
    "SchemaError",
    "SourceFileRef",
    "StaleCheckoutError",
    "TestFileRecord",
    "TestMethodRecord",
    "best_match",
    "build_context",
    "build_focal_mapping",
    "capture_head_commit",
    "classify_test_file",
    "collect_stats",
    "discover_python_files",
    "discover_tests",
    "ensure_checkout",
    "filter_project_calls",
    "generate_for_repo",
    "index_file",
    "index_repository",
    "read_focal",
    "resolve_focal_class",
    "resolve_focal_file",
    "resolve_focal_method",
    "resolve_module_name",
    "similarity",
    "write_focal",
]
