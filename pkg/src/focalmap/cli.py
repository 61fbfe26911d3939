"""Command line entry point: ``focalmap {run,index,map,context,stats}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .context import StaleCheckoutError, generate_for_repo
from .ingest import DEFAULT_REMOTE, RepoError, read_repo_list
from .pipeline import map_index, run_repos
from .stats import collect_stats
from .store import RepoOutputSet, SchemaError, find_index_files, read_index

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DATA_DIR_ENV = "FOCALMAP_DATA_DIR"

log = logging.getLogger("focalmap")


class UsageError(Exception):
    pass


def _default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--data-dir",
        default=os.environ.get(DATA_DIR_ENV, "data"),
        help=f"output root (default: ${DATA_DIR_ENV} or ./data)",
    )
    common.add_argument("--repos-dir", default="repos", help="checkout root (default: ./repos)")
    common.add_argument("--jobs", type=_positive, default=_default_jobs(), help="parallel workers")
    common.add_argument(
        "--remote-template",
        default=DEFAULT_REMOTE,
        help="clone URL pattern for missing checkouts, with {owner} and {name}",
    )
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="focalmap", description="Map Python unit tests to their focal methods.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="index, discover and map every listed repository")
    p.add_argument("--repo-list", required=True, help="file with one owner/name per line")

    p = sub.add_parser("index", parents=[common], help="write <hash>.json for every listed repository")
    p.add_argument("--repo-list", required=True)

    p = sub.add_parser("map", parents=[common], help="derive tests and focal files from existing indexes")
    p.add_argument("index_files", nargs="*", help="<hash>.json files (default: all under --data-dir)")

    p = sub.add_parser("context", parents=[common], help="render focal contexts for a <hash>.focal.json")
    p.add_argument("focal_json")

    sub.add_parser("stats", parents=[common], help="print corpus counters (JSON on stdout)")
    return parser


def _specs(path: str):
    try:
        specs = read_repo_list(path)
    except OSError as e:
        raise UsageError(f"cannot read repository list {path}: {e.strerror}") from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not specs:
        raise UsageError(f"repository list {path} is empty")
    return specs


def cmd_run(args, map_tests: bool = True) -> int:
    specs = _specs(args.repo_list)
    results = run_repos(specs, args.repos_dir, args.data_dir, args.jobs, args.remote_template, map_tests)
    ok = sum(r.ok for r in results)
    log.info("%d of %d repositories processed", ok, len(results))
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_map(args) -> int:
    paths = [Path(p) for p in args.index_files] or find_index_files(args.data_dir)
    if not paths:
        raise UsageError(f"no index files under {args.data_dir}")
    ok = 0
    for p in paths:
        try:
            out = RepoOutputSet.from_index_path(p)
        except ValueError as e:
            raise UsageError(str(e)) from None
        try:
            _, mappings = map_index(read_index(p), out)
        except (OSError, SchemaError, KeyError, ValueError) as e:
            log.error("%s: %s", p, e)
            continue
        ok += 1
        log.info("%s/%s: %d focal mappings", out.owner, out.name, sum(len(m.entries) for m in mappings))
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_context(args) -> int:
    try:
        RepoOutputSet.from_focal_path(args.focal_json)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not Path(args.focal_json).is_file():
        raise UsageError(f"no such file: {args.focal_json}")
    try:
        path, notes = generate_for_repo(args.focal_json, args.repos_dir, args.remote_template)
    except (RepoError, SchemaError, StaleCheckoutError, OSError) as e:
        log.error("%s", e)
        return EXIT_FAILURE
    log.info("wrote %s (%d entries skipped)", path, len(notes))
    return EXIT_OK


def cmd_stats(args) -> int:
    if not find_index_files(args.data_dir):
        raise UsageError(f"no repository outputs under {args.data_dir}")
    stats = collect_stats(args.data_dir)
    print(stats.table(), file=sys.stderr)
    print(stats.to_json())
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handlers = {
        "run": cmd_run,
        "index": lambda a: cmd_run(a, map_tests=False),
        "map": cmd_map,
        "context": cmd_context,
        "stats": cmd_stats,
    }
    try:
        return handlers[args.command](args)
    except UsageError as e:
        print(f"focalmap {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
