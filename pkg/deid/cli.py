"""``deid`` command line: run, inspect, score."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from deid.codec.dataset import DataElement, walk
from deid.codec.reader import parse_file
from deid.config.settings import get_settings
from deid.core.errors import DeidError
from deid.core.logging import configure_logging
from deid.dictionary.standard import keyword_for
from deid.pipeline.config import JobConfig
from deid.pipeline.runner import run
from deid.profile.uid_map import UidMap
from deid.scoring.answer_key import load_answer_key
from deid.scoring.report import render_table, write_report
from deid.scoring.scorer import score

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_CONFIG = 2

_PREVIEW_LIMIT = 64


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deid", description="DICOM deidentification toolkit")
    parser.add_argument("--log-level", default=None, help="Override DEID_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Deidentify an input tree")
    run_parser.add_argument("--config", type=Path, default=None, help="TOML job file")
    run_parser.add_argument("--input", dest="input_root", type=Path, default=None)
    run_parser.add_argument("--output", dest="output_root", type=Path, default=None)
    run_parser.add_argument("--profile", default=None, help="e.g. basic+cleandesc")
    run_parser.add_argument("--uid-map", dest="uid_map_path", type=Path, default=None)
    run_parser.add_argument(
        "--salt-env", default=None, help="Name of the environment variable holding the salt"
    )
    run_parser.add_argument("--audit-log", dest="audit_log_path", type=Path, default=None)
    run_parser.add_argument("--failure-policy", choices=["halt", "skip"], default=None)
    run_parser.add_argument("--dry-run", action="store_true", default=None)
    run_parser.add_argument("--jobs", type=int, default=None)

    inspect_parser = commands.add_parser("inspect", help="Dump a DICOM file")
    inspect_parser.add_argument("file", type=Path)

    score_parser = commands.add_parser("score", help="Grade outputs against an answer key")
    score_parser.add_argument("--outputs", type=Path, required=True)
    score_parser.add_argument("--key", type=Path, required=True)
    score_parser.add_argument("--uid-map", dest="uid_map_path", type=Path, default=None)
    score_parser.add_argument("--report", type=Path, default=None, help="JSON report path")
    score_parser.add_argument("--jobs", type=int, default=4)
    return parser


def _run_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {
        "input_root": args.input_root,
        "output_root": args.output_root,
        "uid_map_path": args.uid_map_path,
        "salt_env": args.salt_env,
        "audit_log_path": args.audit_log_path,
        "failure_policy": args.failure_policy,
        "dry_run": args.dry_run,
        "jobs": args.jobs,
    }
    if args.profile is not None:
        overrides["profile"] = {"options": args.profile}
    return overrides


def _command_run(args: argparse.Namespace) -> int:
    try:
        config = JobConfig.load(args.config, _run_overrides(args))
        summary = run(config)
    except (DeidError, OSError) as exc:
        logger.error("run aborted", extra={"reason": getattr(exc, "code", "io_error")})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(
        f"files_in={summary.files_in} written={summary.written} rejected={summary.rejected} "
        f"failed={summary.failed} not_attempted={summary.not_attempted}"
    )
    return EXIT_OK if summary.exit_code == 0 else EXIT_FAILURES


def _preview(element: DataElement) -> str:
    if element.is_sequence:
        return f"<{len(element.items)} item(s)>"
    if element.tag.is_private and not element.tag.is_private_creator:
        length = len(element.raw) if element.raw is not None else 0
        return f"<{length} bytes>"
    text = element.text
    if text is None:
        return f"<{len(element.value)} bytes>"  # type: ignore[arg-type]
    return text if len(text) <= _PREVIEW_LIMIT else text[:_PREVIEW_LIMIT] + "..."


def _command_inspect(args: argparse.Namespace) -> int:
    try:
        obj = parse_file(args.file.read_bytes())
    except (DeidError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    print(f"transfer syntax: {obj.transfer_syntax}")
    for path, element in walk(obj.file_meta):
        print(f"{path}  {element.vr}  {keyword_for(path.tag)}  {_preview(element)}")
    for path, element in walk(obj.dataset):
        indent = "  " * path.depth
        print(f"{indent}{path}  {element.vr}  {keyword_for(path.tag)}  {_preview(element)}")
    return EXIT_OK


def _command_score(args: argparse.Namespace) -> int:
    try:
        key = load_answer_key(args.key.read_bytes())
        uid_map = None
        if args.uid_map_path is not None:
            uid_map = UidMap()
            uid_map.load(args.uid_map_path)
        report = score(args.outputs, key, uid_map, jobs=args.jobs)
        if args.report is not None:
            write_report(report, args.report)
    except (DeidError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(render_table(report), end="")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    if args.command == "run":
        return _command_run(args)
    if args.command == "inspect":
        return _command_inspect(args)
    return _command_score(args)


if __name__ == "__main__":
    raise SystemExit(main())
