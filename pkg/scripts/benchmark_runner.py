#!/usr/bin/env python3
import argparse
import json
import os
import time
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from jsonschema import validate

from deid.config.settings import get_settings
from deid.pipeline.config import CleanSection, JobConfig, ProfileSection
from deid.pipeline.runner import discover_inputs, run
from deid.profile.uid_map import UidMap
from deid.scoring.answer_key import Category, load_answer_key
from deid.scoring.report import render_table, write_report
from deid.scoring.scorer import ScoreReport, score
from scripts.generate_synthetic_dicom_corpus import ADDRESS_KEYWORDS, generate_corpus

BENCH_SALT_ENV = "DEID_BENCH_SALT"


def scan_for_tokens(root: Path, tokens: list[str]) -> dict[str, int]:
    """Occurrences of each token across the raw bytes of every file under ``root``."""
    needles = {token: token.upper().encode("latin-1") for token in tokens}
    hits: dict[str, int] = {}
    for path in discover_inputs(root):
        data = path.read_bytes().upper()
        for token, needle in needles.items():
            count = data.count(needle)
            if count:
                hits[token] = hits.get(token, 0) + count
    return hits


def _category_percent(report: ScoreReport, category: Category) -> float:
    item = report.categories[category]
    if item.instance_total == 0:
        return 100.0
    return round(100.0 * item.instance_pass / item.instance_total, 2)


def run_benchmark(
    out_dir: Path,
    corpus_dir: Path,
    *,
    profile: str = "midi",
    jobs: int = 4,
    with_address_rule: bool = False,
) -> dict[str, Any]:
    if not (corpus_dir / "answer_key.csv").exists():
        generate_corpus(corpus_dir)
    os.environ.setdefault(BENCH_SALT_ENV, "synthetic-benchmark-salt")

    output_root = out_dir / "output"
    uid_map_path = out_dir / "uid_map.tsv"
    if uid_map_path.exists():
        uid_map_path.unlink()
    config = JobConfig(
        input_root=corpus_dir / "input",
        output_root=output_root,
        uid_map_path=uid_map_path,
        audit_log_path=out_dir / "audit" / "events.jsonl",
        salt_env=BENCH_SALT_ENV,
        jobs=jobs,
        profile=ProfileSection(options=profile),
        clean=CleanSection(address_keywords=ADDRESS_KEYWORDS if with_address_rule else []),
    )

    started = time.perf_counter()
    summary = run(config)
    pipeline_seconds = time.perf_counter() - started

    uid_map = UidMap()
    uid_map.load(uid_map_path)
    key = load_answer_key((corpus_dir / "answer_key.csv").read_bytes())
    report = score(output_root, key, uid_map, jobs=jobs)
    address_key = load_answer_key((corpus_dir / "answer_key_address.csv").read_bytes())
    address_report = score(output_root, address_key, uid_map, jobs=jobs)
    runtime_seconds = time.perf_counter() - started

    planted = [
        line
        for line in (corpus_dir / "planted_tokens.txt").read_text(encoding="utf-8").splitlines()
        if line.isalpha()
    ]
    leaks = scan_for_tokens(output_root, planted)

    write_report(report, out_dir / "score_report.json")
    (out_dir / "score_table.txt").write_text(render_table(report), encoding="utf-8")

    result: dict[str, Any] = {
        "run_id": datetime.now(tz=UTC).strftime("%Y-%m-%dT%H-%M-%SZ"),
        "project": "dicom-deid-toolkit",
        "profile": profile,
        "corpus": str(corpus_dir),
        "metrics": {
            "files_in": summary.files_in,
            "written": summary.written,
            "rejected": summary.rejected,
            "failed": summary.failed,
            "key_entries": len(key),
            "overall_percent": round(report.overall_percent, 2),
            "text_remove_percent": _category_percent(report, Category.TEXT_REMOVE),
            "address_text_remove_percent": _category_percent(address_report, Category.TEXT_REMOVE),
            "leaked_tokens": sum(leaks.values()),
            "inconsistencies_before": summary.inconsistencies_before,
            "inconsistencies_after": summary.inconsistencies_after,
            "harmonized_instances": summary.harmonized_instances,
            "pipeline_seconds": round(pipeline_seconds, 3),
            "runtime_seconds": round(runtime_seconds, 3),
        },
    }
    schema = json.loads(
        (get_settings().contracts_dir / "benchmark-summary.schema.json").read_text(
            encoding="utf-8"
        )
    )
    validate(instance=result, schema=schema)
    (out_dir / "results_summary.json").write_text(json.dumps(result, indent=2), encoding="utf-8")

    metrics = result["metrics"]
    (out_dir / "report.md").write_text(
        "# Benchmark Report\n\n"
        f"- Profile: `{profile}`\n"
        f"- Files: `{metrics['files_in']}` in, `{metrics['written']}` written, "
        f"`{metrics['rejected']}` rejected, `{metrics['failed']}` failed\n"
        f"- Overall: `{metrics['overall_percent']:.2f}%`\n"
        f"- text_remove: `{metrics['text_remove_percent']:.2f}%`\n"
        f"- Address text_remove (reported separately): "
        f"`{metrics['address_text_remove_percent']:.2f}%`\n"
        f"- Leaked planted tokens: `{metrics['leaked_tokens']}`\n"
        f"- Series inconsistencies: `{metrics['inconsistencies_before']}` -> "
        f"`{metrics['inconsistencies_after']}`\n"
        f"- Runtime: `{metrics['runtime_seconds']}s`\n\n"
        "```\n" + render_table(report) + "```\n",
        encoding="utf-8",
    )
    return result


def main() -> None:
    parser = argparse.ArgumentParser(description="Run the synthetic deidentification benchmark")
    parser.add_argument("--out", default="artifacts/benchmarks", help="Output directory")
    parser.add_argument(
        "--corpus",
        default="benchmarks/data/synthetic_dicom",
        help="Corpus directory (generated when missing)",
    )
    parser.add_argument("--profile", default="midi", help="Profile string")
    parser.add_argument("--jobs", type=int, default=4)
    parser.add_argument(
        "--with-address-rule",
        action="store_true",
        help="Enable the ADDR rule with the generator's street keywords",
    )
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_benchmark(
        out_dir,
        Path(args.corpus),
        profile=args.profile,
        jobs=args.jobs,
        with_address_rule=args.with_address_rule,
    )
    print(f"Benchmark artifacts written to {out_dir}")


if __name__ == "__main__":
    main()
