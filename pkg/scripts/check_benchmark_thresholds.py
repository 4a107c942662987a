#!/usr/bin/env python3
import argparse
import json
from pathlib import Path


def evaluate_thresholds(
    summary: dict[str, object],
    min_overall_percent: float,
    min_text_remove_percent: float,
    max_leaked_tokens: int,
    max_runtime_seconds: float,
    max_inconsistencies_after: int | None = None,
    max_failed: int | None = None,
) -> list[str]:
    metrics = summary.get("metrics")
    if not isinstance(metrics, dict):
        return ["results_summary.json missing metrics object"]

    failures: list[str] = []

    def _safe_float(key: str, default: float) -> float:
        raw = metrics.get(key)
        if raw is None or raw == "n/a":
            failures.append(f"{key} is missing or null in metrics (got {raw!r})")
            return default
        try:
            return float(raw)
        except (TypeError, ValueError):
            failures.append(f"{key} is not numeric (got {raw!r})")
            return default

    overall = _safe_float("overall_percent", 0.0)
    text_remove = _safe_float("text_remove_percent", 0.0)
    leaked = _safe_float("leaked_tokens", 999999.0)
    runtime = _safe_float("runtime_seconds", 999999.0)

    if overall < min_overall_percent:
        failures.append(f"overall_percent {overall:.2f} below min {min_overall_percent:.2f}")
    if text_remove < min_text_remove_percent:
        failures.append(
            f"text_remove_percent {text_remove:.2f} below min {min_text_remove_percent:.2f}",
        )
    if leaked > max_leaked_tokens:
        failures.append(f"leaked_tokens {leaked:.0f} exceeds max {max_leaked_tokens}")
    if runtime > max_runtime_seconds:
        failures.append(
            f"runtime_seconds {runtime:.2f} exceeds max {max_runtime_seconds:.2f}",
        )

    if max_inconsistencies_after is not None:
        remaining = _safe_float("inconsistencies_after", 999999.0)
        if remaining > max_inconsistencies_after:
            failures.append(
                f"inconsistencies_after {remaining:.0f} exceeds max {max_inconsistencies_after}",
            )
    if max_failed is not None:
        failed = _safe_float("failed", 999999.0)
        if failed > max_failed:
            failures.append(f"failed {failed:.0f} exceeds max {max_failed}")
    return failures


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate benchmark thresholds")
    parser.add_argument(
        "--summary",
        default="artifacts/benchmarks/results_summary.json",
        help="Path to benchmark results_summary.json",
    )
    parser.add_argument("--min-overall-percent", type=float, default=99.0)
    parser.add_argument("--min-text-remove-percent", type=float, default=100.0)
    parser.add_argument("--max-leaked-tokens", type=int, default=0)
    parser.add_argument("--max-runtime-seconds", type=float, default=60.0)
    parser.add_argument("--max-inconsistencies-after", type=int, default=None)
    parser.add_argument("--max-failed", type=int, default=None)
    args = parser.parse_args()

    summary_path = Path(args.summary)
    if not summary_path.exists():
        raise SystemExit(f"summary file does not exist: {summary_path}")

    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    failures = evaluate_thresholds(
        summary=summary,
        min_overall_percent=args.min_overall_percent,
        min_text_remove_percent=args.min_text_remove_percent,
        max_leaked_tokens=args.max_leaked_tokens,
        max_runtime_seconds=args.max_runtime_seconds,
        max_inconsistencies_after=args.max_inconsistencies_after,
        max_failed=args.max_failed,
    )

    if failures:
        for failure in failures:
            print(f"FAIL: {failure}")
        raise SystemExit(1)

    print("Benchmark thresholds passed")


if __name__ == "__main__":
    main()
