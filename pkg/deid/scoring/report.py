import json
from pathlib import Path
from typing import Any

from jsonschema import ValidationError, validate

from deid.config.settings import Settings, get_settings
from deid.scoring.answer_key import Category
from deid.scoring.scorer import ScoreReport

_COLUMNS = ("category", "inst_pass", "inst_fail", "fail_%", "series_pass", "series_fail")


class ReportValidationError(Exception):
    """Raised when a score report does not match its contract."""


def report_to_dict(report: ScoreReport) -> dict[str, Any]:
    return {
        "overall_percent": round(report.overall_percent, 2),
        "passes": report.passes,
        "failures": report.failure_count,
        "categories": [
            {
                "category": score.category.value,
                "instance_pass": score.instance_pass,
                "instance_fail": score.instance_fail,
                "fail_percent": round(score.fail_percent, 2),
                "series_pass": score.series_pass,
                "series_fail": score.series_fail,
            }
            for score in report.categories.values()
        ],
        "failure_rows": [
            {
                "instance_uid": item.entry.instance_uid,
                "tag_path": str(item.entry.path),
                "category": item.entry.category.value,
                "series_key": item.series_key,
                "detail": item.detail,
            }
            for item in report.failures
        ],
    }


def render_table(report: ScoreReport) -> str:
    rows = [list(_COLUMNS)]
    for category in Category:
        score = report.categories[category]
        rows.append(
            [
                category.value,
                str(score.instance_pass),
                str(score.instance_fail),
                f"{score.fail_percent:.2f}",
                str(score.series_pass),
                str(score.series_fail),
            ]
        )
    widths = [max(len(row[index]) for row in rows) for index in range(len(_COLUMNS))]
    lines = [
        "  ".join(
            cell.ljust(widths[index]) if index == 0 else cell.rjust(widths[index])
            for index, cell in enumerate(row)
        )
        for row in rows
    ]
    lines.insert(1, "  ".join("-" * width for width in widths))
    lines.append("")
    lines.append(
        f"overall: {report.overall_display}% "
        f"({report.passes} passed, {report.failure_count} failed)"
    )
    return "\n".join(lines) + "\n"


def write_report(
    report: ScoreReport, path: Path, settings: Settings | None = None
) -> dict[str, Any]:
    settings = settings or get_settings()
    payload = report_to_dict(report)
    schema = json.loads(
        (settings.contracts_dir / "score-report.schema.json").read_text(encoding="utf-8")
    )
    try:
        validate(instance=payload, schema=schema)
    except ValidationError as exc:
        raise ReportValidationError(str(exc)) from exc
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return payload
