"""Grade an output tree against an answer key.

Outputs are located by SOPInstanceUID: the key's original UID is mapped through
the run's UID map, falling back to the original so that an untouched copy of
the inputs can be scored too. A key entry whose instance has no output counts
as a failure.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from deid.codec.dataset import DataElement, DataSet, get_path
from deid.codec.reader import parse_file
from deid.codec.tags import Tag
from deid.core.errors import DeidError, MissingOutput
from deid.pipeline.runner import discover_inputs
from deid.profile.uid_map import UidMap
from deid.scoring.answer_key import AnswerKeyEntry, Category

logger = logging.getLogger(__name__)

SOP_INSTANCE_UID = Tag(0x0008, 0x0018)
SERIES_INSTANCE_UID = Tag(0x0020, 0x000E)

_WHITESPACE_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Judgement:
    entry: AnswerKeyEntry
    series_key: str
    passed: bool
    detail: str = ""


@dataclass
class CategoryScore:
    category: Category
    instance_pass: int = 0
    instance_fail: int = 0
    series_pass: int = 0
    series_fail: int = 0

    @property
    def instance_total(self) -> int:
        return self.instance_pass + self.instance_fail

    @property
    def fail_percent(self) -> float:
        if self.instance_total == 0:
            return 0.0
        return 100.0 * self.instance_fail / self.instance_total


@dataclass
class ScoreReport:
    categories: dict[Category, CategoryScore]
    failures: list[Judgement] = field(default_factory=list)

    @property
    def passes(self) -> int:
        return sum(item.instance_pass for item in self.categories.values())

    @property
    def failure_count(self) -> int:
        return sum(item.instance_fail for item in self.categories.values())

    @property
    def overall_percent(self) -> float:
        total = self.passes + self.failure_count
        if total == 0:
            return 100.0
        return 100.0 * self.passes / total

    @property
    def overall_display(self) -> str:
        return f"{self.overall_percent:.2f}"


def normalize_whitespace(text: str) -> str:
    return _WHITESPACE_RE.sub(" ", text).strip()


def index_outputs(outputs_dir: Path, *, jobs: int = 4) -> dict[str, DataSet]:
    """SOPInstanceUID -> dataset for every parseable file under ``outputs_dir``."""

    def _load(path: Path) -> tuple[Path, DataSet | None]:
        try:
            return path, parse_file(path.read_bytes()).dataset
        except (DeidError, OSError) as exc:
            logger.warning(
                "output not parseable",
                extra={"reason": getattr(exc, "code", "io_error"), "tag_path": path.name},
            )
            return path, None

    index: dict[str, DataSet] = {}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for _, dataset in pool.map(_load, discover_inputs(outputs_dir)):
            if dataset is None:
                continue
            sop = dataset.get_text(SOP_INSTANCE_UID)
            if sop:
                index[sop] = dataset
    return index


def _absent_or_empty(element: DataElement | None) -> bool:
    return element is None or element.is_empty


def _value_text(element: DataElement | None) -> str:
    if element is None:
        return ""
    text = element.text
    if text is not None:
        return text
    if isinstance(element.value, bytes):
        return element.value.decode("latin-1").rstrip("\x00 ")
    return ""


def judge(entry: AnswerKeyEntry, element: DataElement | None) -> tuple[bool, str]:
    """Verdict for one key entry against the output element at its path."""
    category = entry.category
    value = _value_text(element)
    if category is Category.REMOVE:
        return _absent_or_empty(element), "value still present"
    if category is Category.RETAIN:
        if element is None:
            return False, "element missing"
        if entry.expected is None:
            return True, ""
        return value == entry.expected, "value changed"
    if category is Category.TEXT_RETAIN:
        expected = normalize_whitespace(entry.expected or "")
        if element is None:
            return False, "element missing"
        return expected in normalize_whitespace(value), "retained text lost"
    if category is Category.TEXT_REMOVE:
        if _absent_or_empty(element):
            return True, ""
        tokens = entry.phi_tokens
        if not tokens:
            return False, "value still present"
        lowered = value.lower()
        leaked = [token for token in tokens if token.lower() in lowered]
        return not leaked, f"{len(leaked)} PHI token(s) remain"
    if category is Category.REPLACE_DUMMY:
        if _absent_or_empty(element):
            return False, "no dummy value"
        return value != entry.expected, "original value kept"
    if category is Category.DATE_ACTION:
        if _absent_or_empty(element):
            return True, ""
        if entry.expected is None:
            return False, "date still present"
        return value != entry.expected, "date unchanged"
    # remap_uid: consistency across references is settled by the caller.
    if _absent_or_empty(element):
        return False, "UID missing"
    original = entry.expected or entry.instance_uid
    return value != original, "UID not remapped"


def _series_key(dataset: DataSet | None, entry: AnswerKeyEntry) -> str:
    if dataset is not None:
        series = dataset.get_text(SERIES_INSTANCE_UID)
        if series:
            return series
    return f"missing:{entry.instance_uid}"


def _locate(
    entry: AnswerKeyEntry, outputs: dict[str, DataSet], uid_map: UidMap | None
) -> DataSet:
    mapped = uid_map.get(entry.instance_uid) if uid_map is not None else None
    for candidate in (mapped, entry.instance_uid):
        if candidate and candidate in outputs:
            return outputs[candidate]
    raise MissingOutput(f"no output for instance {entry.instance_uid}")


def judge_all(
    key: Sequence[AnswerKeyEntry], outputs: dict[str, DataSet], uid_map: UidMap | None
) -> list[Judgement]:
    judgements: list[Judgement] = []
    remapped: dict[str, set[str]] = defaultdict(set)
    remap_rows: list[tuple[int, str]] = []
    missing = 0

    for entry in key:
        try:
            dataset = _locate(entry, outputs, uid_map)
        except MissingOutput:
            missing += 1
            judgements.append(Judgement(entry, _series_key(None, entry), False, "missing_output"))
            continue
        element = get_path(dataset, entry.path)
        passed, detail = judge(entry, element)
        judgements.append(
            Judgement(entry, _series_key(dataset, entry), passed, "" if passed else detail)
        )
        if entry.category is Category.REMAP_UID and element is not None:
            original = entry.expected or entry.instance_uid
            remapped[original].add(_value_text(element))
            remap_rows.append((len(judgements) - 1, original))

    for index, original in remap_rows:
        observed = remapped[original]
        expected = uid_map.get(original) if uid_map is not None else None
        consistent = len(observed) == 1 and (expected is None or observed == {expected})
        if not consistent and judgements[index].passed:
            current = judgements[index]
            judgements[index] = Judgement(
                current.entry, current.series_key, False, "UID remapped inconsistently"
            )

    if missing:
        logger.warning("answer key entries without output", extra={"count": missing})
    return judgements


def aggregate(judgements: Iterable[Judgement]) -> ScoreReport:
    """Instance counts per category; a series fails a category iff any member entry fails it."""
    categories = {category: CategoryScore(category) for category in Category}
    series_state: dict[tuple[Category, str], bool] = {}
    failures: list[Judgement] = []
    for item in judgements:
        score = categories[item.entry.category]
        if item.passed:
            score.instance_pass += 1
        else:
            score.instance_fail += 1
            failures.append(item)
        key = (item.entry.category, item.series_key)
        series_state[key] = series_state.get(key, True) and item.passed
    for (category, _), passed in series_state.items():
        if passed:
            categories[category].series_pass += 1
        else:
            categories[category].series_fail += 1
    return ScoreReport(categories=categories, failures=failures)


def score(
    outputs_dir: Path,
    key: Sequence[AnswerKeyEntry],
    uid_map: UidMap | None = None,
    *,
    jobs: int = 4,
) -> ScoreReport:
    outputs = index_outputs(outputs_dir, jobs=jobs)
    report = aggregate(judge_all(key, outputs, uid_map))
    logger.info(
        "scoring complete",
        extra={"count": len(key), "status": report.overall_display},
    )
    return report
