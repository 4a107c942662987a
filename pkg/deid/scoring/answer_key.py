"""Answer key CSV: ``original_sop_instance_uid,tag_path,category,expected_or_phi_tokens``.

Tag paths such as ``(0010,0010)`` contain a comma, so an unquoted path arrives
split over several CSV fields; the loader rejoins fields until they form a
valid path.
"""

import csv
import io
from dataclasses import dataclass
from enum import StrEnum

from deid.codec.tags import ElementPath
from deid.core.errors import CsvFormatError, UnknownCategory

HEADER_FIRST_COLUMN = "original_sop_instance_uid"


class Category(StrEnum):
    REMOVE = "remove"
    RETAIN = "retain"
    REPLACE_DUMMY = "replace_dummy"
    REMAP_UID = "remap_uid"
    TEXT_REMOVE = "text_remove"
    TEXT_RETAIN = "text_retain"
    DATE_ACTION = "date_action"


@dataclass(frozen=True)
class AnswerKeyEntry:
    instance_uid: str
    path: ElementPath
    category: Category
    expected: str | None = None

    @property
    def phi_tokens(self) -> tuple[str, ...]:
        if not self.expected:
            return ()
        return tuple(token for token in self.expected.split("|") if token)


def _split_row(fields: list[str], line_number: int) -> tuple[str, ElementPath, str, str]:
    if len(fields) < 3:
        raise CsvFormatError(f"line {line_number}: expected at least 3 columns")
    for end in range(2, len(fields)):
        candidate = ",".join(fields[1:end])
        try:
            path = ElementPath.parse(candidate)
        except ValueError:
            continue
        return fields[0].strip(), path, fields[end].strip(), ",".join(fields[end + 1 :])
    raise CsvFormatError(f"line {line_number}: no valid tag path in {fields[1]!r}")


def load_answer_key(data: bytes) -> list[AnswerKeyEntry]:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"answer key is not UTF-8: {exc}") from exc

    entries: list[AnswerKeyEntry] = []
    for line_number, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not fields or all(not item.strip() for item in fields):
            continue
        if line_number == 1 and fields[0].strip().lower() == HEADER_FIRST_COLUMN:
            continue
        instance_uid, path, category, expected = _split_row(fields, line_number)
        if not instance_uid:
            raise CsvFormatError(f"line {line_number}: empty instance id")
        try:
            parsed_category = Category(category.lower())
        except ValueError as exc:
            raise UnknownCategory(f"line {line_number}: unknown category {category!r}") from exc
        entries.append(
            AnswerKeyEntry(
                instance_uid=instance_uid,
                path=path,
                category=parsed_category,
                expected=expected or None,
            )
        )
    return entries


def dump_answer_key(entries: list[AnswerKeyEntry]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([HEADER_FIRST_COLUMN, "tag_path", "category", "expected_or_phi_tokens"])
    for entry in entries:
        writer.writerow(
            [entry.instance_uid, str(entry.path), entry.category.value, entry.expected or ""]
        )
    return buffer.getvalue()
