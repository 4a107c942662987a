"""Type-likeness policy and Type 2 insertion list loaders."""

from importlib import resources

from deid.codec.tags import Tag
from deid.core.errors import ActionTableParseError


def _data_text(name: str) -> str:
    return resources.files("deid.dictionary").joinpath(f"data/{name}").read_text("utf-8")


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines: list[tuple[int, str]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        body = line.partition("#")[0].strip()
        if body:
            lines.append((line_number, body))
    return lines


def load_type_policy(text: str) -> dict[Tag, int]:
    policy: dict[Tag, int] = {}
    for line_number, body in _content_lines(text):
        tag_text, sep, type_text = body.partition(";")
        try:
            tag = Tag.parse(tag_text)
            attribute_type = int(type_text)
        except ValueError as exc:
            raise ActionTableParseError(line_number, f"bad policy line {body!r}") from exc
        if not sep or attribute_type not in (1, 2, 3):
            raise ActionTableParseError(line_number, f"type must be 1, 2 or 3 in {body!r}")
        policy[tag] = attribute_type
    return policy


def load_required_type2(text: str) -> list[Tag]:
    required: list[Tag] = []
    for line_number, body in _content_lines(text):
        try:
            required.append(Tag.parse(body))
        except ValueError as exc:
            raise ActionTableParseError(line_number, str(exc)) from exc
    return required


def default_type_policy() -> dict[Tag, int]:
    return load_type_policy(_data_text("type_policy.txt"))


def default_required_type2() -> list[Tag]:
    return load_required_type2(_data_text("type2_required.txt"))
