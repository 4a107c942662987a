from deid.codec.dataset import (
    DataElement,
    DataSet,
    DicomObject,
    delete_element,
    get_path,
    make_element,
    set_element,
    walk,
)
from deid.codec.reader import parse_dataset, parse_file
from deid.codec.syntax import ParseLimits
from deid.codec.tags import VR, ElementPath, Tag
from deid.codec.validation import ValidationIssue, validate_dataset
from deid.codec.writer import serialize, serialize_dataset

__all__ = [
    "VR",
    "DataElement",
    "DataSet",
    "DicomObject",
    "ElementPath",
    "ParseLimits",
    "Tag",
    "ValidationIssue",
    "delete_element",
    "get_path",
    "make_element",
    "parse_dataset",
    "parse_file",
    "serialize",
    "serialize_dataset",
    "set_element",
    "validate_dataset",
    "walk",
]
