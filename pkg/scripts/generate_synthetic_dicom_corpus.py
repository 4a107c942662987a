#!/usr/bin/env python3
"""Build a synthetic, MIDI-style benchmark corpus and its answer key.

Every patient identifier, date and free-text token is invented. The corpus
holds image series (some implicit VR with a Siemens private block), one series
per patient with a minority of slices carrying a divergent SeriesDescription
and SeriesNumber, a segmentation object referencing one image series, and a
few Secondary Capture objects that the default SOP class filter rejects.
"""

import argparse
import json
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path

from pydicom.uid import generate_uid

from deid.codec.dataset import DataElement, DataSet, DicomObject, make_element
from deid.codec.syntax import EXPLICIT_VR_LITTLE_ENDIAN, IMPLICIT_VR_LITTLE_ENDIAN
from deid.codec.tags import VR, ElementPath, Tag
from deid.codec.writer import serialize
from deid.scoring.answer_key import AnswerKeyEntry, Category, dump_answer_key

MR_IMAGE_STORAGE = "1.2.840.10008.5.1.4.1.1.4"
CT_IMAGE_STORAGE = "1.2.840.10008.5.1.4.1.1.2"
SEGMENTATION_STORAGE = "1.2.840.10008.5.1.4.1.1.66.4"
SECONDARY_CAPTURE_STORAGE = "1.2.840.10008.5.1.4.1.1.7"
IMPLEMENTATION_CLASS_UID = "2.25.302117829144736592211618425405451842612"

FIRST_NAMES = ["INGRID", "CHIDI", "MARISOL", "TOMASZ", "AKIKO", "FERGUS", "LEILANI", "OSWIN"]
LAST_NAMES = ["HALVORSEN", "OKONKWO", "VILLANUEVA", "WROBLEWSKI", "NAKAGAWA", "MACQUARRIE"]
DOCTORS = ["PEMBERTON", "ABERNATHY", "QUIGLEY", "THORNBURY", "LINDQVIST"]
STREETS = ["Elm Street", "Birch Avenue", "Harbor Road", "Quarry Lane"]
BODY_PARTS = ["CHEST", "ABDOMEN", "PELVIS", "HEAD", "KNEE"]
SERIES_LABELS = ["AX T1 POST", "SAG T2", "COR STIR", "AX DWI", "AX FLAIR"]
ADDRESS_KEYWORDS = ["street", "avenue", "road", "lane"]

SIEMENS_CREATOR = "SIEMENS CSA HEADER"
SAFE_PRIVATE_VALUE = "IMAGE NUM 4"
UNSAFE_PRIVATE_VALUE = "OPERATOR PEMBERTON"

PATIENT_NAME = Tag(0x0010, 0x0010)
PATIENT_ID = Tag(0x0010, 0x0020)
PATIENT_BIRTH_DATE = Tag(0x0010, 0x0030)
PATIENT_SEX = Tag(0x0010, 0x0040)
PATIENT_AGE = Tag(0x0010, 0x1010)
PATIENT_COMMENTS = Tag(0x0010, 0x4000)
STUDY_DATE = Tag(0x0008, 0x0020)
ACCESSION_NUMBER = Tag(0x0008, 0x0050)
INSTITUTION_NAME = Tag(0x0008, 0x0080)
REFERRING_PHYSICIAN = Tag(0x0008, 0x0090)
STUDY_DESCRIPTION = Tag(0x0008, 0x1030)
SERIES_DESCRIPTION = Tag(0x0008, 0x103E)
SOP_INSTANCE_UID = Tag(0x0008, 0x0018)
STUDY_INSTANCE_UID = Tag(0x0020, 0x000D)
SERIES_INSTANCE_UID = Tag(0x0020, 0x000E)
SERIES_NUMBER = Tag(0x0020, 0x0011)
IMAGE_COMMENTS = Tag(0x0020, 0x4000)
PRIVATE_CREATOR = Tag(0x0029, 0x0010)
SAFE_PRIVATE = Tag(0x0029, 0x1008)
UNSAFE_PRIVATE = Tag(0x0029, 0x1030)
REFERENCED_SERIES = Tag(0x0008, 0x1115)
REFERENCED_INSTANCES = Tag(0x0008, 0x114A)
REFERENCED_SOP_CLASS = Tag(0x0008, 0x1150)
REFERENCED_SOP_INSTANCE = Tag(0x0008, 0x1155)

_US = struct.Struct("<H")


@dataclass
class Patient:
    name: str
    patient_id: str
    birth_date: str
    sex: str
    age: str
    street: str
    study_uid: str
    study_date: str
    body_part: str
    year: str

    @property
    def name_tokens(self) -> list[str]:
        return self.name.split("^")


@dataclass
class Expected:
    """Pass/fail counts an untouched copy of the corpus must score."""

    identity_pass: dict[str, int] = field(default_factory=dict)
    identity_fail: dict[str, int] = field(default_factory=dict)
    planted_phi_tokens: int = 0
    address_tokens: int = 0
    instances: int = 0
    series: int = 0
    rejected: int = 0

    def tally(self, entry: AnswerKeyEntry, identity_passes: bool) -> None:
        bucket = self.identity_pass if identity_passes else self.identity_fail
        bucket[entry.category.value] = bucket.get(entry.category.value, 0) + 1


@dataclass
class Corpus:
    key: list[AnswerKeyEntry] = field(default_factory=list)
    address_key: list[AnswerKeyEntry] = field(default_factory=list)
    planted: list[str] = field(default_factory=list)
    expected: Expected = field(default_factory=Expected)

    def add(
        self,
        instance_uid: str,
        path: str,
        category: Category,
        expected: str | None,
        *,
        identity_passes: bool,
    ) -> None:
        entry = AnswerKeyEntry(instance_uid, ElementPath.parse(path), category, expected)
        self.key.append(entry)
        self.expected.tally(entry, identity_passes)


def _uid(rng_seed: int, *parts: object) -> str:
    return str(generate_uid(prefix="2.25.", entropy_srcs=[str(rng_seed), *map(str, parts)]))


def _file_meta(sop_class: str, sop_instance: str, transfer_syntax: str) -> DataSet:
    return DataSet(
        [
            make_element(Tag(0x0002, 0x0000), VR.UL, b"\x00\x00\x00\x00"),
            make_element(Tag(0x0002, 0x0001), VR.OB, b"\x00\x01"),
            make_element(Tag(0x0002, 0x0002), VR.UI, sop_class),
            make_element(Tag(0x0002, 0x0003), VR.UI, sop_instance),
            make_element(Tag(0x0002, 0x0010), VR.UI, transfer_syntax),
            make_element(Tag(0x0002, 0x0012), VR.UI, IMPLEMENTATION_CLASS_UID),
        ]
    )


def _pixels(rows: int, columns: int, seed: int) -> list[DataElement]:
    data = bytes(
        byte
        for index in range(rows * columns)
        for byte in _US.pack((index * 37 + seed) % 4096)
    )
    return [
        make_element(Tag(0x0028, 0x0002), VR.US, _US.pack(1)),
        make_element(Tag(0x0028, 0x0004), VR.CS, "MONOCHROME2"),
        make_element(Tag(0x0028, 0x0010), VR.US, _US.pack(rows)),
        make_element(Tag(0x0028, 0x0011), VR.US, _US.pack(columns)),
        make_element(Tag(0x0028, 0x0100), VR.US, _US.pack(16)),
        make_element(Tag(0x0028, 0x0101), VR.US, _US.pack(12)),
        make_element(Tag(0x0028, 0x0102), VR.US, _US.pack(11)),
        make_element(Tag(0x0028, 0x0103), VR.US, _US.pack(0)),
        make_element(Tag(0x7FE0, 0x0010), VR.OW, data),
    ]


def _make_patient(rng: random.Random, seed: int, index: int) -> Patient:
    first = FIRST_NAMES[index % len(FIRST_NAMES)]
    last = LAST_NAMES[index % len(LAST_NAMES)]
    birth_year = 1940 + rng.randrange(60)
    study_year = 2015 + rng.randrange(8)
    return Patient(
        name=f"{last}^{first}",
        patient_id=f"PID{48000 + index * 17}",
        birth_date=f"{birth_year}{rng.randrange(1, 13):02d}{rng.randrange(1, 29):02d}",
        sex=rng.choice(["F", "M"]),
        age=f"{study_year - birth_year:03d}Y",
        street=f"{rng.randrange(10, 999)} {rng.choice(STREETS)}",
        study_uid=_uid(seed, "study", index),
        study_date=f"{study_year}{rng.randrange(1, 13):02d}{rng.randrange(1, 29):02d}",
        body_part=BODY_PARTS[index % len(BODY_PARTS)],
        year=str(birth_year + rng.randrange(10, 40)),
    )


def _image(
    corpus: Corpus,
    rng: random.Random,
    seed: int,
    patient: Patient,
    *,
    series_uid: str,
    series_label: str,
    series_number: str,
    instance_index: int,
    corrupt: bool,
    implicit: bool,
    sop_class: str,
) -> tuple[str, DicomObject]:
    sop_uid = _uid(seed, series_uid, instance_index)
    doctor = rng.choice(DOCTORS)
    # prior-scan dates sit in the 1990s, well clear of the (shifted) study dates
    scan_date = f"199{rng.randrange(10)}{rng.randrange(1, 13):02d}{rng.randrange(1, 29):02d}"
    digits = "".join(str(rng.randrange(10)) for _ in range(10))
    comments = (
        f"{patient.name_tokens[0]} {patient.name_tokens[1]} seen {scan_date} "
        f"id {digits} referred by Dr {doctor}"
    )
    phi = [*patient.name_tokens, scan_date, digits, doctor]
    corpus.planted.extend(phi)
    corpus.expected.planted_phi_tokens += len(phi) + 1

    description = series_label
    number = series_number
    if corrupt:
        description = f"{series_label} {patient.name_tokens[0]}"
        number = "99"

    elements = [
        make_element(Tag(0x0008, 0x0005), VR.CS, "ISO_IR 100"),
        make_element(Tag(0x0008, 0x0016), VR.UI, sop_class),
        make_element(SOP_INSTANCE_UID, VR.UI, sop_uid),
        make_element(STUDY_DATE, VR.DA, patient.study_date),
        make_element(Tag(0x0008, 0x0060), VR.CS, "MR" if sop_class == MR_IMAGE_STORAGE else "CT"),
        make_element(ACCESSION_NUMBER, VR.SH, f"ACC{rng.randrange(10**6):06d}"),
        make_element(INSTITUTION_NAME, VR.LO, "NORTHFIELD GENERAL"),
        make_element(REFERRING_PHYSICIAN, VR.PN, f"{doctor}^ALEX"),
        make_element(
            STUDY_DESCRIPTION, VR.LO, f"{patient.body_part} SURVEY since {patient.year}"
        ),
        make_element(SERIES_DESCRIPTION, VR.LO, description),
        make_element(PATIENT_NAME, VR.PN, patient.name),
        make_element(PATIENT_ID, VR.LO, patient.patient_id),
        make_element(PATIENT_BIRTH_DATE, VR.DA, patient.birth_date),
        make_element(PATIENT_SEX, VR.CS, patient.sex),
        make_element(PATIENT_AGE, VR.AS, patient.age),
        make_element(PATIENT_COMMENTS, VR.LT, f"Home {patient.street} Springfield"),
        make_element(STUDY_INSTANCE_UID, VR.UI, patient.study_uid),
        make_element(SERIES_INSTANCE_UID, VR.UI, series_uid),
        make_element(SERIES_NUMBER, VR.IS, number),
        make_element(Tag(0x0020, 0x0013), VR.IS, str(instance_index + 1)),
        make_element(IMAGE_COMMENTS, VR.LT, comments),
        *_pixels(8, 8, instance_index),
    ]
    if implicit:
        elements += [
            make_element(PRIVATE_CREATOR, VR.LO, SIEMENS_CREATOR),
            make_element(SAFE_PRIVATE, VR.CS, SAFE_PRIVATE_VALUE),
            make_element(UNSAFE_PRIVATE, VR.LO, UNSAFE_PRIVATE_VALUE),
        ]

    add = corpus.add
    for tag in (PATIENT_NAME, PATIENT_ID, PATIENT_BIRTH_DATE, ACCESSION_NUMBER):
        add(sop_uid, str(tag), Category.REMOVE, None, identity_passes=False)
    add(sop_uid, str(REFERRING_PHYSICIAN), Category.REMOVE, None, identity_passes=False)
    add(sop_uid, str(INSTITUTION_NAME), Category.REMOVE, None, identity_passes=False)
    add(sop_uid, str(PATIENT_SEX), Category.RETAIN, patient.sex, identity_passes=True)
    add(sop_uid, str(PATIENT_AGE), Category.RETAIN, patient.age, identity_passes=True)
    add(sop_uid, str(STUDY_DATE), Category.DATE_ACTION, patient.study_date, identity_passes=False)
    add(sop_uid, str(SOP_INSTANCE_UID), Category.REMAP_UID, sop_uid, identity_passes=False)
    add(sop_uid, str(SERIES_INSTANCE_UID), Category.REMAP_UID, series_uid, identity_passes=False)
    add(
        sop_uid, str(STUDY_INSTANCE_UID), Category.REMAP_UID, patient.study_uid,
        identity_passes=False,
    )
    add(sop_uid, str(IMAGE_COMMENTS), Category.TEXT_REMOVE, "|".join(phi), identity_passes=False)
    add(sop_uid, str(STUDY_DESCRIPTION), Category.TEXT_REMOVE, patient.year, identity_passes=False)
    add(
        sop_uid, str(STUDY_DESCRIPTION), Category.TEXT_RETAIN, f"{patient.body_part} SURVEY",
        identity_passes=True,
    )
    add(sop_uid, str(SERIES_DESCRIPTION), Category.TEXT_RETAIN, series_label, identity_passes=True)
    add(sop_uid, str(SERIES_NUMBER), Category.RETAIN, series_number, identity_passes=not corrupt)
    if corrupt:
        add(
            sop_uid, str(SERIES_DESCRIPTION), Category.TEXT_REMOVE, patient.name_tokens[0],
            identity_passes=False,
        )
        corpus.expected.planted_phi_tokens += 1
        corpus.planted.append(patient.name_tokens[0])
    if implicit:
        add(sop_uid, str(SAFE_PRIVATE), Category.RETAIN, SAFE_PRIVATE_VALUE, identity_passes=True)
        add(sop_uid, str(UNSAFE_PRIVATE), Category.REMOVE, None, identity_passes=False)

    street_words = patient.street.split(" ", 1)[1]
    corpus.address_key.append(
        AnswerKeyEntry(
            sop_uid, ElementPath.of(PATIENT_COMMENTS), Category.TEXT_REMOVE, street_words
        )
    )
    corpus.expected.address_tokens += 1

    syntax = IMPLICIT_VR_LITTLE_ENDIAN if implicit else EXPLICIT_VR_LITTLE_ENDIAN
    obj = DicomObject(
        file_meta=_file_meta(sop_class, sop_uid, syntax),
        dataset=DataSet(elements, charset="ISO_IR 100"),
        transfer_syntax=syntax,
    )
    return sop_uid, obj


def _segmentation(
    corpus: Corpus,
    seed: int,
    patient: Patient,
    referenced_series: str,
    referenced: list[tuple[str, str]],
) -> DicomObject:
    sop_uid = _uid(seed, "seg", referenced_series)
    series_uid = _uid(seed, "seg-series", referenced_series)
    instance_items = [
        DataSet(
            [
                make_element(REFERENCED_SOP_CLASS, VR.UI, sop_class),
                make_element(REFERENCED_SOP_INSTANCE, VR.UI, instance_uid),
            ]
        )
        for sop_class, instance_uid in referenced
    ]
    series_item = DataSet(
        [
            make_element(REFERENCED_INSTANCES, VR.SQ, instance_items),
            make_element(SERIES_INSTANCE_UID, VR.UI, referenced_series),
        ]
    )
    elements = [
        make_element(Tag(0x0008, 0x0016), VR.UI, SEGMENTATION_STORAGE),
        make_element(SOP_INSTANCE_UID, VR.UI, sop_uid),
        make_element(Tag(0x0008, 0x0060), VR.CS, "SEG"),
        make_element(REFERENCED_SERIES, VR.SQ, [series_item]),
        make_element(PATIENT_NAME, VR.PN, patient.name),
        make_element(PATIENT_ID, VR.LO, patient.patient_id),
        make_element(STUDY_INSTANCE_UID, VR.UI, patient.study_uid),
        make_element(SERIES_INSTANCE_UID, VR.UI, series_uid),
        make_element(SERIES_NUMBER, VR.IS, "300"),
    ]
    add = corpus.add
    add(sop_uid, str(PATIENT_NAME), Category.REMOVE, None, identity_passes=False)
    add(sop_uid, str(SOP_INSTANCE_UID), Category.REMAP_UID, sop_uid, identity_passes=False)
    add(sop_uid, str(SERIES_INSTANCE_UID), Category.REMAP_UID, series_uid, identity_passes=False)
    add(
        sop_uid, f"{REFERENCED_SERIES}[0].{SERIES_INSTANCE_UID}", Category.REMAP_UID,
        referenced_series, identity_passes=False,
    )
    for index, (_, instance_uid) in enumerate(referenced):
        add(
            sop_uid,
            f"{REFERENCED_SERIES}[0].{REFERENCED_INSTANCES}[{index}].{REFERENCED_SOP_INSTANCE}",
            Category.REMAP_UID,
            instance_uid,
            identity_passes=False,
        )
    return DicomObject(
        file_meta=_file_meta(SEGMENTATION_STORAGE, sop_uid, EXPLICIT_VR_LITTLE_ENDIAN),
        dataset=DataSet(elements),
        transfer_syntax=EXPLICIT_VR_LITTLE_ENDIAN,
    )


def _secondary_capture(seed: int, patient: Patient, index: int) -> DicomObject:
    sop_uid = _uid(seed, "sc", index)
    elements = [
        make_element(Tag(0x0008, 0x0016), VR.UI, SECONDARY_CAPTURE_STORAGE),
        make_element(SOP_INSTANCE_UID, VR.UI, sop_uid),
        make_element(PATIENT_NAME, VR.PN, patient.name),
        make_element(STUDY_INSTANCE_UID, VR.UI, patient.study_uid),
        make_element(SERIES_INSTANCE_UID, VR.UI, _uid(seed, "sc-series", index)),
        *_pixels(8, 8, index),
    ]
    return DicomObject(
        file_meta=_file_meta(SECONDARY_CAPTURE_STORAGE, sop_uid, EXPLICIT_VR_LITTLE_ENDIAN),
        dataset=DataSet(elements),
        transfer_syntax=EXPLICIT_VR_LITTLE_ENDIAN,
    )


def generate_corpus(
    output_dir: Path,
    *,
    series_count: int = 20,
    instances_per_series: int = 10,
    corrupted_per_series: int = 1,
    seed: int = 7,
) -> Corpus:
    """Write ``input/`` plus ``answer_key.csv``, ``answer_key_address.csv``, ``expected.json``."""
    rng = random.Random(seed)
    corpus = Corpus()
    input_dir = output_dir / "input"
    input_dir.mkdir(parents=True, exist_ok=True)

    first_series: tuple[Patient, str, list[tuple[str, str]]] | None = None
    for series_index in range(series_count):
        patient = _make_patient(rng, seed, series_index)
        series_uid = _uid(seed, "series", series_index)
        implicit = series_index % 4 == 3
        sop_class = MR_IMAGE_STORAGE if series_index % 2 == 0 else CT_IMAGE_STORAGE
        label = SERIES_LABELS[series_index % len(SERIES_LABELS)]
        corrupt_slots = set(
            range(instances_per_series - corrupted_per_series, instances_per_series)
        )
        referenced: list[tuple[str, str]] = []
        for instance_index in range(instances_per_series):
            sop_uid, obj = _image(
                corpus,
                rng,
                seed,
                patient,
                series_uid=series_uid,
                series_label=label,
                series_number=str(series_index + 1),
                instance_index=instance_index,
                corrupt=instance_index in corrupt_slots,
                implicit=implicit,
                sop_class=sop_class,
            )
            referenced.append((sop_class, sop_uid))
            path = input_dir / f"patient{series_index:02d}" / f"IMG{instance_index:04d}.dcm"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(serialize(obj))
            corpus.expected.instances += 1
        corpus.expected.series += 1
        if first_series is None:
            first_series = (patient, series_uid, referenced)

    if first_series is not None:
        patient, series_uid, referenced = first_series
        seg = _segmentation(corpus, seed, patient, series_uid, referenced)
        (input_dir / "patient00" / "SEG0001.dcm").write_bytes(serialize(seg))
        corpus.expected.instances += 1
        corpus.expected.series += 1
        for index in range(2):
            capture = _secondary_capture(seed, patient, index)
            (input_dir / "patient00" / f"SC{index:04d}.dcm").write_bytes(serialize(capture))
            corpus.expected.rejected += 1

    (output_dir / "answer_key.csv").write_text(dump_answer_key(corpus.key), encoding="utf-8")
    (output_dir / "answer_key_address.csv").write_text(
        dump_answer_key(corpus.address_key), encoding="utf-8"
    )
    (output_dir / "planted_tokens.txt").write_text(
        "\n".join(sorted(set(corpus.planted))) + "\n", encoding="utf-8"
    )
    expected = corpus.expected
    (output_dir / "expected.json").write_text(
        json.dumps(
            {
                "instances": expected.instances,
                "series": expected.series,
                "rejected": expected.rejected,
                "planted_phi_tokens": expected.planted_phi_tokens,
                "address_tokens": expected.address_tokens,
                "key_entries": len(corpus.key),
                "identity_pass": expected.identity_pass,
                "identity_fail": expected.identity_fail,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return corpus


def main() -> None:
    parser = argparse.ArgumentParser(description="Generate a synthetic DICOM benchmark corpus")
    parser.add_argument(
        "--output-dir",
        default="benchmarks/data/synthetic_dicom",
        help="Output directory for the corpus and answer key",
    )
    parser.add_argument("--series", type=int, default=20)
    parser.add_argument("--instances", type=int, default=10)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    corpus = generate_corpus(
        Path(args.output_dir),
        series_count=args.series,
        instances_per_series=args.instances,
        seed=args.seed,
    )
    print(
        f"Generated {corpus.expected.instances} instances, "
        f"{len(corpus.key)} key entries in {args.output_dir}"
    )


if __name__ == "__main__":
    main()
