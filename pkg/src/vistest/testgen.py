"""Test cases, suites, manifest I/O, and suite generation.

A test case pairs an image with the output the system under test must
produce for it.  From an initial suite and a list of modifications, two
derived suites are generated:

* the *similar* suite keeps each source case's expectation for every
  modification classified as similarity-preserving, and
* the *severe* suite expects the distinguished error outcome for every
  modification classified as severe.

Suites are stored as JSON manifests; the exact field names below are
normative (see README).  Image paths inside a manifest are relative to the
manifest's directory; in memory they are always absolute.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Union

import jsonschema

from . import modifiers
from .errors import EmptyModificationListError, SchemaViolationError
from .image import load_image, save_image
from .modifiers import Modification

log = logging.getLogger("vistest")

SUITE_KINDS = ("initial", "similar", "severe")
TASKS = ("classification", "detection")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Classification:
    """A single class label."""

    label: str


@dataclass(frozen=True)
class DetectionBox:
    """An expected object: label plus ``[x, y, w, h]`` box in pixels."""

    label: str
    bbox: tuple[int, int, int, int]

    def validate(self) -> None:
        x, y, w, h = self.bbox
        if x < 0 or y < 0:
            raise SchemaViolationError("bbox coordinates must be non-negative")
        if w <= 0 or h <= 0:
            raise SchemaViolationError("bbox width and height must be positive")


@dataclass(frozen=True)
class ExpectedDetections:
    """A set of expected objects."""

    boxes: tuple[DetectionBox, ...]


@dataclass(frozen=True)
class Err:
    """The distinguished expectation: the system must signal a problem."""


ERR = Err()
ExpectedOutput = Union[Classification, ExpectedDetections, Err]


@dataclass(frozen=True)
class Provenance:
    """Where a generated case came from: source case and the modification
    applied to its image."""

    source_id: str
    source_image: str
    modification: Modification


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # domain class, not a pytest collectable

    id: str
    image: str
    expected: ExpectedOutput
    provenance: Provenance | None = None


@dataclass(frozen=True)
class TestSuite:
    """A set of test cases of one kind for one task.

    A suite is normally non-empty; generation may legitimately produce an
    empty side (for example when every modification is severe), which is
    representable and savable but rejected by the runner.
    """

    __test__ = False  # domain class, not a pytest collectable

    kind: str
    task: str
    cases: tuple[TestCase, ...]

    def validate(self) -> None:
        if self.kind not in SUITE_KINDS:
            raise SchemaViolationError(f"kind must be one of {SUITE_KINDS}", "/kind")
        if self.task not in TASKS:
            raise SchemaViolationError(f"task must be one of {TASKS}", "/task")
        seen: set[str] = set()
        for i, case in enumerate(self.cases):
            if case.id in seen:
                raise SchemaViolationError(f"duplicate test case id {case.id!r}", f"/cases/{i}/id")
            seen.add(case.id)
            ptr = f"/cases/{i}/expected"
            if self.kind == "severe":
                if not isinstance(case.expected, Err):
                    raise SchemaViolationError("severe suites must expect err everywhere", ptr)
            elif isinstance(case.expected, Err):
                raise SchemaViolationError(f"err expectation not allowed in {self.kind} suite", ptr)
            elif self.task == "classification" and not isinstance(case.expected, Classification):
                raise SchemaViolationError("classification suites need classification labels", ptr)
            elif self.task == "detection" and not isinstance(case.expected, ExpectedDetections):
                raise SchemaViolationError("detection suites need detection boxes", ptr)
            if isinstance(case.expected, ExpectedDetections):
                for box in case.expected.boxes:
                    box.validate()
            if (case.provenance is not None) != (self.kind != "initial"):
                raise SchemaViolationError(
                    "provenance must be present exactly on generated cases",
                    f"/cases/{i}/provenance",
                )


# ---------------------------------------------------------------------------
# Suite generation


def generate_suites(
    initial: TestSuite,
    mods: list[Modification],
    out_dir: str | os.PathLike,
) -> tuple[TestSuite, TestSuite]:
    """Apply every modification to every initial case.

    Similarity-preserving modifications contribute ``(modified image, same
    expectation)`` cases to the similar suite; severe ones contribute
    ``(modified image, err)`` cases to the severe suite, so the two sides
    always partition ``len(initial.cases) * len(mods)`` generated cases.

    Modified images are written under ``out_dir`` as
    ``{source_id}__{op}__{seed}.png`` (a ``-N`` suffix disambiguates repeated
    triples).  Case order is source order crossed with modification order,
    regardless of how the work is executed.
    """
    initial.validate()
    if initial.kind != "initial":
        raise SchemaViolationError(f"expected an initial suite, got kind {initial.kind!r}", "/kind")
    if not initial.cases:
        raise SchemaViolationError("initial suite has no cases", "/cases")
    if not mods:
        raise EmptyModificationListError("modification list is empty")
    for mod in mods:
        mod.validate()
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)

    similar: list[TestCase] = []
    severe: list[TestCase] = []
    name_counts: dict[str, int] = {}
    for case in initial.cases:
        source = load_image(case.image)
        for mod in mods:
            base = f"{case.id}__{mod.op}__{mod.seed}"
            count = name_counts.get(base, 0)
            name_counts[base] = count + 1
            case_id = base if count == 0 else f"{base}-{count + 1}"
            image_path = os.path.abspath(os.path.join(out_dir, case_id + ".png"))
            save_image(modifiers.apply(mod, source), image_path)
            provenance = Provenance(
                source_id=case.id,
                source_image=os.path.abspath(case.image),
                modification=mod,
            )
            if mod.sim:
                similar.append(
                    TestCase(case_id, image_path, expected=case.expected, provenance=provenance)
                )
            else:
                severe.append(TestCase(case_id, image_path, expected=ERR, provenance=provenance))

    if not similar:
        log.warning("no similarity-preserving modifications: similar suite is empty")
    if not severe:
        log.warning("no severe modifications: severe suite is empty")
    similar_suite = TestSuite(kind="similar", task=initial.task, cases=tuple(similar))
    severe_suite = TestSuite(kind="severe", task=initial.task, cases=tuple(severe))
    similar_suite.validate()
    severe_suite.validate()
    return similar_suite, severe_suite


# ---------------------------------------------------------------------------
# Manifest serialization

_BBOX_SCHEMA = {
    "type": "array",
    "items": {"type": "integer"},
    "minItems": 4,
    "maxItems": 4,
}

MANIFEST_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema", "kind", "task", "cases"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(SUITE_KINDS)},
        "task": {"enum": list(TASKS)},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "image", "expected"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "image": {"type": "string", "minLength": 1},
                    "expected": {
                        "type": "object",
                        "required": ["type"],
                        "oneOf": [
                            {
                                "properties": {
                                    "type": {"const": "classification"},
                                    "label": {"type": "string"},
                                },
                                "required": ["type", "label"],
                                "additionalProperties": False,
                            },
                            {
                                "properties": {
                                    "type": {"const": "detections"},
                                    "boxes": {
                                        "type": "array",
                                        "items": {
                                            "type": "object",
                                            "required": ["label", "bbox"],
                                            "additionalProperties": False,
                                            "properties": {
                                                "label": {"type": "string"},
                                                "bbox": _BBOX_SCHEMA,
                                            },
                                        },
                                    },
                                },
                                "required": ["type", "boxes"],
                                "additionalProperties": False,
                            },
                            {
                                "properties": {"type": {"const": "err"}},
                                "required": ["type"],
                                "additionalProperties": False,
                            },
                        ],
                    },
                    "provenance": {
                        "type": "object",
                        "required": ["source_id", "source_image", "modification"],
                        "additionalProperties": False,
                        "properties": {
                            "source_id": {"type": "string"},
                            "source_image": {"type": "string"},
                            "modification": {
                                "type": "object",
                                "required": ["op", "params", "seed", "sim"],
                                "additionalProperties": False,
                                "properties": {
                                    "op": {"type": "string"},
                                    "params": {"type": "object"},
                                    "seed": {"type": "integer", "minimum": 0},
                                    "sim": {"type": "boolean"},
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(MANIFEST_SCHEMA)


def _expected_to_json(expected: ExpectedOutput) -> dict[str, Any]:
    if isinstance(expected, Classification):
        return {"type": "classification", "label": expected.label}
    if isinstance(expected, ExpectedDetections):
        return {
            "type": "detections",
            "boxes": [{"label": b.label, "bbox": list(b.bbox)} for b in expected.boxes],
        }
    return {"type": "err"}


def _expected_from_json(obj: dict[str, Any]) -> ExpectedOutput:
    if obj["type"] == "classification":
        return Classification(label=obj["label"])
    if obj["type"] == "detections":
        return ExpectedDetections(
            boxes=tuple(DetectionBox(label=b["label"], bbox=tuple(b["bbox"])) for b in obj["boxes"])
        )
    return ERR


def _relativize(path: str, base: str) -> str:
    return os.path.relpath(path, base).replace(os.sep, "/")


def save_suite(suite: TestSuite, path: str | os.PathLike) -> None:
    """Write a suite manifest; image paths are stored relative to it."""
    suite.validate()
    path = os.fspath(path)
    base = os.path.dirname(os.path.abspath(path)) or "."
    cases = []
    for case in suite.cases:
        entry: dict[str, Any] = {
            "id": case.id,
            "image": _relativize(os.path.abspath(case.image), base),
            "expected": _expected_to_json(case.expected),
        }
        if case.provenance is not None:
            entry["provenance"] = {
                "source_id": case.provenance.source_id,
                "source_image": _relativize(os.path.abspath(case.provenance.source_image), base),
                "modification": case.provenance.modification.to_json(),
            }
        cases.append(entry)
    doc = {"schema": SCHEMA_VERSION, "kind": suite.kind, "task": suite.task, "cases": cases}
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_suite(path: str | os.PathLike) -> TestSuite:
    """Load and validate a suite manifest.

    Schema violations carry a JSON pointer to the offending field.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"not valid JSON: {exc}") from exc
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if error is not None:
        pointer = "/" + "/".join(str(p) for p in error.absolute_path)
        raise SchemaViolationError(error.message, pointer)
    base = os.path.dirname(os.path.abspath(path)) or "."

    def absolutize(rel: str) -> str:
        return os.path.normpath(os.path.join(base, rel))

    cases = []
    for i, entry in enumerate(doc["cases"]):
        provenance = None
        if "provenance" in entry:
            prov = entry["provenance"]
            try:
                mod = Modification.from_json(prov["modification"])
            except Exception as exc:
                raise SchemaViolationError(str(exc), f"/cases/{i}/provenance/modification") from exc
            provenance = Provenance(
                source_id=prov["source_id"],
                source_image=absolutize(prov["source_image"]),
                modification=mod,
            )
        cases.append(
            TestCase(
                id=entry["id"],
                image=absolutize(entry["image"]),
                expected=_expected_from_json(entry["expected"]),
                provenance=provenance,
            )
        )
    suite = TestSuite(kind=doc["kind"], task=doc["task"], cases=tuple(cases))
    suite.validate()
    return suite


def load_modifications(path: str | os.PathLike, pixel_count: int | None = None) -> list[Modification]:
    """Load a JSON array of modification records.

    Entries may omit ``sim``; the default classification table then decides,
    using ``pixel_count`` as the image-size context where needed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaViolationError("modification file must be a JSON array", "/")
    mods = []
    for i, entry in enumerate(doc):
        try:
            mods.append(Modification.from_json(entry, pixel_count=pixel_count))
        except SchemaViolationError:
            raise
        except Exception as exc:
            raise SchemaViolationError(str(exc), f"/{i}") from exc
    return mods
