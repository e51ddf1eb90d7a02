"""Driving a system under test and judging its answers.

A system under test is a total function from images to outcomes: either an
analysis result (a label or a set of detections) or a behavioral outcome
such as an error message or a crash.  ``query`` never raises -- crashes,
timeouts, and protocol violations all come back as :class:`SutError` values,
because they are legitimate observable outcomes to record and judge.

The built-in mock detector finds pure-ish red/green/blue rectangles and
reports a ``dark_frame`` error for nearly black frames, which makes the whole
pipeline testable end to end without any ML dependency.
"""

from __future__ import annotations

import os
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

import numpy as np
from scipy import ndimage

from . import protocol
from .errors import TaskMismatchError
from .image import Image, load_image, mean_luminance
from .testgen import Classification, Err, ExpectedDetections, ExpectedOutput

# Mock detector tuning: frames darker than this mean luma are reported as
# errors; a color mask needs its dominant channel >= 200 with the other two
# <= 80; components smaller than 25 px are noise.
DARK_FRAME_LUMA = 10.0
MASK_DOMINANT_MIN = 200
MASK_OTHER_MAX = 80
MIN_COMPONENT_AREA = 25

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class Detection:
    """One detected object: label, confidence, and ``[x, y, w, h]`` box."""

    label: str
    score: float
    bbox: tuple[float, float, float, float]


@dataclass(frozen=True)
class Detections:
    items: tuple[Detection, ...]


@dataclass(frozen=True)
class SutError:
    """A behavioral outcome: error message, crash, timeout, protocol fault."""

    message: str


SutOutput = Union[Classification, Detections, SutError]


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


# ---------------------------------------------------------------------------
# Output comparison


def iou(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    """Intersection over union of two ``[x, y, w, h]`` boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def compare_outputs(
    expected: ExpectedOutput,
    actual: SutOutput,
    task: str,
    iou_threshold: float = 0.5,
) -> Verdict:
    """Judge an observed output against an expectation.

    * err expectation: passes for any :class:`SutError`.
    * classification: passes iff the labels match exactly.
    * detections: passes iff a greedy highest-IoU matching (ties broken by
      expected-list order, then actual-list order) pairs every expected box
      with a distinct same-label actual box at IoU >= threshold, leaving no
      actual box unmatched.  The verdict does not depend on the order of the
      actual detections.
    """
    if isinstance(expected, Err):
        return Verdict.PASS if isinstance(actual, SutError) else Verdict.FAIL
    if isinstance(expected, Classification):
        if task != "classification":
            raise TaskMismatchError("classification expectation in a detection task")
        if isinstance(actual, Classification):
            return Verdict.PASS if actual.label == expected.label else Verdict.FAIL
        return Verdict.FAIL
    if isinstance(expected, ExpectedDetections):
        if task != "detection":
            raise TaskMismatchError("detection expectation in a classification task")
        if not isinstance(actual, Detections):
            return Verdict.FAIL
        return _match_detections(expected, actual, iou_threshold)
    raise TaskMismatchError(f"unsupported expectation {type(expected).__name__}")


def _match_detections(
    expected: ExpectedDetections, actual: Detections, iou_threshold: float
) -> Verdict:
    if len(expected.boxes) != len(actual.items):
        return Verdict.FAIL
    candidates = []
    for ei, ebox in enumerate(expected.boxes):
        for ai, item in enumerate(actual.items):
            if item.label != ebox.label:
                continue
            overlap = iou(tuple(map(float, ebox.bbox)), item.bbox)
            if overlap >= iou_threshold:
                candidates.append((-overlap, ei, ai))
    candidates.sort()
    matched_e: set[int] = set()
    matched_a: set[int] = set()
    for _, ei, ai in candidates:
        if ei not in matched_e and ai not in matched_a:
            matched_e.add(ei)
            matched_a.add(ai)
    ok = len(matched_e) == len(expected.boxes)
    return Verdict.PASS if ok else Verdict.FAIL


# ---------------------------------------------------------------------------
# Built-in mock detector


def mock_detect(img: Image) -> SutOutput:
    """Deterministic color-blob detector.

    Nearly black frames (mean luma below 10) are answered with a
    ``dark_frame`` error, modeling a dead light source in the capture rig.
    Otherwise connected components (4-connectivity) of pure-ish red, green,
    and blue pixels with area >= 25 become detections with score 1.0 and a
    tight bounding box, ordered by (label, y, x).
    """
    if mean_luminance(img) < DARK_FRAME_LUMA:
        return SutError("dark_frame")
    p = img.pixels.astype(np.int16)
    items: list[Detection] = []
    for label, channel in (("red", 0), ("green", 1), ("blue", 2)):
        others = [c for c in range(3) if c != channel]
        mask = (
            (p[:, :, channel] >= MASK_DOMINANT_MIN)
            & (p[:, :, others[0]] <= MASK_OTHER_MAX)
            & (p[:, :, others[1]] <= MASK_OTHER_MAX)
        )
        labeled, _count = ndimage.label(mask, structure=_FOUR_CONNECTED)
        for component, slc in enumerate(ndimage.find_objects(labeled), start=1):
            if slc is None:
                continue
            # a slice can contain pixels of a neighboring component; count
            # only the component that defined it
            area = int(np.sum(labeled[slc] == component))
            if area < MIN_COMPONENT_AREA:
                continue
            y0, y1 = slc[0].start, slc[0].stop
            x0, x1 = slc[1].start, slc[1].stop
            items.append(
                Detection(label=label, score=1.0, bbox=(float(x0), float(y0), float(x1 - x0), float(y1 - y0)))
            )
    items.sort(key=lambda d: (d.label, d.bbox[1], d.bbox[0]))
    return Detections(items=tuple(items))


def mock_handler(image_path: str, task: str) -> dict[str, Any]:
    """Protocol handler wrapping :func:`mock_detect` (detection task only)."""
    if task != "detection":
        return {"status": "err", "message": f"unsupported task: {task}"}
    try:
        img = load_image(image_path)
    except Exception:
        raise ValueError(f"cannot read image: {image_path}") from None
    return output_to_payload(mock_detect(img))


def output_to_payload(output: SutOutput) -> dict[str, Any]:
    """Convert an output value to its wire payload."""
    if isinstance(output, Classification):
        return {"status": "ok", "label": output.label}
    if isinstance(output, Detections):
        return {
            "status": "ok",
            "detections": [
                {"label": d.label, "score": d.score, "bbox": [_plain(v) for v in d.bbox]}
                for d in output.items
            ],
        }
    return {"status": "err", "message": output.message}


def _plain(v: float) -> int | float:
    return int(v) if float(v).is_integer() else float(v)


def _payload_to_output(obj: dict[str, Any]) -> SutOutput:
    if obj["status"] == "err":
        return SutError(obj["message"])
    if "label" in obj:
        return Classification(label=obj["label"])
    return Detections(
        items=tuple(
            Detection(label=d["label"], score=float(d["score"]), bbox=tuple(float(v) for v in d["bbox"]))
            for d in obj["detections"]
        )
    )


# ---------------------------------------------------------------------------
# Adapters


@dataclass(frozen=True)
class SutAdapter:
    """Configuration for an external adapter process."""

    command: tuple[str, ...]
    timeout_ms: int = 30000
    working_dir: str | None = None

    @classmethod
    def from_command_line(cls, command: str, timeout_ms: int = 30000) -> "SutAdapter":
        return cls(command=tuple(shlex.split(command)), timeout_ms=timeout_ms)

    def connect(self) -> "SutConnection":
        return SutConnection(self)


class MockSut:
    """In-process stand-in for an external system, backed by mock_detect."""

    def connect(self) -> "MockConnection":
        return MockConnection()


class MockConnection:
    def query(self, image_path: str, task: str = "detection") -> SutOutput:
        try:
            payload = mock_handler(image_path, task)
        except Exception as exc:  # mirror the serve loop's handler contract
            payload = {"status": "err", "message": f"handler: {exc}"}
        return _payload_to_output(payload)

    def close(self) -> None:
        pass


class SutConnection:
    """One live adapter process with strict request/response alternation.

    Never raises from :meth:`query`: every failure mode maps to a
    :class:`SutError` whose message starts with ``crash:``, ``timeout:`` or
    ``protocol:``.  After such a failure the child is discarded and a fresh
    process is started on the next query.
    """

    def __init__(self, adapter: SutAdapter):
        self._adapter = adapter
        self._proc: subprocess.Popen[str] | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._next_id = 1

    def _start(self) -> None:
        self._lines = queue.Queue()
        self._proc = subprocess.Popen(
            list(self._adapter.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=None,  # diagnostics pass through to our stderr
            cwd=self._adapter.working_dir,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        thread = threading.Thread(target=self._pump, args=(self._proc, self._lines), daemon=True)
        thread.start()

    @staticmethod
    def _pump(proc: subprocess.Popen, sink: queue.Queue) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            sink.put(line)
        sink.put(None)

    def _discard(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def query(self, image_path: str, task: str = "detection") -> SutOutput:
        if self._proc is None or self._proc.poll() is not None:
            self._discard()
            try:
                self._start()
            except OSError as exc:
                self._proc = None
                return SutError(f"crash: cannot start adapter: {exc}")
        assert self._proc is not None and self._proc.stdin is not None
        req_id = self._next_id
        self._next_id += 1
        request = protocol.format_request(req_id, os.path.abspath(image_path), task)
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self._proc.poll()
            self._discard()
            return SutError(f"crash: adapter closed its input (exit code {code})")
        try:
            line = self._lines.get(timeout=self._adapter.timeout_ms / 1000.0)
        except queue.Empty:
            self._discard()
            return SutError(f"timeout: no response within {self._adapter.timeout_ms} ms")
        if line is None:
            code = self._proc.poll()
            self._discard()
            return SutError(f"crash: adapter exited (code {code}) without responding")
        try:
            response = protocol.parse_response(line.rstrip("\n"))
        except ValueError as exc:
            self._discard()
            return SutError(f"protocol: {exc}")
        if response["id"] != req_id:
            self._discard()
            return SutError(f"protocol: response id {response['id']} does not match request id {req_id}")
        return _payload_to_output(response)

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()
            self._proc.wait()
        self._proc = None
