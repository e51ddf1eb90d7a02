"""The adapter wire protocol: line-delimited JSON over stdin/stdout.

One UTF-8 JSON object per line, no pretty-printing.  The driver writes one
request line and reads exactly one response line before sending the next
request.  Adapter diagnostics must go to stderr, never stdout.

Request::

    {"id": <u64>, "image_path": "/abs/path.png", "task": "classification"|"detection"}

Responses (canonical key order as shown; adapters should reproduce it so
transcript comparisons can be byte-exact)::

    {"id": <u64>, "status": "ok", "label": "..."}
    {"id": <u64>, "status": "ok", "detections": [{"label": ..., "score": ..., "bbox": [x,y,w,h]}]}
    {"id": <u64>, "status": "err", "message": "..."}

The response id must echo the request id.  Malformed request lines are
answered with id 0 and an err message prefixed ``protocol:``; handler
exceptions are answered with the request id and an err message prefixed
``handler:``.  Empty or whitespace-only lines are ignored.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
from typing import Any, Callable, IO, Iterable

TASKS = ("classification", "detection")

# A handler maps (image_path, task) to a response payload: one of
#   {"status": "ok", "label": str}
#   {"status": "ok", "detections": [ ... ]}
#   {"status": "err", "message": str}
# Exceptions raised by the handler become "handler: ..." err payloads.
Handler = Callable[[str, str], dict[str, Any]]


def _dump(obj: dict[str, Any]) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def format_request(req_id: int, image_path: str, task: str) -> str:
    return _dump({"id": req_id, "image_path": image_path, "task": task})


def format_response(req_id: int, payload: dict[str, Any]) -> str:
    """Canonical response line for a handler payload."""
    if payload.get("status") == "ok":
        if "label" in payload:
            return _dump({"id": req_id, "status": "ok", "label": payload["label"]})
        return _dump({"id": req_id, "status": "ok", "detections": payload["detections"]})
    return _dump({"id": req_id, "status": "err", "message": payload["message"]})


class RequestError(ValueError):
    """A request line that cannot be served; ``req_id`` is echoed in the
    response (0 when the line was too broken to carry one)."""

    def __init__(self, message: str, req_id: int = 0):
        super().__init__(message)
        self.req_id = req_id


def parse_request(line: str) -> dict[str, Any]:
    """Validate a request line; raises :class:`RequestError` with a reason."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        raise RequestError("invalid request") from None
    if not isinstance(obj, dict):
        raise RequestError("invalid request")
    req_id = obj.get("id")
    if not isinstance(req_id, int) or isinstance(req_id, bool) or req_id < 0:
        raise RequestError("invalid request")
    if not isinstance(obj.get("image_path"), str):
        raise RequestError("missing image_path", req_id)
    if obj.get("task") not in TASKS:
        raise RequestError("missing or unknown task", req_id)
    return obj


def parse_response(line: str) -> dict[str, Any]:
    """Validate a response line; raises ``ValueError`` with a reason."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"response is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("response is not a JSON object")
    if not isinstance(obj.get("id"), int) or isinstance(obj.get("id"), bool):
        raise ValueError("response id missing or not an integer")
    status = obj.get("status")
    if status == "err":
        if not isinstance(obj.get("message"), str):
            raise ValueError("err response without message")
        return obj
    if status != "ok":
        raise ValueError(f"unknown response status {status!r}")
    if "label" in obj:
        if not isinstance(obj["label"], str):
            raise ValueError("label must be a string")
        return obj
    dets = obj.get("detections")
    if not isinstance(dets, list):
        raise ValueError("ok response needs a label or a detections list")
    for item in dets:
        if not isinstance(item, dict) or not isinstance(item.get("label"), str):
            raise ValueError("detection item must have a string label")
        score = item.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not 0 <= score <= 1:
            raise ValueError("detection score must be a number in [0, 1]")
        bbox = item.get("bbox")
        if (
            not isinstance(bbox, list)
            or len(bbox) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
        ):
            raise ValueError("detection bbox must be [x, y, w, h]")
        if bbox[2] <= 0 or bbox[3] <= 0:
            raise ValueError("detection bbox width and height must be positive")
    return obj


def serve(handler: Handler, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> None:
    """Run an adapter loop until the input stream closes.

    Emits exactly one response line per request line (blank lines are not
    request lines), never buffers responses out of order, and never lets an
    exception escape.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        try:
            request = parse_request(line)
        except RequestError as exc:
            reply = _dump({"id": exc.req_id, "status": "err", "message": f"protocol: {exc}"})
            stdout.write(reply + "\n")
            stdout.flush()
            continue
        req_id = request["id"]
        try:
            payload = handler(request["image_path"], request["task"])
            reply = format_response(req_id, payload)
        except Exception as exc:  # noqa: BLE001 - handler failures become err responses
            reply = _dump({"id": req_id, "status": "err", "message": f"handler: {exc}"})
        stdout.write(reply + "\n")
        stdout.flush()


# ---------------------------------------------------------------------------
# Golden transcript replay

FIXTURES_TOKEN = "${FIXTURES}"


def load_transcript(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    steps = doc["steps"]
    for step in steps:
        if set(step) not in ({"send"}, {"expect"}):
            raise ValueError(f"transcript step must be a send or an expect: {step}")
    return steps


def replay_transcript(
    command: list[str],
    steps: Iterable[dict[str, str]],
    fixtures_dir: str,
    timeout: float = 30.0,
) -> None:
    """Drive ``command`` through a golden transcript.

    ``${FIXTURES}`` in sent and expected lines is replaced with
    ``fixtures_dir``.  Raises ``AssertionError`` on the first response that
    is not byte-identical to the expected line, and checks that the adapter
    exits cleanly when its input closes.
    """
    fixtures = os.path.abspath(fixtures_dir)
    proc = subprocess.Popen(
        command,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
        text=True,
        encoding="utf-8",
    )
    try:
        assert proc.stdin is not None and proc.stdout is not None
        for i, step in enumerate(steps):
            if "send" in step:
                proc.stdin.write(step["send"].replace(FIXTURES_TOKEN, fixtures) + "\n")
                proc.stdin.flush()
            else:
                expected = step["expect"].replace(FIXTURES_TOKEN, fixtures)
                actual = proc.stdout.readline()
                if actual == "":
                    raise AssertionError(f"step {i}: adapter closed its output before responding")
                actual = actual.rstrip("\n")
                if actual != expected:
                    raise AssertionError(
                        f"step {i}: response mismatch\n  expected: {expected}\n  actual:   {actual}"
                    )
        proc.stdin.close()
        code = proc.wait(timeout=timeout)
        if code != 0:
            raise AssertionError(f"adapter exited with code {code} after clean stream close")
        trailing = proc.stdout.read()
        if trailing:
            raise AssertionError(f"adapter wrote unexpected trailing output: {trailing!r}")
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
