"""Suite execution: query the system under test, measure, judge, report.

Each case is queried exactly once.  Generated cases additionally get a
structural-similarity measurement between the source image and the modified
image as they exist on disk.  Rows are ordered by test id no matter how many
workers executed them, so reports are byte-identical across worker counts.

Adapter-level failures (crashes, timeouts, protocol faults) are recorded and
judged like any other outcome; they never abort a run.
"""

from __future__ import annotations

import csv
import io
import json
import os
import queue
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .diff import SsimParams, mse as compute_mse, mssim
from .errors import EmptySuiteError, MissingImageError, VistestError
from .image import load_image
from .sut import SutError, Verdict, compare_outputs
from .testgen import Classification, ExpectedDetections, Err, TestCase, TestSuite
from . import sut as sut_mod


@dataclass(frozen=True)
class ReportRow:
    test_id: str
    source_id: str  # "-" for initial cases
    op: str  # "-" for initial cases
    params: str  # compact JSON, "-" for initial cases
    sim: bool | None
    ssim: float | None
    mse: float | None
    expected: str
    actual: str
    verdict: str


@dataclass(frozen=True)
class RunSummary:
    total: int
    passed: int
    failed: int
    per_op: dict[str, dict[str, int]] = field(default_factory=dict)
    wall_time_s: float = 0.0  # informational; excluded from serialized reports


@dataclass(frozen=True)
class RunOptions:
    workers: int = 1
    ssim: SsimParams = field(default_factory=SsimParams)
    iou_threshold: float = 0.5
    with_mse: bool = False


def summarize_expected(expected) -> str:
    if isinstance(expected, Classification):
        return f"classification:{expected.label}"
    if isinstance(expected, ExpectedDetections):
        return f"detections:{len(expected.boxes)}"
    return "err"


def summarize_actual(output) -> str:
    if isinstance(output, Classification):
        return f"classification:{output.label}"
    if isinstance(output, SutError):
        return f"err:{output.message}"
    return f"detections:{len(output.items)}"


def _check_images_exist(suite: TestSuite) -> None:
    for case in suite.cases:
        if not os.path.isfile(case.image):
            raise MissingImageError(f"case {case.id}: image not found: {case.image}")
        if case.provenance is not None and not os.path.isfile(case.provenance.source_image):
            raise MissingImageError(
                f"case {case.id}: source image not found: {case.provenance.source_image}"
            )


def run_suite(
    suite: TestSuite,
    sut: "sut_mod.SutAdapter | sut_mod.MockSut",
    opts: RunOptions = RunOptions(),
) -> tuple[list[ReportRow], RunSummary]:
    """Execute a suite against an adapter and return judged report rows.

    ``sut`` is anything with a ``connect()`` method; ``opts.workers``
    connections are opened and each worker owns one for its whole lifetime.
    """
    suite.validate()
    if not suite.cases:
        raise EmptySuiteError(f"{suite.kind} suite has no cases to run")
    _check_images_exist(suite)
    start = time.monotonic()

    workers = max(1, opts.workers)
    connections = [sut.connect() for _ in range(workers)]
    pool: queue.Queue = queue.Queue()
    for conn in connections:
        pool.put(conn)

    def evaluate(case: TestCase) -> ReportRow:
        conn = pool.get()
        try:
            output = conn.query(case.image, suite.task)
        finally:
            pool.put(conn)
        verdict = compare_outputs(case.expected, output, suite.task, opts.iou_threshold)
        ssim_value = None
        mse_value = None
        if case.provenance is not None:
            source = load_image(case.provenance.source_image)
            modified = load_image(case.image)
            ssim_value = mssim(source, modified, opts.ssim).mean
            if opts.with_mse:
                mse_value = compute_mse(source, modified)
        if case.provenance is not None:
            mod = case.provenance.modification
            source_id, op, params = case.provenance.source_id, mod.op, mod.params_summary()
            sim: bool | None = mod.sim
        else:
            source_id, op, params, sim = "-", "-", "-", None
        return ReportRow(
            test_id=case.id,
            source_id=source_id,
            op=op,
            params=params,
            sim=sim,
            ssim=ssim_value,
            mse=mse_value,
            expected=summarize_expected(case.expected),
            actual=summarize_actual(output),
            verdict=verdict.value,
        )

    try:
        if workers == 1:
            rows = [evaluate(case) for case in suite.cases]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                rows = list(executor.map(evaluate, suite.cases))
    finally:
        for conn in connections:
            conn.close()

    rows.sort(key=lambda r: r.test_id)
    passed = sum(1 for r in rows if r.verdict == Verdict.PASS.value)
    per_op: dict[str, dict[str, int]] = {}
    for row in rows:
        stats = per_op.setdefault(row.op, {"passed": 0, "total": 0})
        stats["total"] += 1
        if row.verdict == Verdict.PASS.value:
            stats["passed"] += 1
    summary = RunSummary(
        total=len(rows),
        passed=passed,
        failed=len(rows) - passed,
        per_op=dict(sorted(per_op.items())),
        wall_time_s=time.monotonic() - start,
    )
    return rows, summary


# ---------------------------------------------------------------------------
# Report export

REPORT_FORMATS = ("csv", "json", "md")
_CSV_COLUMNS = ("test_id", "source_id", "op", "params", "sim", "ssim", "expected", "actual", "verdict")


def _clamped(value: float | None, clamp01: bool) -> float | None:
    if value is None or not clamp01:
        return value
    return min(1.0, max(0.0, value))


def export_report(
    rows: list[ReportRow],
    summary: RunSummary,
    format: str,
    path: str | os.PathLike,
    clamp01: bool = False,
) -> None:
    """Write rows (plus summary, for JSON) as csv, json, or md.

    The similarity column keeps full precision in csv/json and is shown with
    two decimals in md.  ``clamp01`` clips reported similarity into [0, 1]
    for display; raw values can be negative for anti-correlated images.
    Output is byte-deterministic for identical inputs.
    """
    if format not in REPORT_FORMATS:
        raise VistestError(f"unknown report format {format!r} (expected one of {REPORT_FORMATS})")
    if not rows:
        raise EmptySuiteError("refusing to export an empty report")
    if format == "csv":
        text = _render_csv(rows, clamp01)
    elif format == "json":
        text = _render_json(rows, summary, clamp01)
    else:
        text = _render_md(rows, clamp01)
    parent = os.path.dirname(os.path.abspath(os.fspath(path)))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _render_csv(rows: list[ReportRow], clamp01: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for row in rows:
        ssim_value = _clamped(row.ssim, clamp01)
        writer.writerow(
            (
                row.test_id,
                row.source_id,
                row.op,
                row.params,
                "" if row.sim is None else ("true" if row.sim else "false"),
                "" if ssim_value is None else repr(ssim_value),
                row.expected,
                row.actual,
                row.verdict,
            )
        )
    return buf.getvalue()


def _row_to_json(row: ReportRow, clamp01: bool) -> dict:
    return {
        "test_id": row.test_id,
        "source_id": row.source_id,
        "op": row.op,
        "params": row.params,
        "sim": row.sim,
        "ssim": _clamped(row.ssim, clamp01),
        "mse": row.mse,
        "expected": row.expected,
        "actual": row.actual,
        "verdict": row.verdict,
    }


def _render_json(rows: list[ReportRow], summary: RunSummary, clamp01: bool) -> str:
    doc = {
        "schema": 1,
        "rows": [_row_to_json(r, clamp01) for r in rows],
        "summary": {
            "total": summary.total,
            "passed": summary.passed,
            "failed": summary.failed,
            "per_op": summary.per_op,
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def _render_md(rows: list[ReportRow], clamp01: bool) -> str:
    lines = ["| test_id | modification | SSIM | result |", "| --- | --- | --- | --- |"]
    for row in rows:
        modification = "-" if row.op == "-" else f"{row.op} {row.params}"
        ssim_value = _clamped(row.ssim, clamp01)
        ssim_text = "-" if ssim_value is None else f"{ssim_value:.2f}"
        lines.append(f"| {row.test_id} | {modification} | {ssim_text} | {row.verdict} ({row.actual}) |")
    return "\n".join(lines) + "\n"


def load_report(path: str | os.PathLike) -> tuple[list[ReportRow], dict]:
    """Reload a JSON report into rows plus the summary dictionary."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = [
        ReportRow(
            test_id=r["test_id"],
            source_id=r["source_id"],
            op=r["op"],
            params=r["params"],
            sim=r["sim"],
            ssim=r["ssim"],
            mse=r["mse"],
            expected=r["expected"],
            actual=r["actual"],
            verdict=r["verdict"],
        )
        for r in doc["rows"]
    ]
    return rows, doc["summary"]
