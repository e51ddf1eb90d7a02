"""The whole pipeline against the built-in mock detector.

Creates a tiny synthetic corpus of color-box frames with known expected
detections, derives the similar and severe suites from a mixed modification
list, executes both against the in-process mock detector, and prints the
judged report.  The inversion rows demonstrate the kind of finding the
harness exists for: a severe modification the system under test answers
with a normal result instead of an error.

Run:  python demos/03_generate_and_run.py
"""

import os
import tempfile

import numpy as np

from vistest import (
    DetectionBox,
    ExpectedDetections,
    Image,
    Modification,
    MockSut,
    RunOptions,
    TestCase,
    TestSuite,
    generate_suites,
    run_suite,
    save_image,
)

COLORS = {"red": (255, 0, 0), "green": (0, 255, 0), "blue": (0, 0, 255)}

MODS = [
    Modification("brightness", {"factor": 0.1}, sim=True),
    Modification("weather", {"kind": "fog", "intensity": 0.4}, seed=1, sim=True),
    Modification("invert"),
    Modification("blackout"),
]


def build_corpus(root: str) -> TestSuite:
    cases = []
    for i, (label, color) in enumerate(COLORS.items()):
        arr = np.full((64, 64, 3), 255, dtype=np.uint8)
        box = (6 + 8 * i, 10 + 6 * i, 24, 24)
        x, y, w, h = box
        arr[y:y + h, x:x + w] = color
        path = os.path.join(root, f"frame_{label}.png")
        save_image(Image(arr), path)
        cases.append(TestCase(
            id=f"frame_{label}",
            image=path,
            expected=ExpectedDetections(boxes=(DetectionBox(label, box),)),
        ))
    return TestSuite(kind="initial", task="detection", cases=tuple(cases))


def show(title: str, rows, summary) -> None:
    print(f"\n== {title}: {summary.passed}/{summary.total} passed ==")
    print(f"{'test id':<34} {'ssim':>7}  {'expected':<14} {'actual':<16} verdict")
    for row in rows:
        ssim = f"{row.ssim:+.3f}" if row.ssim is not None else "-"
        print(f"{row.test_id:<34} {ssim:>7}  {row.expected:<14} {row.actual:<16} {row.verdict}")


def main() -> None:
    with tempfile.TemporaryDirectory() as root:
        initial = build_corpus(root)
        similar, severe = generate_suites(initial, MODS, os.path.join(root, "generated"))
        print(f"generated {len(similar.cases)} similar and {len(severe.cases)} severe cases")

        opts = RunOptions(workers=2)
        show("similar suite", *run_suite(similar, MockSut(), opts))
        rows, summary = run_suite(severe, MockSut(), opts)
        show("severe suite", rows, summary)

        findings = [r for r in rows if r.verdict == "fail"]
        print(f"\n{len(findings)} severe modification(s) were answered with a normal result")
        print("instead of an error - exactly the robustness gap this flags.")


if __name__ == "__main__":
    main()
