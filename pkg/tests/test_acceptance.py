"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v`` for one line per criterion;
each test additionally prints an ``ACCEPTANCE <name>: PASS`` line (visible
with ``-s`` or in captured output).
"""

import hashlib
import itertools
import os

import numpy as np
from click.testing import CliRunner

from conftest import detection_initial, seeded_image
from oracles import naive_mssim
from vistest import (
    AffineParams,
    Detection,
    DetectionBox,
    Detections,
    ERR,
    ExpectedDetections,
    Image,
    Modification,
    MockSut,
    Verdict,
    affine_warp,
    apply,
    blackout,
    blur,
    brightness,
    compare_outputs,
    flip,
    generate_suites,
    invert,
    iou,
    mssim,
    pixel_noise,
    run_suite,
    save_suite,
    weather,
)
from vistest.cli import main as cli_main
from vistest.modifiers import WEATHER_KINDS

CONSTANT_ANCHOR = 6.5025 / 65031.5025


def note(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def test_ssim_identity():
    """mssim(I, I) = 1.0 within 1e-9 for 20 seeded random images 16..128 px."""
    sizes = [(16 + 6 * i, 128 - 5 * i) for i in range(10)]
    sizes += [(s, s) for s in range(16, 128, 12)]
    assert len(sizes) == 20
    for i, (w, h) in enumerate(sizes):
        img = seeded_image(w, h, 1000 + i)
        assert abs(mssim(img, img).mean - 1.0) <= 1e-9, (w, h)
    note("ssim-identity")


def test_ssim_analytic_anchor():
    """Constant 0 vs constant 255 = C1 / (255^2 + C1) within 1e-8."""
    for w, h in ((11, 11), (64, 32), (13, 57)):
        value = mssim(Image.new(w, h, (0, 0, 0)), Image.new(w, h, (255, 255, 255))).mean
        assert abs(value - CONSTANT_ANCHOR) <= 1e-8, (w, h)
    note("ssim-analytic-anchor")


def test_ssim_oracle_equivalence_and_symmetry():
    """Optimized vs naive double-loop oracle on 10 seeded 32x32 pairs."""
    worst = 0.0
    for i in range(10):
        a = seeded_image(32, 32, 2000 + i)
        b = seeded_image(32, 32, 3000 + i)
        oracle_mean, oracle_map = naive_mssim(a.pixels, b.pixels)
        result = mssim(a, b)
        worst = max(worst, float(np.abs(result.map - oracle_map).max()))
        assert abs(result.mean - oracle_mean) <= 1e-9
        assert abs(mssim(a, b).mean - mssim(b, a).mean) <= 1e-12
    assert worst <= 1e-9
    note("ssim-oracle-equivalence")


def test_operator_laws():
    """Involutions, bit-exact identity parameters, exact pixel counts."""
    img = seeded_image(40, 28, 4000)
    assert invert(invert(img)) == img
    assert flip(flip(img, "horizontal"), "horizontal") == img
    assert flip(flip(img, "vertical"), "vertical") == img

    assert blur(img, 0.0) == img
    assert brightness(img, 0.0) == img
    assert pixel_noise(img, 0, seed=1) == img
    assert affine_warp(img, AffineParams(1, 0, 0, 0, 1, 0)) == img
    for kind in WEATHER_KINDS:
        assert weather(img, kind, 0.0, seed=1) == img

    dark = blackout(img)
    assert np.all(dark.pixels == 0)
    assert (dark.width, dark.height) == (img.width, img.height)

    white = Image.new(16, 16, (255, 255, 255))
    for count in (1, 10, 255, 256):
        noisy = pixel_noise(white, count, seed=7)
        changed = int(np.sum(np.any(noisy.pixels != white.pixels, axis=2)))
        assert changed == count

    mods = [
        Modification("invert"),
        Modification("flip", {"axis": "vertical"}),
        Modification("blur", {"strength": 0.4}),
        Modification("brightness", {"factor": 0.9}),
        Modification("pixel_noise", {"count": 50}, seed=3, sim=True),
        Modification("affine", {"a": 0.7, "b": 0.2, "c": 1, "d": -0.2, "e": 1.3, "f": 0}),
        *[Modification("weather", {"kind": k, "intensity": 1.0}, seed=5, sim=True) for k in WEATHER_KINDS],
        Modification("blackout"),
    ]
    for mod in mods:
        out = apply(mod, img)
        assert (out.width, out.height) == (img.width, img.height), mod.op
        assert out.pixels.dtype == np.uint8
    note("operator-laws")


def _digest_dir(root) -> str:
    digest = hashlib.sha256()
    for name in sorted(os.listdir(root)):
        digest.update(name.encode())
        digest.update((root / name).read_bytes())
    return digest.hexdigest()


THREE_SIM_TWO_NOT = [
    Modification("brightness", {"factor": 0.1}, sim=True),
    Modification("blur", {"strength": 0.2}, seed=1, sim=True),
    Modification("weather", {"kind": "fog", "intensity": 0.3}, seed=2, sim=True),
    Modification("invert"),
    Modification("blackout"),
]


def test_determinism(tmp_path):
    """Byte-identical operators, generation runs, and reports (workers 1 vs 4)."""
    img = seeded_image(48, 48, 5000)
    mods = THREE_SIM_TWO_NOT + [
        Modification("pixel_noise", {"count": 20}, seed=9, sim=True),
        *[Modification("weather", {"kind": k, "intensity": 0.8}, seed=4, sim=True)
          for k in ("rain", "snow", "sun", "shadow")],
        Modification("affine", {"a": 1.1, "b": 0, "c": 2, "d": 0, "e": 0.9, "f": -1}),
        Modification("flip", {"axis": "horizontal"}),
    ]
    for mod in mods:
        assert apply(mod, img) == apply(mod, img), mod.op

    initial = detection_initial(tmp_path, count=3)
    for name in ("gen1", "gen2"):
        similar, severe = generate_suites(initial, THREE_SIM_TWO_NOT, tmp_path / name)
        save_suite(similar, tmp_path / name / "similar.json")
        save_suite(severe, tmp_path / name / "severe.json")
    assert _digest_dir(tmp_path / "gen1") == _digest_dir(tmp_path / "gen2")

    runner = CliRunner()
    reports = {}
    for workers in (1, 4):
        for attempt in ("a", "b"):
            report = tmp_path / f"w{workers}{attempt}.csv"
            result = runner.invoke(cli_main, [
                "run", "--suite", str(tmp_path / "gen1" / "severe.json"),
                "--sut", "mock", "--report", str(report), "--workers", str(workers),
            ])
            assert result.exit_code == 1  # invert rows fail by design
            reports[(workers, attempt)] = report.read_bytes()
    assert reports[(1, "a")] == reports[(1, "b")] == reports[(4, "a")] == reports[(4, "b")]
    note("determinism")


def test_suite_formula_conformance(tmp_path):
    """5 initial cases, 3 sim + 2 non-sim mods: |similar| 15, |severe| 10."""
    initial = detection_initial(tmp_path, count=5)
    by_id = {c.id: c for c in initial.cases}
    similar, severe = generate_suites(initial, THREE_SIM_TWO_NOT, tmp_path / "out")
    assert len(similar.cases) == 15
    assert len(severe.cases) == 10
    for case in similar.cases:
        assert case.expected == by_id[case.provenance.source_id].expected
    for case in severe.cases:
        assert case.expected == ERR
    note("suite-formula-conformance")


def test_end_to_end_with_mock_sut(tmp_path):
    """Similar brightness passes 5/5; severe blackout passes; severe invert
    records 5/5 genuine failures (mock answers ok-with-no-detections)."""
    initial = detection_initial(tmp_path, count=5)
    save_suite(initial, tmp_path / "initial.json")

    similar, _ = generate_suites(
        initial, [Modification("brightness", {"factor": 0.1}, sim=True)], tmp_path / "bright"
    )
    rows, summary = run_suite(similar, MockSut())
    assert (summary.total, summary.passed) == (5, 5)

    _, severe_blackout = generate_suites(initial, [Modification("blackout")], tmp_path / "dark")
    rows, summary = run_suite(severe_blackout, MockSut())
    assert (summary.total, summary.passed) == (5, 5)
    assert all(r.actual == "err:dark_frame" for r in rows)

    _, severe_invert = generate_suites(initial, [Modification("invert")], tmp_path / "inv")
    save_suite(severe_invert, tmp_path / "inv" / "severe.json")
    rows, summary = run_suite(severe_invert, MockSut())
    assert (summary.total, summary.failed) == (5, 5)
    assert all(r.actual == "detections:0" for r in rows)

    report = tmp_path / "invert.csv"
    result = CliRunner().invoke(cli_main, [
        "run", "--suite", str(tmp_path / "inv" / "severe.json"),
        "--sut", "mock", "--report", str(report),
    ])
    assert result.exit_code == 1
    assert report.exists()
    note("end-to-end-mock-sut")


def test_similarity_ordering_trend(scene):
    """Ordering check on a fixed synthetic image: mild brightening stays more
    similar than a sun flare, which stays more similar than inversion."""
    s_bright = mssim(scene, brightness(scene, 0.1)).mean
    s_sun = mssim(scene, weather(scene, "sun", 0.5, seed=1)).mean
    s_invert = mssim(scene, invert(scene)).mean
    assert s_bright > s_sun > s_invert
    note("similarity-ordering-trend")


def test_iou_matcher():
    """Analytic IoU 1/3 fails at the 0.5 threshold; shuffling never matters."""
    assert abs(iou((0, 0, 10, 10), (5, 0, 10, 10)) - 1.0 / 3.0) <= 1e-12
    expected = ExpectedDetections(boxes=(DetectionBox("car", (0, 0, 10, 10)),))
    shifted = Detections(items=(Detection("car", 1.0, (5.0, 0.0, 10.0, 10.0)),))
    same = Detections(items=(Detection("car", 1.0, (0.0, 0.0, 10.0, 10.0)),))
    assert compare_outputs(expected, shifted, "detection") == Verdict.FAIL
    assert compare_outputs(expected, same, "detection") == Verdict.PASS

    multi = ExpectedDetections(boxes=(
        DetectionBox("car", (0, 0, 10, 10)),
        DetectionBox("bus", (20, 20, 10, 10)),
        DetectionBox("car", (40, 0, 10, 10)),
    ))
    items = (
        Detection("car", 1.0, (1.0, 0.0, 10.0, 10.0)),
        Detection("bus", 1.0, (20.0, 20.0, 10.0, 10.0)),
        Detection("car", 1.0, (41.0, 0.0, 10.0, 10.0)),
    )
    verdicts = {
        compare_outputs(multi, Detections(items=perm), "detection")
        for perm in itertools.permutations(items)
    }
    assert verdicts == {Verdict.PASS}
    note("iou-matcher")
