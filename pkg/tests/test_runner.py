"""Suite execution and report export tests, end to end over the mock SUT."""

import csv
import io
import json

import pytest

from conftest import detection_initial
from vistest import (
    Modification,
    MockSut,
    RunOptions,
    export_report,
    generate_suites,
    load_report,
    run_suite,
)
from vistest.errors import EmptySuiteError, MissingImageError, VistestError
from vistest.runner import _render_csv  # deterministic row rendering


@pytest.fixture
def generated(tmp_path):
    initial = detection_initial(tmp_path, count=3)
    mods = [
        Modification("brightness", {"factor": 0.1}, sim=True),
        Modification("blackout"),
        Modification("invert"),
    ]
    similar, severe = generate_suites(initial, mods, tmp_path / "out")
    return initial, similar, severe


class TestRunSuite:
    def test_similar_brightness_all_pass(self, generated):
        _, similar, _ = generated
        rows, summary = run_suite(similar, MockSut())
        assert summary.total == 3 and summary.passed == 3 and summary.failed == 0
        assert all(r.verdict == "pass" for r in rows)

    def test_severe_blackout_passes_invert_fails(self, generated):
        _, _, severe = generated
        rows, summary = run_suite(severe, MockSut())
        by_op = {}
        for row in rows:
            by_op.setdefault(row.op, []).append(row)
        assert all(r.verdict == "pass" for r in by_op["blackout"])
        assert all(r.verdict == "fail" for r in by_op["invert"])
        assert all(r.actual == "detections:0" for r in by_op["invert"])
        assert summary.passed == 3 and summary.failed == 3
        assert summary.per_op["blackout"] == {"passed": 3, "total": 3}
        assert summary.per_op["invert"] == {"passed": 0, "total": 3}

    def test_rows_sorted_by_test_id(self, generated):
        _, _, severe = generated
        rows, _ = run_suite(severe, MockSut())
        assert [r.test_id for r in rows] == sorted(r.test_id for r in rows)

    def test_ssim_present_exactly_on_generated_cases(self, generated):
        initial, similar, _ = generated
        gen_rows, _ = run_suite(similar, MockSut())
        assert all(r.ssim is not None and r.sim is not None for r in gen_rows)
        init_rows, _ = run_suite(initial, MockSut())
        assert all(r.ssim is None and r.sim is None for r in init_rows)
        assert all(r.op == "-" and r.source_id == "-" and r.params == "-" for r in init_rows)

    def test_worker_count_does_not_change_report(self, generated):
        _, _, severe = generated
        rows1, _ = run_suite(severe, MockSut(), RunOptions(workers=1))
        rows4, _ = run_suite(severe, MockSut(), RunOptions(workers=4))
        assert _render_csv(rows1, False) == _render_csv(rows4, False)

    def test_mse_optional(self, generated):
        _, similar, _ = generated
        rows, _ = run_suite(similar, MockSut(), RunOptions(with_mse=True))
        assert all(r.mse is not None for r in rows)
        rows_plain, _ = run_suite(similar, MockSut())
        assert all(r.mse is None for r in rows_plain)

    def test_blackout_ssim_is_low_brightness_ssim_is_high(self, generated):
        _, similar, severe = generated
        sim_rows, _ = run_suite(similar, MockSut())
        sev_rows, _ = run_suite(severe, MockSut())
        blackout_ssims = [r.ssim for r in sev_rows if r.op == "blackout"]
        assert max(blackout_ssims) < 0.2
        assert min(r.ssim for r in sim_rows) > 0.9

    def test_missing_image_fails_fast(self, generated, tmp_path):
        _, similar, _ = generated
        first = similar.cases[0]
        broken = similar.__class__(
            kind=similar.kind,
            task=similar.task,
            cases=(first.__class__(
                id=first.id,
                image=str(tmp_path / "gone.png"),
                expected=first.expected,
                provenance=first.provenance,
            ),) + similar.cases[1:],
        )
        with pytest.raises(MissingImageError):
            run_suite(broken, MockSut())

    def test_empty_suite_rejected(self, generated, tmp_path):
        initial = detection_initial(tmp_path / "em", count=1)
        _, severe = generate_suites(
            initial, [Modification("brightness", {"factor": 0.1}, sim=True)], tmp_path / "em" / "out"
        )
        with pytest.raises(EmptySuiteError):
            run_suite(severe, MockSut())

    def test_summary_tallies_match_rows(self, generated):
        _, _, severe = generated
        rows, summary = run_suite(severe, MockSut())
        assert summary.passed == sum(1 for r in rows if r.verdict == "pass")
        assert summary.passed + summary.failed == summary.total == len(rows)
        assert summary.wall_time_s >= 0.0

    def test_subprocess_adapter_pool_matches_in_process_mock(self, generated):
        import sys

        from vistest import SutAdapter

        _, _, severe = generated
        adapter = SutAdapter(command=(sys.executable, "-m", "vistest.mock_sut"))
        pooled, _ = run_suite(severe, adapter, RunOptions(workers=2))
        in_process, _ = run_suite(severe, MockSut())
        assert pooled == in_process


class TestExport:
    def test_csv_columns_exact(self, generated, tmp_path):
        _, similar, _ = generated
        rows, summary = run_suite(similar, MockSut())
        out = tmp_path / "r.csv"
        export_report(rows, summary, "csv", out)
        reader = csv.reader(io.StringIO(out.read_text()))
        header = next(reader)
        assert header == ["test_id", "source_id", "op", "params", "sim", "ssim",
                          "expected", "actual", "verdict"]
        body = list(reader)
        assert len(body) == 3
        for record in body:
            assert record[2] == "brightness"
            assert record[4] == "true"
            assert float(record[5]) > 0.9  # full-precision ssim survives csv
            assert record[8] == "pass"

    def test_md_mirrors_table_layout(self, generated, tmp_path):
        _, _, severe = generated
        rows, summary = run_suite(severe, MockSut())
        out = tmp_path / "r.md"
        export_report(rows, summary, "md", out)
        lines = out.read_text().splitlines()
        assert lines[0] == "| test_id | modification | SSIM | result |"
        assert len(lines) == 2 + len(rows)
        # ssim shown with exactly two decimals
        first_ssim = lines[2].split("|")[3].strip()
        assert len(first_ssim.split(".")[1]) == 2

    def test_json_round_trip(self, generated, tmp_path):
        _, similar, _ = generated
        rows, summary = run_suite(similar, MockSut(), RunOptions(with_mse=True))
        out = tmp_path / "r.json"
        export_report(rows, summary, "json", out)
        loaded_rows, loaded_summary = load_report(out)
        assert loaded_rows == rows
        assert loaded_summary["total"] == summary.total
        assert loaded_summary["per_op"] == summary.per_op
        assert "wall_time_s" not in loaded_summary

    def test_clamp01_clips_display_values(self, generated, tmp_path):
        _, _, severe = generated
        rows, summary = run_suite(severe, MockSut())
        raw = tmp_path / "raw.csv"
        clamped = tmp_path / "cl.csv"
        export_report(rows, summary, "csv", raw)
        export_report(rows, summary, "csv", clamped, clamp01=True)
        raw_vals = [float(r[5]) for r in list(csv.reader(io.StringIO(raw.read_text())))[1:]]
        cl_vals = [float(r[5]) for r in list(csv.reader(io.StringIO(clamped.read_text())))[1:]]
        assert all(0.0 <= v <= 1.0 for v in cl_vals)
        assert any(v < 0.0 for v in raw_vals) or raw_vals == cl_vals

    def test_empty_rows_rejected(self, tmp_path):
        from vistest.runner import RunSummary

        with pytest.raises(EmptySuiteError):
            export_report([], RunSummary(0, 0, 0), "csv", tmp_path / "x.csv")

    def test_unknown_format_rejected(self, generated, tmp_path):
        _, similar, _ = generated
        rows, summary = run_suite(similar, MockSut())
        with pytest.raises(VistestError):
            export_report(rows, summary, "xml", tmp_path / "x.xml")

    def test_export_is_deterministic(self, generated, tmp_path):
        _, _, severe = generated
        rows, summary = run_suite(severe, MockSut())
        export_report(rows, summary, "json", tmp_path / "a.json")
        export_report(rows, summary, "json", tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
