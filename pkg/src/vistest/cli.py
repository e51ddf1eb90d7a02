"""Command line interface.

Subcommands: ``modify`` (apply one modification), ``diff`` (compare two
images), ``gen`` (generate the similar/severe suites), ``run`` (execute a
suite against an adapter and write a report).

Exit codes: 0 success / all tests passed, 1 at least one test failed,
2 usage, configuration, or I/O error.  Diagnostics go to stderr;
machine-readable values go to stdout.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys

import click

from . import runner as runner_mod
from . import testgen
from .diff import mse as compute_mse, mssim
from .errors import VistestError
from .image import load_image, save_image
from .modifiers import Modification, apply as apply_modification, default_sim
from .sut import MockSut, SutAdapter


def _fail2(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _exit2_on_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (VistestError, OSError, json.JSONDecodeError) as exc:
            _fail2(str(exc))

    return wrapper


@click.group()
@click.version_option(package_name="vistest")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True,
              help="Default seed for modifications that do not specify one.")
@click.option("--quiet", is_flag=True, help="Suppress informational output.")
@click.pass_context
def main(ctx: click.Context, seed: int, quiet: bool) -> None:
    """Generate, execute, and report metamorphic test suites for vision systems."""
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s")
    ctx.obj = {"seed": seed, "quiet": quiet}


@main.command()
@click.option("--op", "op", required=True, help="Operator name (e.g. invert, blur, weather).")
@click.option("--params", "params_json", default="{}", show_default=True,
              help="Operator parameters as a JSON object.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
              help="Seed for stochastic operators (defaults to the global --seed).")
@click.option("--in", "input_path", required=True, type=click.Path(), help="Input image (PNG or PPM).")
@click.option("--out", "output_path", required=True, type=click.Path(), help="Output PNG path.")
@click.pass_context
@_exit2_on_errors
def modify(ctx: click.Context, op: str, params_json: str, seed: int | None,
           input_path: str, output_path: str) -> None:
    """Apply one modification to one image."""
    try:
        params = json.loads(params_json)
    except json.JSONDecodeError as exc:
        _fail2(f"--params is not valid JSON: {exc}")
    if not isinstance(params, dict):
        _fail2("--params must be a JSON object")
    img = load_image(input_path)
    mod = Modification(
        op=op,
        params=params,
        seed=seed if seed is not None else ctx.obj["seed"],
        sim=default_sim(op, params, pixel_count=img.width * img.height),
    )
    save_image(apply_modification(mod, img), output_path)
    if not ctx.obj["quiet"]:
        click.echo(output_path)


@main.command(name="diff")
@click.option("--metric", type=click.Choice(["ssim", "mse"]), default="ssim", show_default=True)
@click.option("--clamp01", is_flag=True, help="Clip the printed SSIM into [0, 1].")
@click.argument("image_a", type=click.Path())
@click.argument("image_b", type=click.Path())
@_exit2_on_errors
def diff_cmd(metric: str, clamp01: bool, image_a: str, image_b: str) -> None:
    """Print the similarity (or error) between two images."""
    a = load_image(image_a)
    b = load_image(image_b)
    if metric == "ssim":
        value = mssim(a, b).mean
        if clamp01:
            value = min(1.0, max(0.0, value))
    else:
        value = compute_mse(a, b)
    click.echo(f"{value:.6f}")


@main.command()
@click.option("--suite", "suite_path", required=True, type=click.Path(),
              help="Initial suite manifest (kind must be 'initial').")
@click.option("--mods", "mods_path", required=True, type=click.Path(),
              help="JSON array of modification records.")
@click.option("--out-dir", "out_dir", required=True, type=click.Path(),
              help="Directory for modified images and the two generated manifests.")
@click.pass_context
@_exit2_on_errors
def gen(ctx: click.Context, suite_path: str, mods_path: str, out_dir: str) -> None:
    """Generate the similar and severe suites from an initial suite."""
    initial = testgen.load_suite(suite_path)
    pixel_count = None
    for case in initial.cases:
        img = load_image(case.image)
        n = img.width * img.height
        pixel_count = n if pixel_count is None else min(pixel_count, n)
    mods = testgen.load_modifications(mods_path, pixel_count=pixel_count)
    similar, severe = testgen.generate_suites(initial, mods, out_dir)
    testgen.save_suite(similar, os.path.join(out_dir, "similar.json"))
    testgen.save_suite(severe, os.path.join(out_dir, "severe.json"))
    if not ctx.obj["quiet"]:
        click.echo(f"similar: {len(similar.cases)}, severe: {len(severe.cases)}")


@main.command()
@click.option("--suite", "suite_path", required=True, type=click.Path(), help="Suite manifest to run.")
@click.option("--sut", "sut_command", required=True,
              help="Adapter command line, or the reserved token 'mock'.")
@click.option("--report", "report_path", required=True, type=click.Path(), help="Report output path.")
@click.option("--format", "report_format", type=click.Choice(list(runner_mod.REPORT_FORMATS)),
              default="csv", show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Number of adapter processes to run in parallel.")
@click.option("--iou", "iou_threshold", type=float, default=0.5, show_default=True,
              help="Minimum IoU for a detection to match an expected box.")
@click.option("--timeout-ms", type=click.IntRange(min=1), default=30000, show_default=True,
              help="Per-query adapter timeout.")
@click.option("--mse", "with_mse", is_flag=True, help="Also record mean squared error per row.")
@click.option("--clamp01", is_flag=True, help="Clip reported SSIM into [0, 1].")
@click.pass_context
@_exit2_on_errors
def run(ctx: click.Context, suite_path: str, sut_command: str, report_path: str,
        report_format: str, workers: int, iou_threshold: float, timeout_ms: int,
        with_mse: bool, clamp01: bool) -> None:
    """Run a suite against an adapter; exit 0 only if every case passes."""
    suite = testgen.load_suite(suite_path)
    if sut_command.strip() == "mock":
        sut: MockSut | SutAdapter = MockSut()
    else:
        sut = SutAdapter.from_command_line(sut_command, timeout_ms=timeout_ms)
    opts = runner_mod.RunOptions(workers=workers, iou_threshold=iou_threshold, with_mse=with_mse)
    rows, summary = runner_mod.run_suite(suite, sut, opts)
    runner_mod.export_report(rows, summary, report_format, report_path, clamp01=clamp01)
    if not ctx.obj["quiet"]:
        click.echo(f"total={summary.total} passed={summary.passed} failed={summary.failed}")
    sys.exit(0 if summary.failed == 0 else 1)


if __name__ == "__main__":
    main()
