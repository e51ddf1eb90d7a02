"""Metamorphic test-suite generation and execution for computer-vision systems.

The package derives modified images from an initial test suite via
classified modification operators, measures structural similarity between
originals and modifications, drives an arbitrary external system under test
through a line-delimited JSON protocol, and checks that small modifications
preserve outputs while severe modifications elicit error handling.
"""

from .diff import SsimParams, SsimResult, mse, mssim
from .image import Image, load_image, luminance, mean_luminance, save_image
from .modifiers import (
    AffineParams,
    Modification,
    affine_warp,
    apply,
    blackout,
    blur,
    brightness,
    default_sim,
    flip,
    invert,
    pixel_noise,
    weather,
)
from .runner import ReportRow, RunOptions, RunSummary, export_report, load_report, run_suite
from .sut import (
    Detection,
    Detections,
    MockSut,
    SutAdapter,
    SutError,
    Verdict,
    compare_outputs,
    iou,
    mock_detect,
)
from .testgen import (
    ERR,
    Classification,
    DetectionBox,
    Err,
    ExpectedDetections,
    Provenance,
    TestCase,
    TestSuite,
    generate_suites,
    load_modifications,
    load_suite,
    save_suite,
)

__version__ = "0.1.0"

__all__ = [
    "AffineParams",
    "Classification",
    "Detection",
    "DetectionBox",
    "Detections",
    "ERR",
    "Err",
    "ExpectedDetections",
    "Image",
    "MockSut",
    "Modification",
    "Provenance",
    "ReportRow",
    "RunOptions",
    "RunSummary",
    "SsimParams",
    "SsimResult",
    "SutAdapter",
    "SutError",
    "TestCase",
    "TestSuite",
    "Verdict",
    "affine_warp",
    "apply",
    "blackout",
    "blur",
    "brightness",
    "compare_outputs",
    "default_sim",
    "export_report",
    "flip",
    "generate_suites",
    "invert",
    "iou",
    "load_image",
    "load_modifications",
    "load_report",
    "load_suite",
    "luminance",
    "mean_luminance",
    "mock_detect",
    "mse",
    "mssim",
    "pixel_noise",
    "run_suite",
    "save_image",
    "save_suite",
    "weather",
]
