import sys
from pathlib import Path

import numpy as np
import pytest

from vistest import (
    DetectionBox,
    ExpectedDetections,
    Image,
    TestCase,
    TestSuite,
    save_image,
)

sys.path.insert(0, str(Path(__file__).parent))

MOCK_COLORS = {"red": (255, 0, 0), "green": (0, 255, 0), "blue": (0, 0, 255)}


def seeded_image(width: int, height: int, seed: int) -> Image:
    """Deterministic pseudo-random test image."""
    rng = np.random.default_rng(seed)
    return Image(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def box_image(width: int, height: int, background: tuple, box_color: tuple,
              box: tuple[int, int, int, int]) -> Image:
    """Solid background with one filled rectangle, box as (x, y, w, h)."""
    arr = np.empty((height, width, 3), dtype=np.uint8)
    arr[:, :] = background
    x, y, w, h = box
    arr[y:y + h, x:x + w] = box_color
    return Image(arr)


def detection_initial(tmp_path, count: int = 5) -> TestSuite:
    """Initial detection suite over a synthetic corpus: white frames, one
    saturated 24x24 color box each, expectations matching the mock detector."""
    corpus = tmp_path / "corpus"
    names = list(MOCK_COLORS)
    cases = []
    for i in range(count):
        label = names[i % len(names)]
        box = (4 + 5 * i, 3 + 4 * i, 24, 24)
        img = box_image(64, 64, (255, 255, 255), MOCK_COLORS[label], box)
        path = corpus / f"frame{i}.png"
        save_image(img, path)
        cases.append(
            TestCase(
                id=f"frame{i}",
                image=str(path),
                expected=ExpectedDetections(boxes=(DetectionBox(label, box),)),
            )
        )
    return TestSuite(kind="initial", task="detection", cases=tuple(cases))


@pytest.fixture
def scene() -> Image:
    """Fixed structured reference image: gradient plus rectangles plus noise."""
    w = h = 96
    xs = np.linspace(0, 1, w)
    arr = np.empty((h, w, 3), dtype=np.float64)
    arr[:, :, 0] = 20 + 180 * xs
    arr[:, :, 1] = 30 + 180 * xs
    arr[:, :, 2] = 60 + 170 * xs
    arr[20:44, 12:40] = (170, 60, 50)
    arr[50:80, 48:84] = (40, 150, 90)
    arr[8:24, 60:88] = (230, 220, 90)
    noise = np.random.default_rng(7).integers(-10, 11, size=(h, w, 3))
    return Image(np.clip(arr + noise, 0, 255).astype(np.uint8))
