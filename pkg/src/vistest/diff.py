"""Image similarity metrics: windowed structural similarity and MSE.

Structural similarity is computed on BT.601 luminance planes over every
fully-interior window position (no padding), with an 11x11 Gaussian weight
window (sigma 1.5) and the conventional stabilizers ``C1 = (k1*L)^2`` and
``C2 = (k2*L)^2``.  The mean over all window positions is reported raw: the
formula admits negative values for anti-correlated windows, and we never
silently distort the metric (callers that want a [0, 1] display can clamp).

All accumulation happens in 64-bit floats with a fixed summation order, so
results are bit-stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import gaussian_kernel, separable_valid
from .errors import DimensionMismatchError, ImageTooSmallError, InvalidParamsError
from .image import Image, luminance


@dataclass(frozen=True)
class SsimParams:
    """Window geometry and stabilizer constants."""

    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def validate(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidParamsError(f"window must be odd and >= 3, got {self.window}")
        if self.sigma <= 0 or self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise InvalidParamsError("sigma, k1, k2 and dynamic_range must all be positive")


@dataclass(frozen=True)
class SsimResult:
    """Mean similarity plus the per-window-position map it averages."""

    mean: float
    map: np.ndarray  # shape (h - window + 1, w - window + 1)


def _check_dims(a: Image, b: Image) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatchError(
            f"images differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mssim(a: Image, b: Image, params: SsimParams = SsimParams()) -> SsimResult:
    """Mean structural similarity between two same-sized images.

    For each window position, with normalized Gaussian weights ``w``:

        mu_x  = sum(w * x)          sigma_x2 = sum(w * x^2) - mu_x^2
        mu_y  = sum(w * y)          sigma_y2 = sum(w * y^2) - mu_y^2
        sigma_xy = sum(w * x * y) - mu_x * mu_y

        ssim = ((2 mu_x mu_y + C1) (2 sigma_xy + C2))
             / ((mu_x^2 + mu_y^2 + C1) (sigma_x2 + sigma_y2 + C2))

    Raises ``DimensionMismatchError`` for differing sizes and
    ``ImageTooSmallError`` when either dimension is below the window.
    """
    params.validate()
    _check_dims(a, b)
    if a.width < params.window or a.height < params.window:
        raise ImageTooSmallError(
            f"image {a.width}x{a.height} is smaller than the {params.window}-pixel window"
        )
    x = luminance(a)
    y = luminance(b)
    kernel = gaussian_kernel(params.sigma, params.window // 2)

    mu_x = separable_valid(x, kernel)
    mu_y = separable_valid(y, kernel)
    sigma_x2 = separable_valid(x * x, kernel) - mu_x * mu_x
    sigma_y2 = separable_valid(y * y, kernel) - mu_y * mu_y
    sigma_xy = separable_valid(x * y, kernel) - mu_x * mu_y

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * sigma_xy + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x2 + sigma_y2 + c2)
    )
    return SsimResult(mean=float(np.mean(ssim_map)), map=ssim_map)


def mse(a: Image, b: Image) -> float:
    """Mean squared difference over all pixels and all three channels."""
    _check_dims(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))
