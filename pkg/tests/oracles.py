"""Independent brute-force reference implementations used to check the
optimized library code.  These deliberately share no code with the package:
plain window extraction, explicit reflection arithmetic, and per-window
numpy sums instead of separable convolution."""

import math

import numpy as np


def naive_luma(pixels: np.ndarray) -> np.ndarray:
    p = pixels.astype(np.float64)
    return 0.299 * p[:, :, 0] + 0.587 * p[:, :, 1] + 0.114 * p[:, :, 2]


def gaussian_window_2d(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    gx, gy = np.meshgrid(coords, coords)
    k = np.exp(-(gx * gx + gy * gy) / (2.0 * sigma * sigma))
    return k / k.sum()


def naive_mssim(a_pixels: np.ndarray, b_pixels: np.ndarray, window: int = 11,
                sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03,
                dynamic_range: float = 255.0) -> tuple[float, np.ndarray]:
    """Direct double loop over window positions."""
    x = naive_luma(a_pixels)
    y = naive_luma(b_pixels)
    kernel = gaussian_window_2d(window, sigma)
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    h, w = x.shape
    out = np.empty((h - window + 1, w - window + 1))
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            xw = x[i:i + window, j:j + window]
            yw = y[i:i + window, j:j + window]
            mu_x = float(np.sum(kernel * xw))
            mu_y = float(np.sum(kernel * yw))
            sxx = float(np.sum(kernel * xw * xw)) - mu_x * mu_x
            syy = float(np.sum(kernel * yw * yw)) - mu_y * mu_y
            sxy = float(np.sum(kernel * xw * yw)) - mu_x * mu_y
            out[i, j] = ((2 * mu_x * mu_y + c1) * (2 * sxy + c2)) / (
                (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
            )
    return float(np.mean(out)), out


def reflect(i: int, n: int) -> int:
    """Mirror-without-repeat index reflection."""
    if n == 1:
        return 0
    period = 2 * n - 2
    i %= period
    return i if i < n else period - i


def naive_gaussian_blur(pixels: np.ndarray, strength: float) -> np.ndarray:
    """Full 2-D convolution with explicit reflection, unrounded floats."""
    sigma = 10.0 * strength
    radius = math.ceil(3 * sigma)
    half = np.arange(-radius, radius + 1, dtype=np.float64)
    gx, gy = np.meshgrid(half, half)
    kernel = np.exp(-(gx * gx + gy * gy) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()
    h, w, _ = pixels.shape
    src = pixels.astype(np.float64)
    out = np.zeros((h, w, 3))
    for y in range(h):
        for x in range(w):
            acc = np.zeros(3)
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    weight = kernel[dy + radius, dx + radius]
                    acc += weight * src[reflect(y + dy, h), reflect(x + dx, w)]
            out[y, x] = acc
    return out


def naive_mse(a_pixels: np.ndarray, b_pixels: np.ndarray) -> float:
    """Plain Python accumulation over every channel of every pixel."""
    h, w, _ = a_pixels.shape
    total = 0.0
    for y in range(h):
        for x in range(w):
            for c in range(3):
                d = float(a_pixels[y, x, c]) - float(b_pixels[y, x, c])
                total += d * d
    return total / (h * w * 3)
