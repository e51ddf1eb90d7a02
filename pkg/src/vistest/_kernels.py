"""Separable convolution primitives shared by the blur operator and SSIM.

Everything works on float64 planes with a fixed left-to-right summation
order (a dot product per output sample), so results are bit-stable across
runs and independent of any internal parallelism.
"""

from __future__ import annotations

import numpy as np


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """1-D Gaussian taps ``exp(-i^2 / (2 sigma^2))`` for i in [-radius, radius],
    normalized to sum to 1."""
    i = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(i * i) / (2.0 * sigma * sigma))
    return k / k.sum()


def mirror_indices(n: int, radius: int) -> np.ndarray:
    """Source indices for positions ``-radius .. n-1+radius`` under
    reflect-without-repeat border handling (``d c b | a b c d | c b a``)."""
    if n == 1:
        return np.zeros(n + 2 * radius, dtype=np.intp)
    period = 2 * n - 2
    idx = np.arange(-radius, n + radius) % period
    return np.where(idx < n, idx, period - idx).astype(np.intp)


def correlate1d_mirror(plane: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along ``axis`` with mirrored borders; output shape = input shape."""
    radius = len(kernel) // 2
    idx = mirror_indices(plane.shape[axis], radius)
    padded = np.take(plane, idx, axis=axis)
    windows = np.lib.stride_tricks.sliding_window_view(padded, len(kernel), axis=axis)
    return windows @ kernel


def correlate1d_valid(plane: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along ``axis`` keeping only fully-interior positions."""
    windows = np.lib.stride_tricks.sliding_window_view(plane, len(kernel), axis=axis)
    return windows @ kernel


def separable_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2-D windowed weighted mean over interior positions of a separable kernel."""
    return correlate1d_valid(correlate1d_valid(plane, kernel, axis=1), kernel, axis=0)
