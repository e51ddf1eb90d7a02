"""Image modification operators.

Each operator is a pure function from an :class:`~vistest.image.Image` (plus
parameters and, where relevant, a seed) to a new Image of the same size.
Identical inputs always yield bit-identical outputs; stochastic operators
draw exclusively from :class:`~vistest.rng.SplitMix64`.

All tuning constants live in the table below so effects can be adjusted
without touching operator logic.  Fractional results are rounded with
``np.rint`` (ties to even) and clamped to [0, 255].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._kernels import correlate1d_mirror, gaussian_kernel
from .errors import DegenerateTransformError, InvalidParamsError
from .image import Image, luminance
from .rng import SplitMix64

# ---------------------------------------------------------------------------
# Constants table

BLUR_SIGMA_PER_STRENGTH = 10.0   # sigma = 10 * strength
BLUR_RADIUS_SIGMAS = 3           # kernel radius = ceil(3 * sigma)
AFFINE_DET_EPSILON = 1e-9        # |det| below this is degenerate

FOG_LATTICE_SIZE = 9             # fog mask: 9x9 value-noise lattice
SNOW_LUMA_THRESHOLD = 140.0      # pixels brighter than this are "snowed"
SNOW_DOT_DIVISOR = 200           # dots = floor(intensity * w * h / 200)
RAIN_DIVISOR = 150               # streaks = floor(intensity * w * h / 150)
RAIN_SLOPE_DEGREES = -20.0       # streak angle, measured from vertical
RAIN_LENGTH = 10                 # streak length in pixels
RAIN_COLOR = 200                 # streak gray level
RAIN_ALPHA = 0.5                 # streak blend factor
RAIN_AFTERBLUR = 0.05            # blur strength applied after streaks
SUN_GAIN = 200.0                 # flare brightness boost at its center
SUN_RADIUS_FRACTION = 0.4        # flare radius = 0.4 * min(w, h)
SHADOW_QUADS_PER_UNIT = 3        # quads = 1 + floor(intensity * 3)
SHADOW_DIM = 0.5                 # inside shadow: channels * (1 - 0.5 * intensity)

# Default similarity classification, used when a modification does not carry
# an explicit decision.  Operators below the thresholds are expected to
# preserve the system's output; everything else must provoke error handling.
SIM_BRIGHTNESS_MAX = 0.5
SIM_BLUR_MAX = 0.3
SIM_PIXEL_NOISE_FRACTION = 0.01
SIM_WEATHER_MAX = 0.7

OPERATORS = ("invert", "flip", "blur", "brightness", "pixel_noise", "affine", "weather", "blackout")
WEATHER_KINDS = ("fog", "rain", "snow", "sun", "shadow")
FLIP_AXES = ("horizontal", "vertical")


def _finish(values: np.ndarray) -> Image:
    """Round to nearest (ties to even), clamp to [0, 255], pack as Image."""
    return Image(np.clip(np.rint(values), 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# Operators


def invert(img: Image) -> Image:
    """Per-channel inversion ``c -> 255 - c``."""
    return Image(255 - img.pixels)


def flip(img: Image, axis: str) -> Image:
    """Mirror the image horizontally (left-right) or vertically (top-bottom)."""
    if axis not in FLIP_AXES:
        raise InvalidParamsError(f"axis must be one of {FLIP_AXES}, got {axis!r}")
    flipped = np.flip(img.pixels, axis=1 if axis == "horizontal" else 0)
    return Image(np.ascontiguousarray(flipped))


def blur(img: Image, strength: float) -> Image:
    """Gaussian blur with ``sigma = 10 * strength``.

    Separable convolution per channel in float64 with mirrored borders
    (reflect without repeating the edge sample).  ``strength = 0`` is the
    bit-exact identity.
    """
    _check_range("strength", strength, 0.0, 1.0)
    if strength == 0:
        return img
    sigma = BLUR_SIGMA_PER_STRENGTH * strength
    radius = math.ceil(BLUR_RADIUS_SIGMAS * sigma)
    if radius == 0:
        return img
    kernel = gaussian_kernel(sigma, radius)
    planes = img.pixels.astype(np.float64)
    out = np.empty_like(planes)
    for c in range(3):
        tmp = correlate1d_mirror(planes[:, :, c], kernel, axis=1)
        out[:, :, c] = correlate1d_mirror(tmp, kernel, axis=0)
    return _finish(out)


def brightness(img: Image, factor: float) -> Image:
    """Scale channels by ``1 + factor``; negative factors darken."""
    _check_range("factor", factor, -1.0, 1.0)
    if factor == 0:
        return img
    return _finish(img.pixels.astype(np.float64) * (1.0 + factor))


def pixel_noise(img: Image, count: int, seed: int) -> Image:
    """Set exactly ``count`` distinct pixels to black, sampled without
    replacement from the seeded generator."""
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise InvalidParamsError(f"count must be a non-negative integer, got {count!r}")
    total = img.width * img.height
    if count > total:
        raise InvalidParamsError(f"count {count} exceeds pixel count {total}")
    if count == 0:
        return img
    rng = SplitMix64(seed)
    picks = np.array(rng.sample_distinct(total, count), dtype=np.intp)
    out = img.pixels.copy()
    out.reshape(-1, 3)[picks] = 0
    return Image(out)


@dataclass(frozen=True)
class AffineParams:
    """Forward map ``(x, y) -> (a*x + b*y + c, d*x + e*y + f)`` in pixels."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def determinant(self) -> float:
        return self.a * self.e - self.b * self.d

    def validate(self) -> None:
        for name in ("a", "b", "c", "d", "e", "f"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise InvalidParamsError(f"affine coefficient {name} must be a finite number")
        if abs(self.determinant()) <= AFFINE_DET_EPSILON:
            raise DegenerateTransformError(
                f"affine matrix is degenerate (|det| = {abs(self.determinant()):g})"
            )

    def inverse(self) -> "AffineParams":
        det = self.determinant()
        ia, ib = self.e / det, -self.b / det
        id_, ie = -self.d / det, self.a / det
        return AffineParams(ia, ib, -(ia * self.c + ib * self.f), id_, ie, -(id_ * self.c + ie * self.f))


IDENTITY_AFFINE = AffineParams(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)


def affine_warp(img: Image, params: AffineParams) -> Image:
    """Warp by the affine map using inverse-mapped bilinear sampling.

    Each output pixel samples the source at the inverse-transformed
    coordinate; samples falling outside the source are black.
    """
    params.validate()
    inv = params.inverse()
    h, w = img.height, img.width
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    sx = inv.a * xs + inv.b * ys + inv.c
    sy = inv.d * xs + inv.e * ys + inv.f

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    tx = sx - x0
    ty = sy - y0

    src = img.pixels.astype(np.float64)
    acc = np.zeros((h, w, 3), dtype=np.float64)
    for dy, dx, weight in (
        (0, 0, (1 - tx) * (1 - ty)),
        (0, 1, tx * (1 - ty)),
        (1, 0, (1 - tx) * ty),
        (1, 1, tx * ty),
    ):
        px = x0 + dx
        py = y0 + dy
        valid = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        sample = np.zeros((h, w, 3), dtype=np.float64)
        sample[valid] = src[py[valid], px[valid]]
        acc += weight[:, :, None] * sample
    return _finish(acc)


def blackout(img: Image) -> Image:
    """All-black image of the same size."""
    return Image(np.zeros_like(img.pixels))


def weather(img: Image, kind: str, intensity: float, seed: int) -> Image:
    """Synthetic weather overlay; ``intensity = 0`` is the bit-exact identity.

    Random draws per kind, in documented order, all from one SplitMix64
    stream seeded with ``seed``:

    * fog    -- 81 uniforms, the 9x9 mask lattice in row-major order.
    * snow   -- per dot: x then y.
    * rain   -- per streak: x then y of the start point.
    * sun    -- flare center x, then y (y restricted to the top third).
    * shadow -- per quadrilateral: center x, y, two radius factors, four
      vertex angles.
    """
    if kind not in WEATHER_KINDS:
        raise InvalidParamsError(f"kind must be one of {WEATHER_KINDS}, got {kind!r}")
    _check_range("intensity", intensity, 0.0, 1.0)
    if intensity == 0:
        return img
    rng = SplitMix64(seed)
    if kind == "fog":
        return _weather_fog(img, intensity, rng)
    if kind == "snow":
        return _weather_snow(img, intensity, rng)
    if kind == "rain":
        return _weather_rain(img, intensity, rng)
    if kind == "sun":
        return _weather_sun(img, intensity, rng)
    return _weather_shadow(img, intensity, rng)


def fog_mask(width: int, height: int, seed: int) -> np.ndarray:
    """Smooth value-noise mask in [0, 1]: a seeded 9x9 uniform lattice
    bilinearly interpolated over a (height, width) grid."""
    rng = SplitMix64(seed)
    n = FOG_LATTICE_SIZE
    lattice = np.array([[rng.uniform() for _ in range(n)] for _ in range(n)])
    return _bilinear_upsample(lattice, width, height)


def _bilinear_upsample(lattice: np.ndarray, width: int, height: int) -> np.ndarray:
    n = lattice.shape[0]
    fx = np.zeros(width) if width == 1 else np.arange(width) * (n - 1) / (width - 1)
    fy = np.zeros(height) if height == 1 else np.arange(height) * (n - 1) / (height - 1)
    gx = np.minimum(np.floor(fx).astype(np.intp), n - 2)
    gy = np.minimum(np.floor(fy).astype(np.intp), n - 2)
    tx = (fx - gx)[None, :]
    ty = (fy - gy)[:, None]
    c00 = lattice[np.ix_(gy, gx)]
    c01 = lattice[np.ix_(gy, gx + 1)]
    c10 = lattice[np.ix_(gy + 1, gx)]
    c11 = lattice[np.ix_(gy + 1, gx + 1)]
    top = c00 * (1 - tx) + c01 * tx
    bottom = c10 * (1 - tx) + c11 * tx
    return np.clip(top * (1 - ty) + bottom * ty, 0.0, 1.0)


def _weather_fog(img: Image, intensity: float, rng: SplitMix64) -> Image:
    n = FOG_LATTICE_SIZE
    lattice = np.array([[rng.uniform() for _ in range(n)] for _ in range(n)])
    mask = _bilinear_upsample(lattice, img.width, img.height)
    p = img.pixels.astype(np.float64)
    return _finish(p + (255.0 - p) * intensity * mask[:, :, None])


def _weather_snow(img: Image, intensity: float, rng: SplitMix64) -> Image:
    p = img.pixels.astype(np.float64)
    bright = luminance(img) > SNOW_LUMA_THRESHOLD
    p[bright] += (255.0 - p[bright]) * intensity
    out = np.clip(np.rint(p), 0, 255).astype(np.uint8)
    dots = int(intensity * img.width * img.height / SNOW_DOT_DIVISOR)
    for _ in range(dots):
        x = rng.below(img.width)
        y = rng.below(img.height)
        for dx, dy in ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)):
            px, py = x + dx, y + dy
            if 0 <= px < img.width and 0 <= py < img.height:
                out[py, px] = 255
    return Image(out)


def _weather_rain(img: Image, intensity: float, rng: SplitMix64) -> Image:
    w, h = img.width, img.height
    streaks = int(intensity * w * h / RAIN_DIVISOR)
    theta = math.radians(RAIN_SLOPE_DEGREES)
    dx, dy = math.sin(theta), math.cos(theta)
    mask = np.zeros((h, w), dtype=bool)
    steps = np.arange(RAIN_LENGTH)
    for _ in range(streaks):
        x0 = rng.below(w)
        y0 = rng.below(h)
        px = np.rint(x0 + steps * dx).astype(np.int64)
        py = np.rint(y0 + steps * dy).astype(np.int64)
        ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        mask[py[ok], px[ok]] = True
    p = img.pixels.astype(np.float64)
    p[mask] = (1.0 - RAIN_ALPHA) * p[mask] + RAIN_ALPHA * RAIN_COLOR
    return blur(_finish(p), RAIN_AFTERBLUR)


def _weather_sun(img: Image, intensity: float, rng: SplitMix64) -> Image:
    w, h = img.width, img.height
    cx = rng.below(w)
    cy = rng.below(max(1, h // 3))
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    dist = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    radius = SUN_RADIUS_FRACTION * min(w, h)
    glow = SUN_GAIN * intensity * np.maximum(0.0, 1.0 - dist / radius)
    return _finish(img.pixels.astype(np.float64) + glow[:, :, None])


def _weather_shadow(img: Image, intensity: float, rng: SplitMix64) -> Image:
    w, h = img.width, img.height
    quads = 1 + int(intensity * SHADOW_QUADS_PER_UNIT)
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(quads):
        cx = float(rng.below(w))
        cy = float(rng.below(h))
        rx = (0.1 + 0.25 * rng.uniform()) * w
        ry = (0.1 + 0.25 * rng.uniform()) * h
        angles = sorted(rng.uniform() * 2.0 * math.pi for _ in range(4))
        verts = [(cx + rx * math.cos(t), cy + ry * math.sin(t)) for t in angles]
        mask |= _convex_polygon_mask(verts, xs, ys)
    p = img.pixels.astype(np.float64)
    p[mask] *= 1.0 - SHADOW_DIM * intensity
    return _finish(p)


def _convex_polygon_mask(verts: list[tuple[float, float]], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Boolean containment mask for a convex polygon given in angular order."""
    area2 = sum(
        verts[i][0] * verts[(i + 1) % len(verts)][1] - verts[(i + 1) % len(verts)][0] * verts[i][1]
        for i in range(len(verts))
    )
    orient = 1.0 if area2 >= 0 else -1.0
    inside = np.ones(xs.shape, dtype=bool)
    for i in range(len(verts)):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % len(verts)]
        cross = (x1 - x0) * (ys - y0) - (y1 - y0) * (xs - x0)
        inside &= orient * cross >= 0
    return inside


# ---------------------------------------------------------------------------
# Modification records and dispatch


@dataclass(frozen=True)
class Modification:
    """A named operator plus parameters, seed, and similarity classification.

    ``sim`` records whether the modification is expected to preserve the
    system's output (small change) or to provoke its error handling (severe
    change).  The seed is carried even for deterministic operators, where it
    is ignored.
    """

    op: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    sim: bool = False

    def validate(self) -> None:
        validate_params(self.op, self.params)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise InvalidParamsError("seed must be a 64-bit unsigned integer")
        if self.op == "blackout" and self.sim:
            raise InvalidParamsError("blackout can never be classified as similarity-preserving")

    def params_summary(self) -> str:
        """Compact deterministic one-line rendering of the parameters."""
        return json.dumps(self.params, sort_keys=True, separators=(",", ":"))

    def to_json(self) -> dict[str, Any]:
        return {"op": self.op, "params": dict(self.params), "seed": self.seed, "sim": self.sim}

    @classmethod
    def from_json(cls, obj: dict[str, Any], pixel_count: int | None = None) -> "Modification":
        """Build from the manifest representation.

        ``sim`` may be omitted in input, in which case the default
        classification table decides (``pixel_count`` supplies the image size
        context the pixel_noise rule needs).
        """
        if not isinstance(obj, dict):
            raise InvalidParamsError("modification must be a JSON object")
        unknown = set(obj) - {"op", "params", "seed", "sim"}
        if unknown:
            raise InvalidParamsError(f"unknown modification fields: {sorted(unknown)}")
        op = obj.get("op")
        if not isinstance(op, str):
            raise InvalidParamsError("modification op must be a string")
        params = obj.get("params", {})
        seed = obj.get("seed", 0)
        sim = obj.get("sim")
        if sim is None:
            sim = default_sim(op, params, pixel_count)
        elif not isinstance(sim, bool):
            raise InvalidParamsError("sim must be a boolean")
        mod = cls(op=op, params=dict(params), seed=seed, sim=sim)
        mod.validate()
        return mod


_PARAM_SCHEMAS: dict[str, dict[str, str]] = {
    "invert": {},
    "flip": {"axis": "str"},
    "blur": {"strength": "number"},
    "brightness": {"factor": "number"},
    "pixel_noise": {"count": "int"},
    "affine": {k: "number" for k in "abcdef"},
    "weather": {"kind": "str", "intensity": "number"},
    "blackout": {},
}


def validate_params(op: str, params: dict[str, Any]) -> None:
    """Check a parameter record against the named operator's schema."""
    if op not in OPERATORS:
        raise InvalidParamsError(f"unknown operator {op!r} (expected one of {OPERATORS})")
    schema = _PARAM_SCHEMAS[op]
    if not isinstance(params, dict):
        raise InvalidParamsError(f"{op}: params must be an object")
    unknown = set(params) - set(schema)
    if unknown:
        raise InvalidParamsError(f"{op}: unknown parameter(s) {sorted(unknown)}")
    missing = set(schema) - set(params)
    if missing:
        raise InvalidParamsError(f"{op}: missing parameter(s) {sorted(missing)}")
    for name, kind in schema.items():
        value = params[name]
        if isinstance(value, bool):
            raise InvalidParamsError(f"{op}: parameter {name} must not be a boolean")
        if kind == "number" and not isinstance(value, (int, float)):
            raise InvalidParamsError(f"{op}: parameter {name} must be a number")
        if kind == "number" and not math.isfinite(value):
            raise InvalidParamsError(f"{op}: parameter {name} must be finite")
        if kind == "int" and not isinstance(value, int):
            raise InvalidParamsError(f"{op}: parameter {name} must be an integer")
        if kind == "str" and not isinstance(value, str):
            raise InvalidParamsError(f"{op}: parameter {name} must be a string")
    # range checks happen in the operators themselves, but surface the cheap
    # ones here so a manifest fails before any image is touched
    if op == "flip" and params["axis"] not in FLIP_AXES:
        raise InvalidParamsError(f"flip: axis must be one of {FLIP_AXES}")
    if op == "blur":
        _check_range("strength", params["strength"], 0.0, 1.0)
    if op == "brightness":
        _check_range("factor", params["factor"], -1.0, 1.0)
    if op == "pixel_noise" and params["count"] < 0:
        raise InvalidParamsError("pixel_noise: count must be non-negative")
    if op == "affine":
        AffineParams(**{k: float(params[k]) for k in "abcdef"}).validate()
    if op == "weather":
        if params["kind"] not in WEATHER_KINDS:
            raise InvalidParamsError(f"weather: kind must be one of {WEATHER_KINDS}")
        _check_range("intensity", params["intensity"], 0.0, 1.0)


def default_sim(op: str, params: dict[str, Any], pixel_count: int | None = None) -> bool:
    """Default similarity classification for an operator instance.

    The pixel_noise rule depends on the image size; callers pass the pixel
    count of the smallest image the modification will be applied to.
    """
    validate_params(op, params)
    if op == "brightness":
        return abs(params["factor"]) <= SIM_BRIGHTNESS_MAX
    if op == "blur":
        return params["strength"] <= SIM_BLUR_MAX
    if op == "weather":
        return params["intensity"] <= SIM_WEATHER_MAX
    if op == "pixel_noise":
        if pixel_count is None:
            raise InvalidParamsError(
                "pixel_noise needs an explicit sim flag or an image-size context"
            )
        return params["count"] <= SIM_PIXEL_NOISE_FRACTION * pixel_count
    if op == "affine":
        return AffineParams(**{k: float(params[k]) for k in "abcdef"}) == IDENTITY_AFFINE
    # invert, flip, blackout
    return False


def apply(mod: Modification, img: Image) -> Image:
    """Dispatch a modification to its operator; pure in ``(mod, img)``."""
    mod.validate()
    op, p = mod.op, mod.params
    if op == "invert":
        return invert(img)
    if op == "flip":
        return flip(img, p["axis"])
    if op == "blur":
        return blur(img, float(p["strength"]))
    if op == "brightness":
        return brightness(img, float(p["factor"]))
    if op == "pixel_noise":
        return pixel_noise(img, p["count"], mod.seed)
    if op == "affine":
        return affine_warp(img, AffineParams(**{k: float(p[k]) for k in "abcdef"}))
    if op == "weather":
        return weather(img, p["kind"], float(p["intensity"]), mod.seed)
    return blackout(img)


def _check_range(name: str, value: float, lo: float, hi: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise InvalidParamsError(f"{name} must be a finite number, got {value!r}")
    if not lo <= value <= hi:
        raise InvalidParamsError(f"{name} must be within [{lo:g}, {hi:g}], got {value:g}")
