"""Raster image representation and lossless file I/O.

The canonical in-memory format is 8-bit RGB.  Grayscale inputs are expanded
to ``R=G=B`` and alpha channels are composited over black so that every file
decodes to the same deterministic representation.  16-bit PNG channels are
reduced to 8 bits by integer division by 257 (so 65535 maps exactly to 255).

Supported formats: PNG input (RGB, RGBA, grayscale, gray+alpha at bit depth
8 or 16, non-interlaced), binary PPM ``P6`` input (maxval 255), and PNG
output (8-bit RGB, no alpha, filter type 0 on every scanline).  The encoder
is deterministic: identical pixels always produce identical bytes.
"""

from __future__ import annotations

import os
import struct
import zlib

import numpy as np

from .errors import CorruptImageError, UnsupportedFormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# BT.601 luma weights as exact integers over 1000. Computing the weighted
# sum in integers before a single division keeps equal-channel pixels exact
# (gray (c,c,c) -> float(c)) and the result inside [0, 255].
_LUMA_WEIGHTS = (299, 587, 114)


class Image:
    """Immutable 8-bit RGB raster.

    Wraps a read-only ``(height, width, 3)`` ``uint8`` array.  Instances are
    safe to share between threads; operators always allocate a new Image.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        arr = np.ascontiguousarray(arr).copy()
        arr.flags.writeable = False
        self._pixels = arr

    @classmethod
    def new(cls, width: int, height: int, color: tuple[int, int, int] = (0, 0, 0)) -> "Image":
        """Solid-color image of the given size."""
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color
        return cls(arr)

    @property
    def pixels(self) -> np.ndarray:
        """Read-only ``(height, width, 3)`` uint8 view."""
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            np.array_equal(self._pixels, other._pixels)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height})"


def luminance(img: Image) -> np.ndarray:
    """BT.601 luma plane as float64, shape (height, width), values in [0, 255].

    ``value = (299*R + 587*G + 114*B) / 1000`` computed in real arithmetic,
    never rounded to integers.
    """
    p = img.pixels.astype(np.float64)
    wr, wg, wb = _LUMA_WEIGHTS
    return (wr * p[:, :, 0] + wg * p[:, :, 1] + wb * p[:, :, 2]) / 1000.0


def mean_luminance(img: Image) -> float:
    """Mean of the BT.601 luma plane."""
    return float(np.mean(luminance(img)))


# --------------------------------------------------------------------------
# PNG decoding


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, height: int, stride: int, bpp: int) -> np.ndarray:
    """Reverse PNG scanline filtering; returns (height, stride) uint8."""
    if len(raw) != height * (stride + 1):
        raise CorruptImageError("decompressed pixel data has the wrong length")
    recon = np.empty((height, stride), dtype=np.uint8)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        row = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos + 1).astype(np.int64)
        pos += stride + 1
        prev = recon[y - 1].astype(np.int64) if y > 0 else np.zeros(stride, dtype=np.int64)
        if ftype == 0:
            out = row
        elif ftype == 1:  # Sub: cumulative sum along each byte lane
            out = row.copy()
            for lane in range(bpp):
                out[lane::bpp] = np.cumsum(row[lane::bpp])
            out &= 0xFF
        elif ftype == 2:  # Up
            out = (row + prev) & 0xFF
        elif ftype == 3:  # Average
            out = np.empty(stride, dtype=np.int64)
            for i in range(stride):
                left = out[i - bpp] if i >= bpp else 0
                out[i] = (row[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            out = np.empty(stride, dtype=np.int64)
            for i in range(stride):
                left = int(out[i - bpp]) if i >= bpp else 0
                upleft = int(prev[i - bpp]) if i >= bpp else 0
                out[i] = (row[i] + _paeth(left, int(prev[i]), upleft)) & 0xFF
        else:
            raise CorruptImageError(f"unknown scanline filter type {ftype}")
        recon[y] = out.astype(np.uint8)
    return recon


def _iter_chunks(data: bytes):
    pos = len(_PNG_SIGNATURE)
    while True:
        if pos + 8 > len(data):
            raise CorruptImageError("file ends before IEND chunk")
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        ctype = data[pos + 4 : pos + 8]
        end = pos + 8 + length
        if end + 4 > len(data):
            raise CorruptImageError("truncated chunk")
        payload = data[pos + 8 : end]
        (crc,) = struct.unpack(">I", data[end : end + 4])
        if zlib.crc32(ctype + payload) & 0xFFFFFFFF != crc:
            raise CorruptImageError(f"CRC mismatch in {ctype!r} chunk")
        yield ctype, payload
        if ctype == b"IEND":
            return
        pos = end + 4


def _decode_png(data: bytes) -> np.ndarray:
    chunks = _iter_chunks(data)
    try:
        ctype, payload = next(chunks)
    except StopIteration:  # pragma: no cover - _iter_chunks raises first
        raise CorruptImageError("empty PNG")
    if ctype != b"IHDR" or len(payload) != 13:
        raise CorruptImageError("first chunk is not a valid IHDR")
    width, height, depth, color_type, compression, filter_method, interlace = struct.unpack(
        ">IIBBBBB", payload
    )
    if width == 0 or height == 0:
        raise CorruptImageError("zero image dimension")
    if compression != 0 or filter_method != 0:
        raise CorruptImageError("unknown compression or filter method")
    if interlace != 0:
        raise UnsupportedFormatError("interlaced PNG is not supported")
    if color_type == 3:
        raise UnsupportedFormatError("palette PNG is not supported")
    if color_type not in (0, 2, 4, 6):
        raise CorruptImageError(f"invalid color type {color_type}")
    if depth not in (8, 16):
        raise UnsupportedFormatError(f"bit depth {depth} is not supported")

    channels = {0: 1, 2: 3, 4: 2, 6: 4}[color_type]
    sample_bytes = depth // 8
    idat = bytearray()
    for ctype, payload in chunks:
        if ctype == b"IDAT":
            idat.extend(payload)
        # ancillary chunks are skipped; IEND terminates the generator
    if not idat:
        raise CorruptImageError("no IDAT chunk")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise CorruptImageError(f"broken zlib stream: {exc}") from exc

    stride = width * channels * sample_bytes
    bpp = channels * sample_bytes
    recon = _unfilter(raw, height, stride, bpp)

    if sample_bytes == 2:
        hi = recon[:, 0::2].astype(np.uint16)
        lo = recon[:, 1::2].astype(np.uint16)
        samples = (((hi << 8) | lo) // 257).astype(np.uint8)
    else:
        samples = recon
    samples = samples.reshape(height, width, channels)

    if color_type == 0:
        return np.repeat(samples, 3, axis=2)
    if color_type == 2:
        return samples
    # alpha variants: composite over black, then drop alpha
    color = samples[:, :, :-1].astype(np.float64)
    alpha = samples[:, :, -1:].astype(np.float64) / 255.0
    composited = np.clip(np.rint(color * alpha), 0, 255).astype(np.uint8)
    if color_type == 4:
        return np.repeat(composited, 3, axis=2)
    return composited


# --------------------------------------------------------------------------
# PPM (P6) decoding


def _decode_ppm(data: bytes) -> np.ndarray:
    pos = 2  # past the "P6" magic

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptImageError("truncated PPM header")
        return data[start:pos]

    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise CorruptImageError(f"malformed PPM header: {exc}") from exc
    if width <= 0 or height <= 0:
        raise CorruptImageError("non-positive PPM dimensions")
    if maxval != 255:
        raise UnsupportedFormatError(f"PPM maxval {maxval} is not supported (only 255)")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    body = data[pos : pos + expected]
    if len(body) != expected:
        raise CorruptImageError("truncated PPM pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy()


# --------------------------------------------------------------------------
# Public I/O


def load_image(path: str | os.PathLike) -> Image:
    """Decode a PNG or binary PPM (P6) file.

    Raises ``FileNotFoundError`` for missing paths, ``UnsupportedFormatError``
    for formats (or PNG variants) outside the supported set, and
    ``CorruptImageError`` for files that are recognized but broken.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(_PNG_SIGNATURE):
        return Image(_decode_png(data))
    if data.startswith(b"P6"):
        return Image(_decode_ppm(data))
    raise UnsupportedFormatError(f"{os.fspath(path)}: not a PNG or binary PPM (P6) file")


def save_image(img: Image, path: str | os.PathLike) -> None:
    """Write ``img`` as an 8-bit RGB PNG; creates parent directories.

    The encoding is lossless and deterministic: ``load_image`` of the written
    file reproduces the pixel array bit-exactly, and identical images always
    produce identical files.
    """
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    height, width = img.height, img.width

    def chunk(ctype: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + ctype
            + payload
            + struct.pack(">I", zlib.crc32(ctype + payload) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    rows = np.zeros((height, width * 3 + 1), dtype=np.uint8)
    rows[:, 1:] = img.pixels.reshape(height, width * 3)
    idat = zlib.compress(rows.tobytes(), 6)
    blob = _PNG_SIGNATURE + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")
    with open(path, "wb") as fh:
        fh.write(blob)
