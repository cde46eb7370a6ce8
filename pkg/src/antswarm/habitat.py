"""Grayscale image habitats on a toroidal lattice.

Images are plain ``uint8`` arrays of shape ``(height, width)`` wrapped in
:class:`GrayImage`.  Coordinates are ``(x, y)`` = (column, row) and wrap
around both axes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

# Moore offsets (dx, dy), excluding the center
MOORE = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


class PGMError(ValueError):
    """Raised when a PGM byte stream cannot be decoded."""


class CellCoord(NamedTuple):
    x: int
    y: int

    def wrap(self, width: int, height: int) -> "CellCoord":
        return CellCoord(self.x % width, self.y % height)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale lattice."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 3 or arr.shape[1] < 3:
            raise ValueError(f"image must be at least 3x3, got {arr.shape[1]}x{arr.shape[0]}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __getitem__(self, c) -> int:
        x, y = c
        return int(self.pixels[y % self.height, x % self.width])

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))


# --------------------------------------------------------------------------
# PGM I/O

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, pos = [], 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMError("malformed header: unexpected end of data")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def _header_int(tok: bytes, field: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise PGMError(f"malformed header: {field} is not an integer ({tok!r})") from None


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) or ASCII (P2) PGM with maxval <= 255."""
    if len(data) < 2 or data[:2] not in (b"P5", b"P2"):
        raise PGMError("malformed header: magic number must be P5 or P2")
    (magic, w_tok, h_tok, max_tok), pos = _header_tokens(data, 4)
    width = _header_int(w_tok, "width")
    height = _header_int(h_tok, "height")
    maxval = _header_int(max_tok, "maxval")
    if maxval <= 0 or maxval > 255:
        raise PGMError(f"unsupported maxval {maxval}")
    if width < 3:
        raise PGMError(f"width {width} is below the 3-cell minimum")
    if height < 3:
        raise PGMError(f"height {height} is below the 3-cell minimum")

    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        raster = data[pos + 1: pos + 1 + n]
        if len(raster) < n:
            raise PGMError(f"truncated payload: expected {n} bytes, got {len(raster)}")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < n:
            raise PGMError(f"truncated payload: expected {n} values, got {len(body)}")
        try:
            values = np.array([int(v) for v in body[:n]], dtype=np.int64)
        except ValueError:
            raise PGMError("malformed payload: non-integer sample") from None
    if values.max(initial=0) > maxval or values.min(initial=0) < 0:
        raise PGMError(f"malformed payload: sample exceeds maxval {maxval}")
    if maxval != 255:
        values = np.round(values.astype(np.float64) * 255.0 / maxval)
    return GrayImage(values.reshape(height, width).astype(np.uint8))


def dump_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def read_pgm(path) -> GrayImage:
    return load_pgm(Path(path).read_bytes())


def write_pgm(path, img: GrayImage) -> None:
    Path(path).write_bytes(dump_pgm(img))


# --------------------------------------------------------------------------
# Neighborhood statistics


def moore_neighbors(c, width: int, height: int) -> list[CellCoord]:
    x, y = c
    return [CellCoord((x + dx) % width, (y + dy) % height) for dx, dy in MOORE]


def median_gray(img: GrayImage, c) -> int:
    """Median of the 3x3 toroidal window centered on ``c`` (5th of 9 values)."""
    x, y = c
    rows = [(y + dy) % img.height for dy in (-1, 0, 1)]
    cols = [(x + dx) % img.width for dx in (-1, 0, 1)]
    window = img.pixels[np.ix_(rows, cols)].ravel()
    return int(np.partition(window, 4)[4])


def median_map(img: GrayImage) -> np.ndarray:
    """``median_gray`` evaluated at every cell, as a float64 array."""
    stack = np.stack([np.roll(img.pixels, (-dy, -dx), axis=(0, 1))
                      for dy in (-1, 0, 1) for dx in (-1, 0, 1)])
    return np.partition(stack, 4, axis=0)[4].astype(np.float64)


def delta_gl(img: GrayImage, prev, cur) -> float:
    """Absolute difference of the window medians at ``prev`` and ``cur``."""
    return float(abs(median_gray(img, prev) - median_gray(img, cur)))


# --------------------------------------------------------------------------
# Synthetic habitats

DARK = 0
LIGHT = 255


def _cross(width, height, arm=None, size=None, cx=None, cy=None, dark=DARK, light=LIGHT):
    arm = int(arm if arm is not None else max(1, min(width, height) // 5))
    size = int(size if size is not None else min(width, height))
    cx = int(cx if cx is not None else width // 2)
    cy = int(cy if cy is not None else height // 2)
    if arm < 1 or arm >= min(width, height):
        raise ValueError(f"arm width {arm} must be in [1, {min(width, height) - 1}]")
    if size < arm or size > min(width, height):
        raise ValueError(f"cross size {size} must be in [{arm}, {min(width, height)}]")
    if not (0 <= cx < width and 0 <= cy < height):
        raise ValueError(f"cross center ({cx}, {cy}) lies outside the image")
    xs = np.arange(width)[None, :]
    ys = np.arange(height)[:, None]
    x0, y0 = cx - arm // 2, cy - arm // 2
    sx0, sy0 = cx - size // 2, cy - size // 2
    vert = (xs >= x0) & (xs < x0 + arm) & (ys >= sy0) & (ys < sy0 + size)
    horiz = (ys >= y0) & (ys < y0 + arm) & (xs >= sx0) & (xs < sx0 + size)
    img = np.full((height, width), light, dtype=np.uint8)
    img[vert | horiz] = dark
    return img


def _checkerboard(width, height, tile=None, dark=DARK, light=LIGHT):
    tile = int(tile if tile is not None else max(1, min(width, height) // 4))
    if tile < 1 or tile > min(width, height):
        raise ValueError(f"tile size {tile} must be in [1, {min(width, height)}]")
    xs = np.arange(width)[None, :] // tile
    ys = np.arange(height)[:, None] // tile
    return np.where((xs + ys) % 2 == 0, light, dark).astype(np.uint8)


def _two_blob(width, height, radius=None, dark=DARK, light=LIGHT):
    radius = float(radius if radius is not None else min(width, height) / 8)
    if radius <= 0 or 4 * radius + 2 > width or 2 * radius + 2 > height:
        raise ValueError(f"radius {radius} does not fit two separate discs in {width}x{height}")
    xs = np.arange(width)[None, :]
    ys = np.arange(height)[:, None]
    cy = height / 2 - 0.5
    img = np.full((height, width), light, dtype=np.uint8)
    for cx in (width / 4 - 0.5, 3 * width / 4 - 0.5):
        img[(xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2] = dark
    return img


def _ramp(width, height):
    row = np.round(np.arange(width) * 255.0 / (width - 1))
    return np.tile(row.astype(np.uint8), (height, 1))


_SYNTHETIC = {"cross": _cross, "checkerboard": _checkerboard, "two_blob": _two_blob, "ramp": _ramp}
SYNTHETIC_KINDS = tuple(_SYNTHETIC)


def make_synthetic(kind: str, width: int, height: int, **params) -> GrayImage:
    """Build a deterministic test habitat.

    Kinds and their parameters:

    * ``cross``: dark plus sign on a light background; ``arm`` (bar width),
      ``size`` (bar length), ``cx``/``cy`` (center).
    * ``checkerboard``: alternating ``tile``-sized squares.
    * ``two_blob``: two dark discs of ``radius`` side by side.
    * ``ramp``: horizontal gradient from 0 to 255 (pixel = x when width is 256).
    """
    if kind not in _SYNTHETIC:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if width < 8 or height < 8:
        raise ValueError(f"synthetic habitats need at least 8x8 cells, got {width}x{height}")
    try:
        return GrayImage(_SYNTHETIC[kind](width, height, **params))
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None


def rotate180(img: GrayImage) -> GrayImage:
    return GrayImage(img.pixels[::-1, ::-1])


def edge_band(img: GrayImage, radius: int = 2) -> np.ndarray:
    """Boolean mask of cells within ``radius`` (Chebyshev, toroidal) of a gray-level edge.

    An edge cell is any cell whose 3x3 window is not constant.
    """
    outline = np.zeros(img.shape, dtype=bool)
    for dx, dy in MOORE:
        outline |= np.roll(img.pixels, (dy, dx), axis=(0, 1)) != img.pixels
    band = outline.copy()
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            band |= np.roll(outline, (dy, dx), axis=(0, 1))
    return band
