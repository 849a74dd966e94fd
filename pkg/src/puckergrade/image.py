"""Image containers and file I/O (binary PGM and 8-bit PNG).

Images are immutable once constructed: the backing arrays are marked
read-only so instances can be shared freely across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage, UnidentifiedImageError

from .errors import DataError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# fmt applied to the luma sum; round-half-up keeps the conversion bit-exact
# across platforms (np.rint would round half to even).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class UnsupportedFormatError(DataError):
    """File is neither a PNG nor a binary (P5) PGM."""


class CorruptDataError(DataError):
    """File payload is truncated or internally inconsistent."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image, pixels[row, col] in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.size == 0:
            raise ValueError(f"expected a non-empty 2D pixel grid, got shape {p.shape}")
        if p.dtype != np.uint8:
            if not np.issubdtype(p.dtype, np.integer):
                raise ValueError("gray pixels must be integers in [0, 255]")
            if p.min() < 0 or p.max() > 255:
                raise ValueError("gray pixels out of [0, 255]")
            p = p.astype(np.uint8)
        object.__setattr__(self, "pixels", _freeze(p))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB image, pixels[row, col] = (r, g, b)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[0] == 0 or p.shape[1] == 0:
            raise ValueError(f"expected a non-empty (h, w, 3) pixel grid, got shape {p.shape}")
        if p.dtype != np.uint8:
            if not np.issubdtype(p.dtype, np.integer):
                raise ValueError("rgb pixels must be integers in [0, 255]")
            if p.min() < 0 or p.max() > 255:
                raise ValueError("rgb pixels out of [0, 255]")
            p = p.astype(np.uint8)
        object.__setattr__(self, "pixels", _freeze(p))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def to_grayscale(img: RgbImage) -> GrayImage:
    """Convert RGB to gray: round-half-up of 0.299 r + 0.587 g + 0.114 b."""
    rgb = img.pixels.astype(np.float64)
    luma = rgb[:, :, 0] * LUMA_WEIGHTS[0] + rgb[:, :, 1] * LUMA_WEIGHTS[1] + rgb[:, :, 2] * LUMA_WEIGHTS[2]
    gray = np.clip(np.floor(luma + 0.5), 0, 255)
    return GrayImage(gray.astype(np.uint8))


# ---------------------------------------------------------------- PGM (P5)


def decode_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5, maxval 255) byte string."""
    stream = io.BytesIO(data)
    if stream.read(2) != b"P5":
        raise UnsupportedFormatError("not a binary P5 PGM")

    def next_token() -> bytes:
        tok = b""
        while True:
            c = stream.read(1)
            if c == b"":
                raise CorruptDataError("truncated PGM header")
            if c == b"#":  # comment runs to end of line
                while c not in (b"\n", b"\r", b""):
                    c = stream.read(1)
                continue
            if c.isspace():
                if tok:
                    return tok
                continue
            tok += c

    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise CorruptDataError("non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise CorruptDataError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"only maxval 255 PGM supported, got {maxval}")
    payload = stream.read(width * height)
    if len(payload) < width * height:
        raise CorruptDataError("truncated PGM payload")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def encode_pgm(img: GrayImage) -> bytes:
    """Encode as binary PGM: single whitespace-delimited header, maxval 255."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# ---------------------------------------------------------------- PNG


def _decode_png(data: bytes) -> RgbImage | GrayImage:
    try:
        pil = _PILImage.open(io.BytesIO(data))
        pil.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptDataError(f"cannot decode PNG: {exc}") from exc
    # alpha, palette and sub-8-bit depths are normalized away; only the
    # gray/color distinction decides the return type
    if pil.mode in ("1", "L", "LA", "I", "I;16"):
        return GrayImage(np.asarray(pil.convert("L")))
    return RgbImage(np.asarray(pil.convert("RGB")))


def load_image(path: str | Path) -> RgbImage | GrayImage:
    """Load a PNG or binary-P5 PGM file, sniffing the format from its bytes."""
    data = Path(path).read_bytes()
    if len(data) == 0:
        raise CorruptDataError(f"empty image file: {path}")
    if data[:2] == b"P5":
        return decode_pgm(data)
    if data[: len(PNG_SIGNATURE)] == PNG_SIGNATURE:
        return _decode_png(data)
    raise UnsupportedFormatError(f"unrecognized image format: {path}")


def save_image(path: str | Path, img: GrayImage | RgbImage) -> None:
    """Write an image as PNG or binary PGM depending on the file suffix."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        if isinstance(img, RgbImage):
            img = to_grayscale(img)
        path.write_bytes(encode_pgm(img))
        return
    mode = "L" if isinstance(img, GrayImage) else "RGB"
    _PILImage.fromarray(np.asarray(img.pixels), mode).save(path, format="PNG")
