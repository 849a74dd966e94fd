"""2D discrete Fourier transform and amplitude-spectrum feature extraction.

Convention: the forward transform carries the full 1/N^2 prefactor (split
as 1/N per separable pass), so F(0,0) is the mean gray level and the
inverse transform is a plain unscaled double sum. Spectra are tagged with
the convention and the inverse refuses anything else.

The transform is evaluated by direct summation, O(N^3) through the
row/column split. No radix FFT is used; `dft2_naive` keeps the O(N^4)
double sum around as a cross-check oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, PuckerError
from .image import GrayImage

FORWARD_OVER_N2 = "forward-1/n2"

DEFAULT_TRANSFORM_SIZE = 256
DEFAULT_FEATURE_SIDE = 100


class ConventionMismatchError(PuckerError):
    """Spectrum was produced under a different normalization convention."""


class DegenerateFeatureError(DataError):
    """Feature vector is all-zero before normalization."""


@dataclass(frozen=True)
class Spectrum:
    """Square complex spectrum under the forward-1/N^2 convention."""

    values: np.ndarray
    convention: str = FORWARD_OVER_N2

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"expected a square complex grid, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    """Flattened, L2-normalized down-sampled amplitude map."""

    side: int
    data: np.ndarray
    norm: str = "l2"

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.shape != (self.side * self.side,):
            raise ValueError(f"expected {self.side * self.side} values, got shape {d.shape}")
        if (d < 0).any():
            raise ValueError("feature values must be non-negative")
        if abs(np.sqrt((d * d).sum()) - 1.0) > 1e-9:
            raise ValueError("feature vector must be L2-normalized")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)


def prepare_square(img: GrayImage, n: int) -> GrayImage:
    """Center-crop to a square, then area-resample to n x n."""
    if n < 1:
        raise ValueError("target size must be >= 1")
    s = min(img.width, img.height)
    top = (img.height - s) // 2
    left = (img.width - s) // 2
    square = img.pixels[top : top + s, left : left + s]
    if s == n:
        return GrayImage(square)
    # box-filter resampling: target pixel i covers source span
    # [i*s/n, (i+1)*s/n); weights are the fractional overlaps
    w = np.zeros((n, s))
    for i in range(n):
        lo = i * s / n
        hi = (i + 1) * s / n
        j0, j1 = int(np.floor(lo)), min(int(np.ceil(hi)), s)
        for j in range(j0, j1):
            w[i, j] = (min(hi, j + 1) - max(lo, j)) * (n / s)
    resampled = w @ square.astype(np.float64) @ w.T
    return GrayImage(np.clip(np.floor(resampled + 0.5), 0, 255).astype(np.uint8))


def _basis(n: int) -> np.ndarray:
    # reduce k*m mod n before taking the angle; keeps cancellation exact
    # for the DC row/column and accurate everywhere else
    idx = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n)


def _square_pixels(img: GrayImage) -> np.ndarray:
    if img.width != img.height:
        raise ValueError(f"transform needs a square image, got {img.width}x{img.height}")
    return img.pixels.astype(np.float64)


def dft2_naive(img: GrayImage) -> Spectrum:
    """Direct double-sum transform, (1/N^2) sum f(m,n) e^{-i2pi(km+ln)/N}.

    O(N^4); kept as the oracle the separable transform is checked against.
    """
    f = _square_pixels(img)
    n = f.shape[0]
    m_grid, n_grid = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    out = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        for l in range(n):
            phase = np.exp(-2j * np.pi * ((k * m_grid + l * n_grid) % n) / n)
            out[k, l] = (f * phase).sum()
    return Spectrum(out / (n * n))


def dft2(img: GrayImage) -> Spectrum:
    """Separable transform: a 1/N column pass then a 1/N row pass."""
    f = _square_pixels(img)
    n = f.shape[0]
    e = _basis(n)
    col_pass = (e @ f) / n  # P(k, n): 1D transforms down each column
    return Spectrum((col_pass @ e) / n)


def idft2(spec: Spectrum) -> np.ndarray:
    """Inverse transform: unscaled double sum with the conjugate basis.

    Returns the real part; for spectra of real images the imaginary
    residue is at rounding level.
    """
    if spec.convention != FORWARD_OVER_N2:
        raise ConventionMismatchError(f"cannot invert convention {spec.convention!r}")
    e_conj = np.conj(_basis(spec.n))
    return np.real(e_conj @ spec.values @ e_conj)


def amplitude(spec: Spectrum) -> np.ndarray:
    """Element-wise magnitude |F(k,l)|."""
    return np.abs(spec.values)


def phase(spec: Spectrum) -> np.ndarray:
    """Element-wise argument in (-pi, pi]; zero bins get phase 0."""
    ph = np.angle(spec.values)
    ph[np.abs(spec.values) == 0.0] = 0.0
    ph[ph == -np.pi] = np.pi
    return ph


def center_dc(grid: np.ndarray) -> np.ndarray:
    """Rotate indices by N/2 on both axes so the DC bin sits at the center."""
    n = grid.shape[0]
    return np.roll(grid, (n // 2, n // 2), axis=(0, 1))


def spectrum_image(amps: np.ndarray) -> GrayImage:
    """Log-scaled display of an amplitude map, DC shifted to the center."""
    shown = np.log1p(center_dc(np.asarray(amps, dtype=np.float64)))
    lo, hi = shown.min(), shown.max()
    if hi == lo:
        return GrayImage(np.zeros(shown.shape, dtype=np.uint8))
    scaled = (shown - lo) / (hi - lo) * 255.0
    return GrayImage(np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8))


def phase_image(phases: np.ndarray) -> GrayImage:
    """Display of a phase map: centered, (-pi, pi] mapped linearly to [0, 255]."""
    shown = center_dc(np.asarray(phases, dtype=np.float64))
    scaled = (shown + np.pi) / (2 * np.pi) * 255.0
    return GrayImage(np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8))


def _block_bounds(n: int, side: int) -> np.ndarray:
    # even split; the n % side leftover pixels widen the trailing blocks
    base, rem = divmod(n, side)
    sizes = np.full(side, base, dtype=np.int64)
    sizes[side - rem :] += 1 if rem else 0
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return starts, sizes


def extract_features(amps: np.ndarray, side: int = DEFAULT_FEATURE_SIDE, include_dc: bool = False) -> FeatureVector:
    """Down-sample a centered amplitude map into an L2-normalized feature vector.

    The map is centered, cut into side x side rectangular blocks and each
    block reduced to its mean. With include_dc off (the default) the DC
    bin is zeroed first so overall brightness cannot dominate.
    """
    a = np.asarray(amps, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square amplitude map, got shape {a.shape}")
    n = a.shape[0]
    if n < side:
        raise ValueError(f"amplitude map size {n} smaller than feature side {side}")
    centered = center_dc(a)
    if not include_dc:
        centered = centered.copy()
        centered[n // 2, n // 2] = 0.0
    starts, sizes = _block_bounds(n, side)
    pooled = np.add.reduceat(np.add.reduceat(centered, starts, axis=0), starts, axis=1)
    pooled /= np.outer(sizes, sizes)
    flat = pooled.ravel()
    norm = float(np.sqrt((flat * flat).sum()))
    if norm == 0.0:
        raise DegenerateFeatureError("all-zero feature vector (constant image with DC excluded?)")
    return FeatureVector(side, flat / norm)


# ------------------------------------------------------- feature vector file

_FV_HEADER = struct.Struct("<I")


def save_features(path: str | Path, fv: FeatureVector) -> None:
    """Write a feature vector: u32 LE side, then side^2 little-endian f64."""
    Path(path).write_bytes(_FV_HEADER.pack(fv.side) + fv.data.astype("<f8").tobytes())


def load_features(path: str | Path) -> FeatureVector:
    data = Path(path).read_bytes()
    if len(data) < _FV_HEADER.size:
        raise DataError("truncated feature file")
    (side,) = _FV_HEADER.unpack_from(data)
    body = data[_FV_HEADER.size :]
    if len(body) != side * side * 8:
        raise DataError(f"feature payload length {len(body)} does not match side {side}")
    return FeatureVector(side, np.frombuffer(body, dtype="<f8").astype(np.float64))
