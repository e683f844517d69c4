"""Grayscale rasters, the patch lattice, and 1/f noise stimuli."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, ValidationError

# Rec.601 luma weights in thousandths; integer arithmetic keeps gray RGB exact
REC601_MILLI = np.array([299, 587, 114], dtype=np.int64)
SUPPORTED_FORMATS = {"PNG", "BMP", "PPM"}  # Pillow reports PGM files as "PPM"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Luminance raster with values in [0, 1], stored as an (H, W) float64 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValidationError(f"expected a 2-D pixel array, got shape {px.shape}")
        if px.shape[0] == 0 or px.shape[1] == 0:
            raise ValidationError(f"zero-dimension image {px.shape[1]}x{px.shape[0]}")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ValidationError("pixel values must be finite and lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


def load_gray_image(path) -> GrayImage:
    """Read a PNG, BMP or PGM file and convert it to Rec.601 luminance in [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in SUPPORTED_FORMATS:
                raise ImageFormatError(f"{path}: unsupported raster format {fmt!r}")
            im.load()
            if im.width == 0 or im.height == 0:
                raise ValidationError(f"{path}: zero-dimension image")
            gray = _to_luminance(im)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a recognised raster file") from exc
    return GrayImage(gray)


def _to_luminance(im: Image.Image) -> np.ndarray:
    mode = im.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(im, dtype=np.float64)
        top = 65535.0 if arr.max(initial=0) > 255 else 255.0
        return np.clip(arr / top, 0.0, 1.0)
    if mode == "F":
        return np.clip(np.asarray(im, dtype=np.float64), 0.0, 1.0)
    if mode in ("1", "L", "LA"):
        arr = np.asarray(im.convert("L"), dtype=np.float64)
        return arr / 255.0
    rgb = np.asarray(im.convert("RGB"), dtype=np.int64)
    return (rgb @ REC601_MILLI) / (1000.0 * 255.0)


def quantize_8bit(values) -> np.ndarray:
    """Map [0, 1] to 0..255 with round-half-up."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def write_pgm(values, path) -> None:
    """Write a 2-D array of [0, 1] values as a binary 8-bit PGM (P5)."""
    if isinstance(values, GrayImage):
        values = values.pixels
    q = quantize_8bit(values)
    if q.ndim != 2:
        raise ValidationError(f"PGM output needs a 2-D array, got shape {q.shape}")
    header = f"P5\n{q.shape[1]} {q.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(q.tobytes())


def minmax_normalize(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


@dataclass(frozen=True)
class PatchGrid:
    """Lattice of square patches; patch i sits at row i // cols, column i % cols."""

    patch_size: int
    cols: int
    rows: int

    @property
    def size(self) -> int:
        return self.cols * self.rows

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @cached_property
    def centers(self) -> np.ndarray:
        """(M, 2) array of (x, y) pixel coordinates, row-major."""
        s = self.patch_size
        rr, cc = np.divmod(np.arange(self.size), self.cols)
        out = np.column_stack([cc * s + s / 2, rr * s + s / 2]).astype(np.float64)
        out.setflags(write=False)
        return out

    def center_of(self, index: int) -> tuple[float, float]:
        x, y = self.centers[index]
        return float(x), float(y)

    def cell_of(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.size:
            raise ValidationError(f"patch index {index} outside 0..{self.size - 1}")
        return divmod(index, self.cols)

    def index_of(self, x: float, y: float) -> int:
        col, row = int(x // self.patch_size), int(y // self.patch_size)
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValidationError(f"pixel ({x}, {y}) lies outside the patch grid")
        return row * self.cols + col

    def nearest_index(self, x: float, y: float) -> int:
        """Patch whose center is closest to (x, y); lowest index wins ties."""
        d2 = (self.centers[:, 0] - x) ** 2 + (self.centers[:, 1] - y) ** 2
        return int(np.argmin(d2))

    def patches(self, image: GrayImage) -> np.ndarray:
        """(M, patch_size**2) view of the pixels of every patch."""
        self.check_image(image)
        s = self.patch_size
        px = image.pixels[: self.rows * s, : self.cols * s]
        blocks = px.reshape(self.rows, s, self.cols, s).swapaxes(1, 2)
        return blocks.reshape(self.size, s * s)

    def to_map(self, values) -> np.ndarray:
        """Reshape a length-M vector to (rows, cols)."""
        v = np.asarray(values)
        if v.shape != (self.size,):
            raise ValidationError(f"expected {self.size} per-patch values, got shape {v.shape}")
        return v.reshape(self.rows, self.cols)

    def check_image(self, image: GrayImage) -> None:
        s = self.patch_size
        if image.width // s != self.cols or image.height // s != self.rows:
            raise ValidationError(
                f"grid {self.cols}x{self.rows} of {s}px patches does not match "
                f"image {image.width}x{image.height}"
            )


def build_patch_grid(image: GrayImage, patch_size: int = 16) -> PatchGrid:
    if patch_size < 2:
        raise ValidationError(f"patch_size must be >= 2, got {patch_size}")
    if patch_size > image.width or patch_size > image.height:
        raise ValidationError(
            f"patch_size {patch_size} exceeds image {image.width}x{image.height}"
        )
    return PatchGrid(patch_size, image.width // patch_size, image.height // patch_size)


def synthesize_one_over_f(width: int, height: int, seed: int) -> GrayImage:
    """Random-phase noise whose amplitude spectrum falls as 1/f.

    The DC amplitude is zeroed, so the image mean is set entirely by the
    final affine rescale to [0, 1].
    """
    if width < 8 or height < 8:
        raise ValidationError(f"1/f stimulus needs at least 8x8 pixels, got {width}x{height}")
    rng = np.random.default_rng(seed)
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    f = np.hypot(fx, fy)
    f[0, 0] = 1.0
    amplitude = 1.0 / f
    amplitude[0, 0] = 0.0
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(height, width))
    field = np.fft.ifft2(amplitude * np.exp(1j * phase)).real
    lo, hi = field.min(), field.max()
    return GrayImage((field - lo) / (hi - lo))

