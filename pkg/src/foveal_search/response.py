"""Per-patch saliency features, the response expectation map, and noisy responses."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInputError, ValidationError
from .raster import GrayImage, PatchGrid, quantize_8bit

BLOCK = 8
EPS_DIV = 1e-6
B_MAX = 100.0

# (image, grid) -> length-M non-negative blockiness vector
DistortionProvider = Callable[[GrayImage, PatchGrid], np.ndarray]


@dataclass(frozen=True)
class Exponents:
    beta: float = 1.0
    gamma: float = 1.0
    eta: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if not all(np.isfinite(v) for v in self.as_tuple()):
            raise ValidationError(f"exponents must be finite, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.beta, self.gamma, self.eta, self.tau)

    @classmethod
    def parse(cls, text: str) -> "Exponents":
        """Parse ``"b,g,e,t"`` (three values leave tau at 1)."""
        try:
            parts = [float(p) for p in text.split(",")]
        except ValueError as exc:
            raise ValidationError(f"bad exponent list {text!r}") from exc
        if len(parts) not in (3, 4):
            raise ValidationError(f"expected 3 or 4 comma-separated exponents, got {text!r}")
        return cls(*parts)


@dataclass(frozen=True, eq=False)
class FeatureChannels:
    contrast: np.ndarray
    luminance: np.ndarray
    entropy: np.ndarray
    blockiness: Optional[np.ndarray] = None

    def __post_init__(self):
        m = len(self.contrast)
        lengths = [len(self.luminance), len(self.entropy)]
        if self.blockiness is not None:
            lengths.append(len(self.blockiness))
        if any(n != m for n in lengths):
            raise ValidationError("feature channels must all have the same length")

    @property
    def size(self) -> int:
        return len(self.contrast)

    def with_blockiness(self, blockiness) -> "FeatureChannels":
        return FeatureChannels(self.contrast, self.luminance, self.entropy,
                               np.asarray(blockiness, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ResponseExpectation:
    values: np.ndarray
    scale: float
    exponents: Exponents

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ResponseSample:
    values: np.ndarray
    fixation: int


def patch_entropy(patches: np.ndarray) -> np.ndarray:
    """Shannon entropy in bits of each row's 256-level histogram."""
    q = quantize_8bit(patches).astype(np.int64)
    m, n = q.shape
    offsets = (np.arange(m) * 256)[:, None]
    counts = np.bincount((q + offsets).ravel(), minlength=m * 256).reshape(m, 256)
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return np.maximum(-terms.sum(axis=1), 0.0)


def extract_features(image: GrayImage, grid: PatchGrid,
                     distortion_provider: Optional[DistortionProvider] = None) -> FeatureChannels:
    patches = grid.patches(image)
    luminance = patches.mean(axis=1)
    contrast = patches.std(axis=1)
    entropy = patch_entropy(patches)
    blockiness = None
    if distortion_provider is not None:
        blockiness = _check_blockiness(distortion_provider(image, grid), grid.size)
    return FeatureChannels(contrast, luminance, entropy, blockiness)


def compute_blockiness_map(image: GrayImage, grid: PatchGrid) -> np.ndarray:
    """Ratio of mean |step| across 8-px block boundaries to mean |step| elsewhere.

    Only neighbour pairs with both pixels inside the same patch count. Smooth
    content scores about 1; block-coded content scores far above 1.
    """
    if image.width < 16 or image.height < 16:
        raise ValidationError("blockiness estimation needs an image of at least 16x16")
    grid.check_image(image)
    s = grid.patch_size
    px = image.pixels[: grid.rows * s, : grid.cols * s]

    bnd_sum = np.zeros(grid.size)
    bnd_cnt = np.zeros(grid.size)
    other_sum = np.zeros(grid.size)
    other_cnt = np.zeros(grid.size)

    for diffs, along in ((np.abs(np.diff(px, axis=1)), "x"), (np.abs(np.diff(px, axis=0)), "y")):
        ys, xs = np.indices(diffs.shape)
        first = xs if along == "x" else ys  # coordinate of the left/upper pixel of each pair
        inside = (first + 1) % s != 0
        boundary = (first + 1) % BLOCK == 0
        patch = (ys // s) * grid.cols + xs // s
        for mask, acc_sum, acc_cnt in ((inside & boundary, bnd_sum, bnd_cnt),
                                       (inside & ~boundary, other_sum, other_cnt)):
            idx = patch[mask]
            acc_sum += np.bincount(idx, weights=diffs[mask], minlength=grid.size)
            acc_cnt += np.bincount(idx, minlength=grid.size)

    with np.errstate(invalid="ignore", divide="ignore"):
        bnd_mean = np.where(bnd_cnt > 0, bnd_sum / np.maximum(bnd_cnt, 1), 0.0)
        other_mean = np.where(other_cnt > 0, other_sum / np.maximum(other_cnt, 1), 0.0)
    return np.clip(bnd_mean / (other_mean + EPS_DIV), 0.0, B_MAX)


def load_blockiness_map(path, grid: PatchGrid) -> np.ndarray:
    text = Path(path).read_text()
    try:
        values = np.array([float(tok) for tok in text.split()], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: blockiness map holds a non-numeric entry") from exc
    return _check_blockiness(values, grid.size, source=str(path))


def write_blockiness_map(values, path) -> None:
    """Plain-text writer that `load_blockiness_map` reads back bit-exactly."""
    values = np.asarray(values, dtype=np.float64).ravel()
    Path(path).write_text("\n".join(repr(float(v)) for v in values) + "\n")


class BlockinessMapFile:
    """Distortion provider backed by an externally computed map on disk."""

    def __init__(self, path):
        self.path = Path(path)

    def __call__(self, image: GrayImage, grid: PatchGrid) -> np.ndarray:
        return load_blockiness_map(self.path, grid)

    def __repr__(self):
        return f"BlockinessMapFile({str(self.path)!r})"


def _check_blockiness(values, m: int, source: str = "distortion provider") -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size != m:
        raise ValidationError(f"{source}: expected {m} blockiness values, got {values.size}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValidationError(f"{source}: blockiness values must be finite and non-negative")
    return values


def histogram_equalize(values) -> np.ndarray:
    """Average-rank equalization: rank / M, ties share their mean rank."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValidationError("histogram equalization needs a non-empty finite map")
    return rankdata(values, method="average") / values.size


def compute_expectation(features: FeatureChannels, exponents: Exponents = Exponents(),
                        distorted: bool = False) -> ResponseExpectation:
    """Mean-one response expectation from the feature channels.

    Pristine: C^beta * L^gamma * H^eta. Distorted: that product scaled to mean
    one, times the histogram-equalized blockiness raised to tau.
    """
    if distorted and features.blockiness is None:
        raise ValidationError("distorted mode requires a blockiness channel")
    if not distorted and features.blockiness is not None:
        raise ValidationError("pristine mode takes no blockiness channel")

    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        raw = (np.power(features.contrast, exponents.beta)
               * np.power(features.luminance, exponents.gamma)
               * np.power(features.entropy, exponents.eta))
        if distorted:
            raw, _ = _mean_one(raw, "saliency product")
            raw = raw * np.power(histogram_equalize(features.blockiness), exponents.tau)
    values, scale = _mean_one(raw, "response map")
    values.setflags(write=False)
    return ResponseExpectation(values, scale, exponents)


def _mean_one(raw: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    if not np.all(np.isfinite(raw)) or np.any(raw < 0):
        raise DegenerateInputError(f"{what} has non-finite or negative entries")
    mean = raw.mean()
    if mean <= 0:
        raise DegenerateInputError(f"{what} is identically zero")
    return raw / mean, float(1.0 / mean)


def sample_response(expectation: ResponseExpectation, visibility, rng: np.random.Generator,
                    fixation: int = -1, zero_noise: bool = False) -> ResponseSample:
    """Noisy responses W = E + z / d' from one fixation; z ~ N(0, 1) per patch."""
    d = np.asarray(visibility, dtype=np.float64)
    if d.shape != expectation.values.shape:
        raise ValidationError(f"visibility row has shape {d.shape}, expected {expectation.values.shape}")
    if zero_noise:
        return ResponseSample(expectation.values.copy(), fixation)
    z = rng.standard_normal(d.size)
    return ResponseSample(expectation.values + z / d, fixation)
