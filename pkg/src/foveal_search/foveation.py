"""Eccentricity-dependent detectability between patches and fixation points."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ResourceError, ValidationError
from .raster import PatchGrid

DEFAULT_TABLE_BUDGET = 1 << 30  # bytes


@dataclass(frozen=True)
class VisibilityProfile:
    """Gaussian falloff of d' with eccentricity, clamped below at ``floor``."""

    mu: float = 5.0
    sigma: float = 50.0
    floor: float = 0.01

    def __post_init__(self):
        if not (self.mu > self.floor > 0):
            raise ValidationError(f"need mu > floor > 0, got mu={self.mu}, floor={self.floor}")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")

    def falloff(self, eccentricity):
        """exp(-e^2 / 2 sigma^2), the unscaled, unclamped kernel (also used for inhibition)."""
        e = np.asarray(eccentricity, dtype=np.float64)
        return np.exp(-(e * e) / (2.0 * self.sigma * self.sigma))


def eccentricity(center_i, center_k) -> float:
    """Euclidean distance in pixels."""
    return float(np.hypot(center_i[0] - center_k[0], center_i[1] - center_k[1]))


def detectability(profile: VisibilityProfile, eccentricity):
    """d' = max(floor, mu * exp(-e^2 / 2 sigma^2)); accepts scalars or arrays."""
    e = np.asarray(eccentricity, dtype=np.float64)
    if np.any(e < 0):
        raise ValidationError("eccentricity must be non-negative")
    d = np.maximum(profile.floor, profile.mu * profile.falloff(e))
    return float(d) if d.ndim == 0 else d


def pairwise_eccentricity(centers_a: np.ndarray, centers_b: np.ndarray) -> np.ndarray:
    dx = centers_a[:, None, 0] - centers_b[None, :, 0]
    dy = centers_a[:, None, 1] - centers_b[None, :, 1]
    return np.hypot(dx, dy)


@dataclass(frozen=True, eq=False)
class VisibilityTable:
    """Entry (i, k) is the d' of patch i while fixating the center of patch k."""

    d_prime: np.ndarray
    profile: VisibilityProfile

    @property
    def size(self) -> int:
        return self.d_prime.shape[0]

    def row(self, fixation: int) -> np.ndarray:
        """d' of every patch from one fixation (column k; the table is symmetric)."""
        return self.d_prime[:, fixation]

    @cached_property
    def d_prime_sq(self) -> np.ndarray:
        sq = self.d_prime * self.d_prime
        sq.setflags(write=False)
        return sq


def build_visibility_table(profile: VisibilityProfile, grid: PatchGrid,
                           max_bytes: int = DEFAULT_TABLE_BUDGET) -> VisibilityTable:
    m = grid.size
    # the table plus its squared copy and the distance scratch array
    needed = 3 * m * m * 8
    if needed > max_bytes:
        raise ResourceError(
            f"visibility table for M={m} patches needs ~{needed / 2**20:.1f} MiB, "
            f"budget is {max_bytes / 2**20:.1f} MiB"
        )
    ecc = pairwise_eccentricity(grid.centers, grid.centers)
    d = detectability(profile, ecc)
    d.setflags(write=False)
    return VisibilityTable(d, profile)
