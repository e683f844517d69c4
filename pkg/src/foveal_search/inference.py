"""Posterior over target locations, with inhibition-of-return prior suppression."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateStateError, ValidationError
from .foveation import VisibilityProfile, pairwise_eccentricity
from .raster import PatchGrid
from .response import ResponseSample

EPS_CONTRAST = 1e-6


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """Posterior p_i(T), running sum of d'^2 W per patch, and the fixation history.

    Updates return a new state; instances are never mutated in place.
    """

    posterior: np.ndarray
    log_accumulator: np.ndarray
    history: tuple[int, ...] = ()
    inhibition_depth: int = 8

    @property
    def size(self) -> int:
        return len(self.posterior)

    @property
    def num_fixations(self) -> int:
        return len(self.history)

    def with_fixation(self, index: int) -> "PosteriorState":
        if not 0 <= index < self.size:
            raise ValidationError(f"fixation {index} outside 0..{self.size - 1}")
        return replace(self, history=self.history + (int(index),))


@dataclass(frozen=True, eq=False)
class InhibitedPrior:
    values: np.ndarray
    weights: tuple[float, ...] = field(default=())


def init_posterior(m: int, n: int = 8) -> PosteriorState:
    if m < 1:
        raise ValidationError(f"need at least one patch, got M={m}")
    if n < 0:
        raise ValidationError(f"inhibition depth must be >= 0, got {n}")
    return PosteriorState(np.full(m, 1.0 / m), np.zeros(m), (), n)


def inhibition_weights(num_fixations: int, depth: int) -> list[float]:
    """Weights for the last min(depth, T) fixations, oldest first.

    The fixation t steps back from the latest gets 1 - t / depth, so the
    latest carries weight 1 and the oldest in the window 1 / depth.
    """
    window = min(depth, num_fixations)
    return [max(0.0, 1.0 - (window - 1 - j) / depth) for j in range(window)]


def inhibited_prior(state: PosteriorState, grid: PatchGrid,
                    profile: VisibilityProfile) -> InhibitedPrior:
    m = state.size
    if grid.size != m:
        raise ValidationError(f"grid has {grid.size} patches, state has {m}")
    prior = np.full(m, 1.0 / m)
    weights = inhibition_weights(state.num_fixations, state.inhibition_depth)
    if weights:
        recent = list(state.history[-len(weights):])
        ecc = pairwise_eccentricity(grid.centers, grid.centers[recent])
        factors = 1.0 - np.asarray(weights)[None, :] * profile.falloff(ecc)
        prior = prior * np.prod(np.clip(factors, 0.0, 1.0), axis=1)
    total = prior.sum()
    if total <= 0:
        raise DegenerateStateError("inhibition of return suppressed every patch")
    return InhibitedPrior(prior / total, tuple(weights))


def log_posterior(log_prior: np.ndarray, accumulator: np.ndarray) -> np.ndarray:
    """Normalize prior * exp(accumulator) in the log domain."""
    logits = log_prior + accumulator
    top = logits.max()
    if not np.isfinite(top):
        raise DegenerateStateError("posterior mass vanished: every prior entry is zero")
    p = np.exp(logits - top)
    return p / p.sum()


def update_posterior(state: PosteriorState, sample: ResponseSample, visibility_row,
                     grid: PatchGrid, profile: VisibilityProfile) -> PosteriorState:
    """Add d'^2 W for the newest fixation and recompute the posterior.

    The caller appends the fixation to ``state.history`` first, so the prior
    already suppresses the location just fixated.
    """
    w = np.asarray(sample.values, dtype=np.float64)
    d = np.asarray(visibility_row, dtype=np.float64)
    if w.shape != (state.size,) or d.shape != (state.size,):
        raise ValidationError("response sample and visibility row must have length M")
    acc = state.log_accumulator + d * d * w
    prior = inhibited_prior(state, grid, profile).values
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior)
    posterior = log_posterior(log_prior, acc)
    return replace(state, posterior=posterior, log_accumulator=acc)


def normalized_posterior(state: PosteriorState, contrast) -> np.ndarray:
    """Posterior divided by local contrast (floored at 1e-6) and renormalized."""
    c = np.asarray(contrast, dtype=np.float64)
    if c.shape != (state.size,):
        raise ValidationError(f"contrast has shape {c.shape}, expected ({state.size},)")
    q = state.posterior / np.maximum(c, EPS_CONTRAST)
    return q / q.sum()
