"""Simulated free-viewing trials: center start, encode, update, select, repeat."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DegenerateStateError, ValidationError
from .foveation import VisibilityProfile, VisibilityTable, build_visibility_table
from .inference import PosteriorState, inhibited_prior, init_posterior, update_posterior
from .raster import GrayImage, PatchGrid, build_patch_grid
from .response import (
    DistortionProvider,
    Exponents,
    FeatureChannels,
    ResponseExpectation,
    compute_expectation,
    extract_features,
    sample_response,
)
from .searchers import SearcherKind, select

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrialConfig:
    searcher: SearcherKind = SearcherKind.ELM
    num_fixations: int = 12
    patch_size: int = 16
    visibility: VisibilityProfile = VisibilityProfile()
    exponents: Exponents = Exponents()
    inhibition_depth: int = 8
    seed: int = 0
    distorted: bool = False
    zero_noise: bool = False
    record_steps: bool = False
    # informational only; the simulation runs in fixation steps
    saccade_interval_ms: float = 250.0

    def __post_init__(self):
        object.__setattr__(self, "searcher", SearcherKind.parse(self.searcher))
        if self.num_fixations < 1:
            raise ValidationError(f"num_fixations must be >= 1, got {self.num_fixations}")
        if self.inhibition_depth < 0:
            raise ValidationError(f"inhibition_depth must be >= 0, got {self.inhibition_depth}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["searcher"] = self.searcher.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        d = dict(d)
        d["visibility"] = VisibilityProfile(**d["visibility"])
        d["exponents"] = Exponents(**d["exponents"])
        return cls(**d)


@dataclass(frozen=True)
class Fixation:
    step: int
    index: int
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class StepSnapshot:
    posterior: np.ndarray
    inhibited_prior: np.ndarray
    response: np.ndarray
    score_map: Optional[np.ndarray]  # None after the final fixation


@dataclass(eq=False)
class ScanpathTrace:
    fixations: list[Fixation]
    config: TrialConfig
    seed: int
    width: int
    height: int
    steps: Optional[list[StepSnapshot]] = None
    image_source: Optional[str] = None

    @property
    def grid(self) -> PatchGrid:
        s = self.config.patch_size
        return PatchGrid(s, self.width // s, self.height // s)

    @property
    def indices(self) -> list[int]:
        return [f.index for f in self.fixations]


class TrialAborted(DegenerateStateError):
    """Posterior degenerated mid-trial; ``trace`` holds the fixations so far."""

    def __init__(self, message: str, trace: ScanpathTrace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True, eq=False)
class Scene:
    """Everything about an image that stays fixed across trials."""

    width: int
    height: int
    grid: PatchGrid
    features: FeatureChannels
    expectation: ResponseExpectation
    table: VisibilityTable
    center: int


def prepare_scene(image: GrayImage, config: TrialConfig,
                  blockiness_source: Optional[DistortionProvider] = None) -> Scene:
    if config.distorted and blockiness_source is None:
        raise ValidationError("distorted mode needs a blockiness source")
    grid = build_patch_grid(image, config.patch_size)
    features = extract_features(image, grid, blockiness_source if config.distorted else None)
    expectation = compute_expectation(features, config.exponents, config.distorted)
    table = build_visibility_table(config.visibility, grid)
    center = grid.nearest_index(image.width / 2, image.height / 2)
    return Scene(image.width, image.height, grid, features, expectation, table, center)


def run_trial(image: GrayImage, config: TrialConfig,
              blockiness_source: Optional[DistortionProvider] = None,
              scene: Optional[Scene] = None) -> ScanpathTrace:
    if scene is None:
        scene = prepare_scene(image, config, blockiness_source)
    return _simulate(scene, config)


def _simulate(scene: Scene, config: TrialConfig) -> ScanpathTrace:
    grid, table, profile = scene.grid, scene.table, config.visibility
    rng = np.random.default_rng(config.seed)
    trace = ScanpathTrace([], config, config.seed, scene.width, scene.height,
                          [] if config.record_steps else None)
    state = init_posterior(grid.size, config.inhibition_depth)
    k = scene.center
    for step in range(1, config.num_fixations + 1):
        x, y = grid.center_of(k)
        trace.fixations.append(Fixation(step, k, x, y))
        state = state.with_fixation(k)
        visibility = table.row(k)
        sample = sample_response(scene.expectation, visibility, rng, k, config.zero_noise)
        try:
            state = update_posterior(state, sample, visibility, grid, profile)
        except DegenerateStateError as exc:
            raise TrialAborted(f"trial aborted at fixation {step}: {exc}", trace) from exc

        outcome = None
        if step < config.num_fixations:
            outcome = select(config.searcher, state, table, scene.features.contrast)
        if trace.steps is not None:
            prior = inhibited_prior(state, grid, profile).values
            trace.steps.append(StepSnapshot(state.posterior, prior, sample.values,
                                            None if outcome is None else outcome.score_map))
        if outcome is not None:
            k = outcome.chosen
    return trace


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, trial: int) -> int:
    """Seed for trial ``trial`` of a batch: splitmix64(splitmix64(base) XOR trial).

    splitmix64 is a bijection on 64-bit words, so distinct trial indices below
    2**64 always get distinct seeds.
    """
    return _splitmix64(_splitmix64(base_seed & MASK64) ^ (trial & MASK64))


def run_batch(image: GrayImage, config: TrialConfig, num_trials: int, base_seed: int,
              blockiness_source: Optional[DistortionProvider] = None,
              scene: Optional[Scene] = None) -> list[ScanpathTrace]:
    if num_trials < 1:
        raise ValidationError(f"num_trials must be >= 1, got {num_trials}")
    if scene is None:
        scene = prepare_scene(image, config, blockiness_source)
    return [_simulate(scene, replace(config, seed=derive_seed(base_seed, j)))
            for j in range(num_trials)]


@dataclass(frozen=True)
class SaccadeSummary:
    amplitudes: tuple[float, ...]
    mean: float
    median: float
    max: float
    revisits: int = field(default=0)


def count_revisits(indices, depth: int) -> int:
    """Fixations that land on one of the previous min(depth, T) fixated patches."""
    hits = 0
    for t in range(1, len(indices)):
        if depth > 0 and indices[t] in indices[max(0, t - depth):t]:
            hits += 1
    return hits


def summarize_saccades(trace: ScanpathTrace) -> SaccadeSummary:
    if len(trace.fixations) < 2:
        raise ValidationError("saccade statistics need at least two fixations")
    xy = np.array([(f.x, f.y) for f in trace.fixations])
    amps = np.hypot(*np.diff(xy, axis=0).T)
    return SaccadeSummary(
        amplitudes=tuple(float(a) for a in amps),
        mean=float(amps.mean()),
        median=float(np.median(amps)),
        max=float(amps.max()),
        revisits=count_revisits(trace.indices, trace.config.inhibition_depth),
    )
