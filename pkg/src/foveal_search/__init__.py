"""Foveated Bayesian visual-search simulation of free-viewing fixation sequences."""

from .engine import (
    Fixation,
    ScanpathTrace,
    TrialConfig,
    derive_seed,
    prepare_scene,
    run_batch,
    run_trial,
    summarize_saccades,
)
from .foveation import VisibilityProfile, build_visibility_table, detectability, eccentricity
from .raster import GrayImage, PatchGrid, build_patch_grid, load_gray_image, synthesize_one_over_f
from .response import Exponents, compute_blockiness_map, compute_expectation, extract_features
from .searchers import SearcherKind

__all__ = [
    "Exponents",
    "Fixation",
    "GrayImage",
    "PatchGrid",
    "ScanpathTrace",
    "SearcherKind",
    "TrialConfig",
    "VisibilityProfile",
    "build_patch_grid",
    "build_visibility_table",
    "compute_blockiness_map",
    "compute_expectation",
    "derive_seed",
    "detectability",
    "eccentricity",
    "extract_features",
    "load_gray_image",
    "prepare_scene",
    "run_batch",
    "run_trial",
    "summarize_saccades",
    "synthesize_one_over_f",
]
