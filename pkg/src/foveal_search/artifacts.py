"""Scanpath JSON documents, fixation saliency maps, overlays and diagnostic dumps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw
from scipy.ndimage import gaussian_filter

from .engine import Fixation, ScanpathTrace, TrialConfig
from .errors import FovealSearchError, ValidationError
from .raster import GrayImage, PatchGrid, minmax_normalize, quantize_8bit, write_pgm

SCHEMA_VERSION = 1
DEFAULT_BLUR_SIGMA = 16.0
STEP_MAPS = ("posterior", "inhibited_prior", "response", "score_map")


@dataclass(frozen=True)
class ImageMeta:
    path: Optional[str]
    width: int
    height: int
    patch_size: int


@dataclass
class ScanpathDocument:
    image: ImageMeta
    config: dict
    seed: int
    fixations: list[Fixation]
    steps: Optional[list[dict]] = None
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "image": {
                "path": self.image.path,
                "width": self.image.width,
                "height": self.image.height,
                "patch_size": self.image.patch_size,
            },
            "config": self.config,
            "seed": self.seed,
            "fixations": [
                {"step": f.step, "patch": f.index, "x": f.x, "y": f.y} for f in self.fixations
            ],
            "steps": self.steps,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScanpathDocument":
        try:
            d = json.loads(text)
            if d["schema_version"] != SCHEMA_VERSION:
                raise ValidationError(f"unsupported scanpath schema {d['schema_version']}")
            return cls(
                image=ImageMeta(**d["image"]),
                config=d["config"],
                seed=d["seed"],
                fixations=[Fixation(f["step"], f["patch"], f["x"], f["y"]) for f in d["fixations"]],
                steps=d.get("steps"),
                schema_version=d["schema_version"],
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed scanpath document: {exc}") from exc

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height

    def to_trace(self) -> ScanpathTrace:
        return ScanpathTrace(list(self.fixations), TrialConfig.from_dict(self.config), self.seed,
                             self.image.width, self.image.height, None, self.image.path)


def document_from_trace(trace: ScanpathTrace, step_refs: Optional[list[dict]] = None) -> ScanpathDocument:
    meta = ImageMeta(trace.image_source, trace.width, trace.height, trace.config.patch_size)
    return ScanpathDocument(meta, trace.config.to_dict(), trace.seed, list(trace.fixations), step_refs)


def write_scanpath(trace: ScanpathTrace, path, step_refs: Optional[list[dict]] = None) -> None:
    text = document_from_trace(trace, step_refs).to_json()
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise FovealSearchError(f"cannot write scanpath to {path}: {exc}") from exc


def read_scanpath(path) -> ScanpathDocument:
    return ScanpathDocument.from_json(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    width: int
    height: int
    values: np.ndarray


def fixation_impulses(traces: Iterable, image_dims: tuple[int, int]) -> np.ndarray:
    """Unit mass at the pixel of every fixation of every trace."""
    width, height = image_dims
    impulses = np.zeros((height, width))
    for trace in traces:
        for f in trace.fixations:
            x = min(max(int(np.floor(f.x)), 0), width - 1)
            y = min(max(int(np.floor(f.y)), 0), height - 1)
            impulses[y, x] += 1.0
    return impulses


def fixations_to_saliency(traces: Sequence, image_dims: tuple[int, int],
                          blur_sigma: float = DEFAULT_BLUR_SIGMA,
                          normalize: bool = True) -> SaliencyMap:
    """Gaussian-blurred fixation density (kernel truncated at 3 sigma), max-normalized.

    ``traces`` may hold ScanpathTrace or ScanpathDocument objects.
    """
    if len(traces) < 1:
        raise ValidationError("need at least one trace")
    if not blur_sigma > 0:
        raise ValidationError(f"blur_sigma must be positive, got {blur_sigma}")
    impulses = fixation_impulses(traces, image_dims)
    density = gaussian_filter(impulses, sigma=blur_sigma, mode="constant", truncate=3.0)
    if normalize and density.max() > 0:
        density = density / density.max()
    return SaliencyMap(image_dims[0], image_dims[1], density)


# 3x5 digit glyphs, one string per row
_DIGITS = {
    "0": ("111", "101", "101", "101", "111"),
    "1": ("010", "110", "010", "010", "111"),
    "2": ("111", "001", "111", "100", "111"),
    "3": ("111", "001", "111", "001", "111"),
    "4": ("101", "101", "111", "001", "001"),
    "5": ("111", "100", "111", "001", "111"),
    "6": ("111", "100", "111", "101", "111"),
    "7": ("111", "001", "010", "010", "010"),
    "8": ("111", "101", "111", "101", "111"),
    "9": ("111", "101", "111", "001", "111"),
}
MARKER_COLOR = (255, 40, 40)
SEGMENT_COLOR = (255, 220, 0)
LABEL_COLOR = (255, 255, 255)


@dataclass
class OverlayGeometry:
    markers: list[tuple[float, float, str]] = field(default_factory=list)
    segments: list[tuple[float, float, float, float]] = field(default_factory=list)


def overlay_geometry(trace) -> OverlayGeometry:
    geo = OverlayGeometry()
    for n, f in enumerate(trace.fixations, start=1):
        geo.markers.append((f.x, f.y, str(n)))
    for a, b in zip(trace.fixations, trace.fixations[1:]):
        geo.segments.append((a.x, a.y, b.x, b.y))
    return geo


def _draw_label(draw: ImageDraw.ImageDraw, x: int, y: int, text: str, scale: int = 2) -> None:
    for ch_i, ch in enumerate(text):
        rows = _DIGITS[ch]
        for r, row in enumerate(rows):
            for c, bit in enumerate(row):
                if bit == "1":
                    x0 = x + (ch_i * 4 + c) * scale
                    y0 = y + r * scale
                    draw.rectangle([x0, y0, x0 + scale - 1, y0 + scale - 1], fill=LABEL_COLOR)


def render_overlay(image: GrayImage, trace, path, radius: int = 4) -> OverlayGeometry:
    """Numbered fixation markers joined by saccade segments over the half-bright image."""
    if (trace.width, trace.height) != (image.width, image.height):
        raise ValidationError(
            f"trace is for a {trace.width}x{trace.height} image, got {image.width}x{image.height}"
        )
    base = quantize_8bit(image.pixels * 0.5)
    canvas = Image.fromarray(np.repeat(base[:, :, None], 3, axis=2), mode="RGB")
    draw = ImageDraw.Draw(canvas)
    geo = overlay_geometry(trace)
    for x0, y0, x1, y1 in geo.segments:
        draw.line([(x0, y0), (x1, y1)], fill=SEGMENT_COLOR, width=1)
    for x, y, label in geo.markers:
        draw.ellipse([x - radius, y - radius, x + radius, y + radius], outline=MARKER_COLOR, width=2)
        _draw_label(draw, int(x) + radius + 1, int(y) - radius - 1, label)
    try:
        canvas.save(path, format="PNG")
    except OSError as exc:
        raise FovealSearchError(f"cannot write overlay to {path}: {exc}") from exc
    return geo


def write_matrix_text(values: np.ndarray, path) -> None:
    """Plain-text matrix with round-trip precision, one grid row per line."""
    np.savetxt(path, np.atleast_2d(values), fmt="%.17g")


def read_matrix_text(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2)


def write_map(values, grid: PatchGrid, stem: Path) -> dict:
    """Dump a per-patch vector as min-max normalized PGM plus exact text; returns file names."""
    grid_map = grid.to_map(values)
    stem = Path(stem)
    write_pgm(minmax_normalize(grid_map), stem.with_suffix(".pgm"))
    write_matrix_text(grid_map, stem.with_suffix(".txt"))
    return {"pgm": stem.with_suffix(".pgm").name, "txt": stem.with_suffix(".txt").name}


def write_step_dumps(trace: ScanpathTrace, directory) -> list[dict]:
    """Per-step posterior, inhibited prior, response and score map dumps.

    Returns references relative to ``directory``'s parent for the scanpath document.
    """
    if trace.steps is None:
        raise ValidationError("trace was run without record_steps")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = trace.grid
    refs = []
    for n, snap in enumerate(trace.steps, start=1):
        entry = {"step": n}
        for name in STEP_MAPS:
            values = getattr(snap, name)
            if values is None:
                continue
            files = write_map(values, grid, directory / f"step{n:02d}_{name}")
            entry[name] = {k: f"{directory.name}/{v}" for k, v in files.items()}
        refs.append(entry)
    return refs


def write_visibility_row(table, grid: PatchGrid, fixation: int, path) -> None:
    """Visibility map seen from one fixation, normalized by the peak d'."""
    write_pgm(grid.to_map(table.row(fixation)) / table.profile.mu, path)
