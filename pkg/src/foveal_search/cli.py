"""Command-line entry point: ``foveal-search run | saliency | features``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import artifacts
from .engine import TrialConfig, prepare_scene, run_batch, run_trial, summarize_saccades
from .errors import FovealSearchError, ValidationError
from .foveation import VisibilityProfile
from .raster import GrayImage, build_patch_grid, load_gray_image, synthesize_one_over_f, write_pgm
from .response import (
    BlockinessMapFile,
    Exponents,
    compute_blockiness_map,
    compute_expectation,
    extract_features,
    write_blockiness_map,
)
from .searchers import SearcherKind

OUT_ENV = "FOVEAL_SEARCH_OUT"
DEFAULT_OUT = "foveal_out"


def _dims(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def _exponents(text: str) -> Exponents:
    try:
        return Exponents.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", type=Path, help="PNG, BMP or PGM stimulus")
    src.add_argument("--synthetic-1of", dest="synthetic", type=_dims, metavar="WxH",
                     help="synthesize a 1/f noise stimulus of this size (seeded by --seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foveal-search",
                                     description="Foveated Bayesian fixation-sequence simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate scanpaths")
    _add_source(run)
    run.add_argument("--searcher", choices=[k.value for k in SearcherKind], default="elm")
    run.add_argument("--fixations", type=int, default=12)
    run.add_argument("--patch-size", type=int, default=16)
    run.add_argument("--mu", type=float, default=5.0)
    run.add_argument("--sigma", type=float, default=50.0)
    run.add_argument("--exponents", type=_exponents, default=Exponents(), metavar="B,G,E,T")
    run.add_argument("--inhibition", type=int, default=8, help="inhibition-of-return depth")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--distorted", action="store_true",
                     help="modulate responses by blockiness (needs a blockiness source)")
    run.add_argument("--blockiness-map", type=Path, metavar="FILE",
                     help="per-patch blockiness values, whitespace-separated, row-major")
    run.add_argument("--estimate-blockiness", action="store_true",
                     help="use the built-in block-boundary estimator")
    run.add_argument("--zero-noise", action="store_true")
    run.add_argument("--dump-steps", action="store_true")
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")

    sal = sub.add_parser("saliency", help="blur scanpath fixations into a saliency map")
    sal.add_argument("scanpaths", type=Path, nargs="+")
    sal.add_argument("--sigma", type=float, default=artifacts.DEFAULT_BLUR_SIGMA)
    sal.add_argument("--out", type=Path, required=True, help="output PGM")

    feat = sub.add_parser("features", help="dump per-patch feature channel maps")
    _add_source(feat)
    feat.add_argument("--patch-size", type=int, default=16)
    feat.add_argument("--seed", type=int, default=0)
    feat.add_argument("--exponents", type=_exponents, default=Exponents(), metavar="B,G,E,T")
    feat.add_argument("--out", type=Path)
    return parser


def _load_source(args) -> tuple[GrayImage, str]:
    if args.image is not None:
        return load_gray_image(args.image), str(args.image)
    w, h = args.synthetic
    return synthesize_one_over_f(w, h, args.seed), f"synthetic-1of:{w}x{h}:seed={args.seed}"


def _out_dir(args) -> Path:
    out = args.out or Path(os.environ.get(OUT_ENV, DEFAULT_OUT))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args, parser) -> int:
    if args.distorted and not (args.blockiness_map or args.estimate_blockiness):
        parser.error("--distorted needs --blockiness-map FILE or --estimate-blockiness")
    if not args.distorted and (args.blockiness_map or args.estimate_blockiness):
        parser.error("blockiness options only apply with --distorted")
    if args.blockiness_map and args.estimate_blockiness:
        parser.error("--blockiness-map and --estimate-blockiness are mutually exclusive")
    if args.trials < 1:
        parser.error("--trials must be >= 1")

    image, source = _load_source(args)
    config = TrialConfig(
        searcher=args.searcher,
        num_fixations=args.fixations,
        patch_size=args.patch_size,
        visibility=VisibilityProfile(args.mu, args.sigma),
        exponents=args.exponents,
        inhibition_depth=args.inhibition,
        seed=args.seed,
        distorted=args.distorted,
        zero_noise=args.zero_noise,
        record_steps=args.dump_steps,
    )
    provider = None
    if args.distorted:
        provider = BlockinessMapFile(args.blockiness_map) if args.blockiness_map else compute_blockiness_map
    out = _out_dir(args)
    if args.synthetic is not None:
        write_pgm(image, out / "stimulus.pgm")

    scene = prepare_scene(image, config, provider)
    if args.trials == 1:
        traces = [run_trial(image, config, scene=scene)]
    else:
        traces = run_batch(image, config, args.trials, args.seed, scene=scene)

    for j, trace in enumerate(traces):
        trace.image_source = source
        tag = "" if args.trials == 1 else f"_{j:03d}"
        refs = artifacts.write_step_dumps(trace, out / f"steps{tag}") if args.dump_steps else None
        artifacts.write_scanpath(trace, out / f"scanpath{tag}.json", refs)
        artifacts.render_overlay(image, trace, out / f"overlay{tag}.png")
        line = f"trial {j}: " + " ".join(str(i) for i in trace.indices)
        if len(trace.fixations) > 1:
            line += f"  median saccade {summarize_saccades(trace).median:.1f}px"
        print(line)
    if args.trials > 1:
        sal = artifacts.fixations_to_saliency(traces, (image.width, image.height))
        write_pgm(sal.values, out / "saliency.pgm")
    return 0


def cmd_saliency(args, parser) -> int:
    docs = [artifacts.read_scanpath(p) for p in args.scanpaths]
    dims = {(d.width, d.height) for d in docs}
    if len(dims) != 1:
        raise ValidationError(f"scanpaths cover images of different sizes: {sorted(dims)}")
    sal = artifacts.fixations_to_saliency(docs, dims.pop(), args.sigma)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_pgm(sal.values, args.out)
    return 0


def cmd_features(args, parser) -> int:
    image, _ = _load_source(args)
    out = _out_dir(args)
    grid = build_patch_grid(image, args.patch_size)
    features = extract_features(image, grid)
    blockiness = compute_blockiness_map(image, grid)
    expectation = compute_expectation(features, args.exponents, distorted=False)
    channels = {
        "contrast": features.contrast,
        "luminance": features.luminance,
        "entropy": features.entropy,
        "blockiness": blockiness,
        "expectation": expectation.values,
    }
    for name, values in channels.items():
        artifacts.write_map(values, grid, out / name)
    write_blockiness_map(blockiness, out / "blockiness_map.txt")
    return 0


COMMANDS = {"run": cmd_run, "saliency": cmd_saliency, "features": cmd_features}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (FovealSearchError, OSError) as exc:
        print(f"foveal-search: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
