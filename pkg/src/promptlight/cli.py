"""Command-line entry point.

Subcommands: enhance, decompose, autopolish, build-dataset, train-reward,
score, eval, ddim-demo. Exit codes: 0 success, 1 usage, 2 I/O, 3 prompt
parsing, 4 computation. Structured output is JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, brightness, colorloop, dataset, diffusion, metrics
from . import prompts, relight, retinex, reward, toolset
from .errors import ImageFormatError, PromptError, ToolkitError
from .image import ImageGray, ImageRGB, clamp01, load_image, luma, save_gray, save_image

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_COMPUTE = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(args, payload: dict) -> None:
    if not args.quiet:
        print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_enhance(args) -> int:
    plan = prompts.parse(args.prompt)
    img = load_image(args.image)
    pair = retinex.decompose(img, args.sigma)
    mask = relight.resolve_target(
        plan.target,
        img,
        mask_path=args.mask,
        use_heuristic=args.heuristic_mask,
        dark_quantile=args.dark_quantile,
    )
    m_init = brightness.initial_map(pair.illumination)
    adj = brightness.spatial_blend(
        m_init, plan.brightness_ratio, mask.mask, args.blend_sigma
    )
    if args.adjust_map_out:
        save_gray(
            ImageGray(clamp01(adj.values / brightness.BOOST_MAX)),
            args.adjust_map_out,
        )
    illum_adj = brightness.apply_to_illumination(pair.illumination, adj)
    out = relight.fuse(illum_adj, pair, mask, img, args.feather)
    out = toolset.compose(plan.color_ops, out)
    save_image(out, args.out)
    _emit(
        args,
        {
            "plan": prompts.explain(plan),
            "mask_source": mask.source,
            "mean_luma_in": float(luma(img.pixels).mean()),
            "mean_luma_out": float(luma(out.pixels).mean()),
            "psnr_vs_input": metrics.psnr(out, img),
            "ssim_vs_input": metrics.ssim(out, img),
            "out": str(args.out),
        },
    )
    return EXIT_OK


def _cmd_decompose(args) -> int:
    img = load_image(args.image)
    pair = retinex.decompose(img, args.sigma)
    stem = Path(args.image).stem
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.image).parent
    illum_path = out_dir / f"{stem}_illum.png"
    refl_path = out_dir / f"{stem}_refl.png"
    save_gray(pair.illumination, illum_path)
    # reflectance can reach 3.0; the preview PNG clips it at white
    save_image(ImageRGB(clamp01(pair.reflection)), refl_path)
    _emit(args, {"illumination": str(illum_path), "reflection": str(refl_path)})
    return EXIT_OK


def _cmd_autopolish(args) -> int:
    img = load_image(args.image)
    model = reward.load_model(args.model)
    if args.prompt:
        # apply the requested adjustments first, then let the loop refine
        plan = prompts.parse(args.prompt)
        if not isinstance(plan.target, prompts.WholeImage):
            raise ValueError(
                "autopolish applies prompts to the whole image; "
                "use 'enhance' for region-scoped edits"
            )
        if plan.brightness_ratio != 0.0:
            img = toolset.apply(toolset.Brightness(plan.brightness_ratio), img)
        img = toolset.compose(plan.color_ops, img)
    cfg = colorloop.LoopConfig(
        max_iters=args.max_iters, accept_epsilon=args.epsilon
    )
    polished, steps = colorloop.autopolish(img, model, cfg)
    save_image(polished, args.out)
    if args.trace_out:
        Path(args.trace_out).write_text(colorloop.trace_to_json(steps) + "\n")
    accepted = [s for s in steps if s.accepted]
    final_score = (
        accepted[-1].reward_after if accepted
        else (steps[0].reward_before if steps else reward.score(model, img))
    )
    _emit(
        args,
        {
            "iterations": len(steps),
            "accepted": len(accepted),
            "final_score": final_score,
            "goal_reached": final_score > 0,
            "out": str(args.out),
        },
    )
    return EXIT_OK


def _cmd_build_dataset(args) -> int:
    sources = sorted(
        p for p in Path(args.sources_dir).iterdir()
        if p.suffix.lower() in (".png", ".ppm")
    )
    if not sources:
        raise ImageFormatError(f"no PNG/PPM sources in {args.sources_dir}")
    levels = tuple(float(x) for x in args.levels.split(","))
    records = dataset.build_variants(
        sources,
        args.out_dir,
        levels=levels,
        transforms_per_level=args.per_level,
        seed=args.seed,
        workers=args.workers,
    )
    manifest = Path(args.out_dir) / "manifest.jsonl"
    dataset.write_manifest(records, manifest)
    _emit(
        args,
        {
            "sources": len(sources),
            "levels": len(levels),
            "per_level": args.per_level,
            "records": len(records),
            "manifest": str(manifest),
        },
    )
    return EXIT_OK


def _cmd_train_reward(args) -> int:
    data = dataset.load_ranking_file(args.ranking)
    result = reward.train(
        data,
        lr=args.lr,
        batch=args.batch,
        epochs=args.epochs,
        seed=args.seed,
    )
    reward.save_model(result.model, args.out)
    _emit(
        args,
        {
            "pairs": len(data.all_pairs()),
            "epochs": args.epochs,
            "final_loss": result.final_loss,
            "model": str(args.out),
        },
    )
    return EXIT_OK


def _cmd_score(args) -> int:
    model = reward.load_model(args.model)
    print(reward.score(model, load_image(args.image)))
    return EXIT_OK


def _cmd_eval(args) -> int:
    ref = load_image(args.ref)
    test = load_image(args.test)
    print(
        json.dumps(
            {
                "psnr": metrics.psnr(ref, test),
                "ssim": metrics.ssim(ref, test),
                "angular_color": metrics.angular_color_loss(ref, test),
            },
            indent=2,
        )
    )
    return EXIT_OK


def _cmd_ddim_demo(args) -> int:
    sched = diffusion.linear_schedule(args.steps, args.beta_min, args.beta_max)
    denoiser = diffusion.GaussianDenoiser(sched)
    rng = np.random.default_rng(args.seed)
    y = rng.standard_normal(args.trajectories)
    y0 = diffusion.ddim_sample(y, denoiser, sched, eta=args.eta,
                               rng=rng if args.eta > 0 else None)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trajectory", "y0"])
            for i, value in enumerate(y0):
                writer.writerow([i, repr(float(value))])
    _emit(
        args,
        {
            "steps": args.steps,
            "eta": args.eta,
            "trajectories": args.trajectories,
            "mean": float(y0.mean()),
            "variance": float(y0.var()),
            "csv": str(args.out) if args.out else None,
        },
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(
        prog="promptlight",
        description="Prompt-driven low-light image enhancement toolkit.",
    )
    parser.add_argument("--version", action="version",
                        version=f"promptlight {__version__}")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the JSON summary on stdout")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed for seeded subcommands")
    # the global flags are also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", parents=[common],
                       help="apply a prompt to an image")
    p.add_argument("--image", required=True)
    p.add_argument("--prompt", required=True)
    p.add_argument("--mask", default=None,
                   help="grayscale mask file for a named region")
    p.add_argument("--out", required=True)
    p.add_argument("--feather", type=float,
                   default=relight.DEFAULT_FEATHER_SIGMA,
                   help="mask feathering sigma in pixels")
    p.add_argument("--heuristic-mask", action="store_true",
                   help="resolve named regions as the darkest pixels")
    p.add_argument("--dark-quantile", type=float,
                   default=relight.DEFAULT_DARK_QUANTILE)
    p.add_argument("--sigma", type=float, default=8.0,
                   help="illumination blur sigma in pixels")
    p.add_argument("--blend-sigma", type=float, default=3.0,
                   help="spatial smoothing sigma for the adjustment map")
    p.add_argument("--adjust-map-out", default=None,
                   help="write the adjustment map as a PNG heat map")
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("decompose", parents=[common],
                       help="split an image into illumination and reflectance")
    p.add_argument("--image", required=True)
    p.add_argument("--sigma", type=float, default=8.0)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("autopolish", parents=[common],
                       help="reward-guided color polishing loop")
    p.add_argument("--image", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--prompt", default=None,
                   help="whole-image adjustments to apply before polishing")
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", default=None, help="write the decision trace JSON")
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-4,
                   help="minimum score improvement to accept a step")
    p.set_defaults(func=_cmd_autopolish)

    p = sub.add_parser("build-dataset", parents=[common],
                       help="expand source images into scored-ranking variants")
    p.add_argument("--sources-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--levels", default="1.10,1.30,2.00,2.50",
                   help="comma-separated brightness multipliers")
    p.add_argument("--per-level", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("train-reward", parents=[common],
                       help="train the aesthetic reward model")
    p.add_argument("--ranking", required=True, help="ranking JSONL file")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--lr", type=float, default=reward.DEFAULT_LEARNING_RATE)
    p.add_argument("--batch", type=int, default=reward.DEFAULT_BATCH_SIZE)
    p.add_argument("--epochs", type=int, default=100)
    p.set_defaults(func=_cmd_train_reward)

    p = sub.add_parser("score", parents=[common],
                       help="print the reward score of one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", parents=[common],
                       help="PSNR/SSIM/angular-color between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ddim-demo", parents=[common],
                       help="sample the toy Gaussian diffusion model")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--trajectories", type=int, default=1000)
    p.add_argument("--beta-min", type=float, default=1e-4)
    p.add_argument("--beta-max", type=float, default=0.02)
    p.add_argument("--out", default=None, help="CSV of (trajectory, y0)")
    p.set_defaults(func=_cmd_ddim_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PromptError as exc:
        print(f"prompt error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError, PermissionError,
            ImageFormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ToolkitError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
