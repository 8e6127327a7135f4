#!/usr/bin/env python3
"""End-to-end enhancement demo on a synthetic night scene.

Builds a dark gradient image with a bright 'lamp' patch, runs the full
prompt -> Retinex -> brightness-control -> fuse pipeline twice (whole image,
then lamp region via a mask), and reports metrics for each output.

Usage: python scripts/enhance_demo.py [out_dir]
"""

import json
import sys
from pathlib import Path

import numpy as np

from promptlight import brightness, metrics, relight, retinex
from promptlight.image import ImageGray, ImageRGB, luma, save_gray, save_image
from promptlight.prompts import parse


def make_scene(h=96, w=128):
    """Dark vignette-style gradient with a warm bright patch."""
    yy, xx = np.mgrid[0:h, 0:w]
    falloff = 0.05 + 0.25 * np.exp(-(((xx - w / 3) / w) ** 2 + ((yy - h / 2) / h) ** 2) * 6)
    base = np.stack([falloff * 0.9, falloff, falloff * 1.25], axis=-1)
    lamp = (slice(h // 4, h // 4 + 12), slice(3 * w // 4, 3 * w // 4 + 12))
    base[lamp] = [0.55, 0.5, 0.35]
    mask = np.zeros((h, w))
    mask[lamp] = 1.0
    return ImageRGB(np.clip(base, 0, 1)), ImageGray(mask)


def enhance(img, prompt_text, mask=None):
    plan = parse(prompt_text)
    pair = retinex.decompose(img, sigma=8.0)
    if mask is None:
        region = relight.resolve_target(plan.target, img)
    else:
        region = relight.RegionMask(mask, "file")
    m_init = brightness.initial_map(pair.illumination)
    adj = brightness.spatial_blend(m_init, plan.brightness_ratio, region.mask, 3.0)
    illum_adj = brightness.apply_to_illumination(pair.illumination, adj)
    return relight.fuse(illum_adj, pair, region, img, feather_sigma=3.0)


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
    out_dir.mkdir(parents=True, exist_ok=True)

    scene, lamp_mask = make_scene()
    save_image(scene, out_dir / "scene.png")
    save_gray(lamp_mask, out_dir / "lamp_mask.png")

    results = {}
    whole = enhance(scene, "brighten the image by 100%")
    save_image(whole, out_dir / "scene_global.png")
    results["global"] = {
        "prompt": "brighten the image by 100%",
        "mean_luma_before": float(luma(scene.pixels).mean()),
        "mean_luma_after": float(luma(whole.pixels).mean()),
        "ssim_vs_input": metrics.ssim(whole, scene),
    }

    local = enhance(scene, "brighten the lamp by 150%", mask=lamp_mask)
    save_image(local, out_dir / "scene_lamp.png")
    changed = np.abs(local.pixels - scene.pixels).max(axis=2) > 1 / 255
    results["region"] = {
        "prompt": "brighten the lamp by 150%",
        "pixels_changed_fraction": float(changed.mean()),
        "mean_luma_after": float(luma(local.pixels).mean()),
    }

    print(json.dumps(results, indent=2))
    print(f"wrote images to {out_dir}/")


if __name__ == "__main__":
    main()
