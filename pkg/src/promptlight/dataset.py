"""Dataset construction: brightness-level expansion, seeded transform recipes,
and export of best-first ranking files for reward training.

Every variant's recipe is drawn from a per-record seed derived by stable
hashing of (master seed, source id, level index, transform index), so
regeneration is bit-exact regardless of scheduling or worker count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import toolset
from .image import ImageRGB, load_image, save_image
from .metrics import DimensionScores, total_score
from .reward import RankGroup, RankingDataset, RewardModel, score

DEFAULT_BRIGHTNESS_LEVELS = (1.10, 1.30, 2.00, 2.50)

RECIPE_MIN_OPS = 1
RECIPE_MAX_OPS = 4

# Parameter ranges for randomly drawn recipe ops; values are rounded to two
# decimals so the canonical text form reproduces them exactly.
_PARAM_RANGES = {
    "brightness": (-0.5, 1.0),
    "contrast": (-0.5, 1.0),
    "saturation": (-0.5, 1.0),
    "white_balance": (-0.3, 0.3),
    "tone_tint": (-30.0, 30.0),
    "gamma": (0.5, 2.0),
    "sharpen": (0.2, 1.5),
    "smooth": (0.5, 4.0),
}
_OP_MENU = tuple(_PARAM_RANGES)
_SHARPEN_RADIUS_RANGE = (1.0, 4.0)


@dataclass(frozen=True)
class VariantRecord:
    """One generated variant: provenance plus the exact recipe to rebuild it."""

    source_id: str
    brightness_level: float
    recipe: str          # canonical toolset text form
    seed: int
    path: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "source_id": self.source_id,
                "brightness_level": self.brightness_level,
                "recipe": self.recipe,
                "seed": self.seed,
                "path": self.path,
            }
        )

    @staticmethod
    def from_json(line: str) -> "VariantRecord":
        d = json.loads(line)
        return VariantRecord(
            source_id=d["source_id"],
            brightness_level=float(d["brightness_level"]),
            recipe=d["recipe"],
            seed=int(d["seed"]),
            path=d["path"],
        )


@dataclass(frozen=True)
class AnnotationRecord:
    """Aesthetic scores attached to one variant."""

    variant_path: str
    source_id: str
    scores: DimensionScores
    annotator: str
    total: Optional[float] = None
    prompt: str = ""

    def __post_init__(self):
        computed = total_score(self.scores)
        if self.total is None:
            object.__setattr__(self, "total", computed)
        elif abs(self.total - computed) > 1e-9:
            raise ValueError(
                f"stored total {self.total!r} disagrees with recomputation "
                f"{computed!r}"
            )


def variant_count(n_sources: int, n_levels: int, per_level: int) -> int:
    """The scaling formula: sources x brightness levels x transforms."""
    return n_sources * n_levels * per_level


def record_seed(master_seed: int, source_id: str, level_index: int,
                transform_index: int) -> int:
    """Stable 64-bit per-record seed (independent of generation order)."""
    key = f"{master_seed}:{source_id}:{level_index}:{transform_index}"
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _draw_recipe(rng: np.random.Generator) -> tuple[toolset.ColorOp, ...]:
    n_ops = int(rng.integers(RECIPE_MIN_OPS, RECIPE_MAX_OPS + 1))
    kinds = rng.choice(len(_OP_MENU), size=n_ops, replace=False)
    ops = []
    for kind_index in kinds:
        kind = _OP_MENU[int(kind_index)]
        lo, hi = _PARAM_RANGES[kind]
        value = round(float(rng.uniform(lo, hi)), 2)
        if kind == "brightness":
            ops.append(toolset.Brightness(value))
        elif kind == "contrast":
            ops.append(toolset.Contrast(value))
        elif kind == "saturation":
            ops.append(toolset.Saturation(value))
        elif kind == "white_balance":
            ops.append(toolset.WhiteBalance(value))
        elif kind == "tone_tint":
            ops.append(toolset.ToneTint(value))
        elif kind == "gamma":
            ops.append(toolset.Gamma(value))
        elif kind == "sharpen":
            radius = round(float(rng.uniform(*_SHARPEN_RADIUS_RANGE)), 2)
            ops.append(toolset.Sharpen(value, radius))
        else:
            ops.append(toolset.Smooth(value))
    return tuple(ops)


def render_variant(source: ImageRGB, record: VariantRecord) -> ImageRGB:
    """Re-apply a record's brightness level and recipe to its source image."""
    boosted = toolset.apply(
        toolset.Brightness(record.brightness_level - 1.0), source
    )
    return toolset.compose(toolset.parse_ops(record.recipe), boosted)


def build_variants(
    sources: Sequence,
    out_dir,
    levels: Sequence[float] = DEFAULT_BRIGHTNESS_LEVELS,
    transforms_per_level: int = 8,
    seed: int = 0,
    workers: int = 1,
) -> list[VariantRecord]:
    """Generate len(sources) x len(levels) x transforms_per_level variants.

    Brightness is applied first, then the recipe. Output PNGs land in
    `out_dir`; the returned records re-render bit-exactly via
    ``render_variant``. Deterministic for a fixed seed, regardless of
    `workers`.
    """
    if transforms_per_level < 1:
        raise ValueError("transforms_per_level must be >= 1")
    if not sources:
        raise ValueError("sources must be non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    loaded = [(Path(p).stem, load_image(p)) for p in sources]

    jobs = []
    for source_id, img in loaded:
        for level_index, level in enumerate(levels):
            for transform_index in range(transforms_per_level):
                jobs.append((source_id, img, level_index, level, transform_index))

    def run(job) -> VariantRecord:
        source_id, img, level_index, level, transform_index = job
        rseed = record_seed(seed, source_id, level_index, transform_index)
        recipe = _draw_recipe(np.random.default_rng(rseed))
        record = VariantRecord(
            source_id=source_id,
            brightness_level=float(level),
            recipe=toolset.serialize_ops(recipe),
            seed=rseed,
            path=str(out_dir / f"{source_id}_L{level_index}_T{transform_index}.png"),
        )
        save_image(render_variant(img, record), record.path)
        return record

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, jobs))
    else:
        records = [run(job) for job in jobs]
    return records


def write_manifest(records: Sequence[VariantRecord], path) -> None:
    Path(path).write_text("".join(r.to_json() + "\n" for r in records))


def read_manifest(path) -> list[VariantRecord]:
    lines = Path(path).read_text().splitlines()
    return [VariantRecord.from_json(line) for line in lines if line.strip()]


def auto_prescore(
    records: Sequence[VariantRecord], model: RewardModel
) -> list[tuple[VariantRecord, float]]:
    """Attach a reward score to every record (loads each output image)."""
    return [(r, score(model, load_image(r.path))) for r in records]


def export_ranking(
    annotations: Sequence[AnnotationRecord],
    path,
    group_by: str = "source",
) -> int:
    """Write best-first ranking groups as JSON lines; returns group count.

    Each line is {"prompt", "images", "scores"} with images sorted by
    descending total score; tied records keep their input order. Groups of
    fewer than two annotations are an error. `group_by` is "source" or
    "prompt" (the latter requires a prompt on every record).
    """
    if group_by not in ("source", "prompt"):
        raise ValueError(f"group_by must be 'source' or 'prompt', got {group_by!r}")
    groups: dict[str, list[AnnotationRecord]] = {}
    for rec in annotations:
        if group_by == "prompt":
            if not rec.prompt:
                raise ValueError("group_by='prompt' requires a prompt per record")
            key = rec.prompt
        else:
            key = rec.source_id
        groups.setdefault(key, []).append(rec)

    lines = []
    for key, members in groups.items():
        if len(members) < 2:
            raise ValueError(f"group {key!r} has fewer than 2 scored variants")
        ordered = sorted(members, key=lambda r: -r.total)
        lines.append(
            json.dumps(
                {
                    "prompt": members[0].prompt or key,
                    "images": [r.variant_path for r in ordered],
                    "scores": [r.total for r in ordered],
                }
            )
        )
    Path(path).write_text("".join(line + "\n" for line in lines))
    return len(lines)


def load_ranking_file(path, images: Optional[dict] = None) -> RankingDataset:
    """Read a ranking JSONL file into a RankingDataset, loading the images.

    `images` may pre-supply {ref: ImageRGB}; any missing refs are loaded
    from their paths.
    """
    store = dict(images or {})
    groups = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        refs = tuple(d["images"])
        groups.append(
            RankGroup(prompt=d["prompt"], refs=refs, scores=tuple(d["scores"]))
        )
        for ref in refs:
            if ref not in store:
                store[ref] = load_image(ref)
    return RankingDataset(groups=tuple(groups), images=store)
