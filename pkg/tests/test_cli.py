import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from promptlight.cli import main
from promptlight.image import ImageGray, load_image, luma, save_gray, save_image
from promptlight.reward import load_model, save_model, score, zero_model

import helpers


@pytest.fixture
def dark_png(tmp_path, rng):
    path = tmp_path / "dark.png"
    save_image(helpers.smooth_image(rng, h=16, w=16, lo=0.1, hi=0.4), path)
    return path


def run(args) -> int:
    return main([str(a) for a in args])


class TestEnhance:
    def test_brighten_raises_mean_luma(self, dark_png, tmp_path, capsys):
        out = tmp_path / "out.png"
        code = run(["enhance", "--image", dark_png,
                    "--prompt", "brighten the image by 30%", "--out", out])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["mean_luma_out"] > summary["mean_luma_in"]
        before = luma(load_image(dark_png).pixels).mean()
        after = luma(load_image(out).pixels).mean()
        assert after > before

    def test_color_ops_applied(self, dark_png, tmp_path, capsys):
        out = tmp_path / "out.png"
        code = run(["enhance", "--image", dark_png, "--out", out,
                    "--prompt", "brighten the image by 20% and increase saturation by 25%"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["plan"].endswith(
            "increase saturation by 25%"
        )

    def test_region_mask_file(self, dark_png, tmp_path, capsys):
        mask_arr = np.zeros((16, 16))
        mask_arr[4:12, 4:12] = 1.0
        mask_path = tmp_path / "mask.png"
        save_gray(ImageGray(mask_arr), mask_path)
        out = tmp_path / "out.png"
        code = run(["enhance", "--image", dark_png, "--mask", mask_path,
                    "--out", out, "--feather", 0,
                    "--prompt", "brighten the lamp by 50%"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["mask_source"] == "file"
        original = load_image(dark_png).pixels
        result = load_image(out).pixels
        outside = mask_arr == 0.0
        assert np.array_equal(result[outside], original[outside])

    def test_heuristic_mask(self, dark_png, tmp_path, capsys):
        out = tmp_path / "out.png"
        code = run(["enhance", "--image", dark_png, "--heuristic-mask",
                    "--out", out, "--prompt", "brighten the shadows a lot"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["mask_source"] == "threshold-heuristic"

    def test_unresolved_region_is_compute_error(self, dark_png, tmp_path, capsys):
        code = run(["enhance", "--image", dark_png, "--out", tmp_path / "x.png",
                    "--prompt", "brighten the lamp a little"])
        assert code == 4

    def test_parse_error_exit_code(self, dark_png, tmp_path, capsys):
        code = run(["enhance", "--image", dark_png, "--out", tmp_path / "x.png",
                    "--prompt", "frobnicate"])
        assert code == 3
        assert "characters" in capsys.readouterr().err

    def test_missing_image_exit_code(self, tmp_path):
        code = run(["enhance", "--image", tmp_path / "absent.png",
                    "--out", tmp_path / "x.png", "--prompt", "brighten it"])
        assert code == 2

    def test_adjust_map_dump(self, dark_png, tmp_path, capsys):
        heat = tmp_path / "adj.png"
        code = run(["enhance", "--image", dark_png, "--out", tmp_path / "o.png",
                    "--prompt", "brighten the image a little",
                    "--adjust-map-out", heat])
        assert code == 0
        assert heat.exists()

    def test_ppm_in_and_out(self, rng, tmp_path, capsys):
        src = tmp_path / "in.ppm"
        save_image(helpers.smooth_image(rng, h=12, w=12, lo=0.1, hi=0.4), src)
        out = tmp_path / "out.ppm"
        code = run(["enhance", "--image", src, "--out", out,
                    "--prompt", "brighten the image by 30%"])
        assert code == 0
        assert load_image(out).pixels.shape == (12, 12, 3)


class TestUsageErrors:
    def test_unknown_flag(self, capsys):
        assert run(["enhance", "--bogus", "x"]) == 1

    def test_unknown_subcommand(self):
        assert run(["transmogrify"]) == 1

    def test_missing_required_flag(self):
        assert run(["enhance", "--prompt", "brighten it"]) == 1

    def test_no_arguments(self):
        assert run([]) == 1

    def test_help_exits_zero_and_lists_subcommands(self, capsys):
        assert run(["--help"]) == 0
        text = capsys.readouterr().out
        for name in ("enhance", "decompose", "autopolish", "build-dataset",
                     "train-reward", "score", "eval", "ddim-demo"):
            assert name in text

    @pytest.mark.parametrize(
        "command,flags",
        [
            ("enhance", ["--image", "--prompt", "--mask", "--out", "--feather",
                         "--heuristic-mask", "--adjust-map-out"]),
            ("decompose", ["--image", "--sigma"]),
            ("autopolish", ["--image", "--model", "--prompt", "--out",
                            "--trace-out"]),
            ("build-dataset", ["--sources-dir", "--out-dir", "--levels",
                               "--per-level"]),
            ("train-reward", ["--ranking", "--out", "--lr", "--batch",
                              "--epochs"]),
            ("score", ["--model", "--image"]),
            ("eval", ["--ref", "--test"]),
            ("ddim-demo", ["--steps", "--eta", "--trajectories", "--out"]),
        ],
    )
    def test_subcommand_help_lists_flags(self, capsys, command, flags):
        assert run([command, "--help"]) == 0
        text = capsys.readouterr().out
        for flag in flags:
            assert flag in text

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert "promptlight" in capsys.readouterr().out


class TestDecompose:
    def test_writes_components(self, dark_png, tmp_path, capsys):
        code = run(["decompose", "--image", dark_png, "--out-dir", tmp_path])
        assert code == 0
        assert (tmp_path / "dark_illum.png").exists()
        assert (tmp_path / "dark_refl.png").exists()


class TestScoreAndEval:
    def test_score_prints_model_score(self, dark_png, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        save_model(zero_model(), model_path)
        code = run(["score", "--model", model_path, "--image", dark_png])
        assert code == 0
        printed = float(capsys.readouterr().out.strip())
        assert printed == score(load_model(model_path), load_image(dark_png))

    def test_eval_emits_metric_json(self, dark_png, tmp_path, capsys):
        code = run(["eval", "--ref", dark_png, "--test", dark_png])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["psnr"] == 99.0
        assert payload["ssim"] == 1.0
        assert payload["angular_color"] == 0.0


class TestAutopolish:
    def test_writes_output_and_trace(self, dark_png, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        save_model(zero_model(), model_path)
        out = tmp_path / "polished.png"
        trace = tmp_path / "trace.json"
        code = run(["autopolish", "--image", dark_png, "--model", model_path,
                    "--out", out, "--trace-out", trace])
        assert code == 0
        assert out.exists()
        steps = json.loads(trace.read_text())
        assert isinstance(steps, list)
        for step in steps:
            assert set(step) == {"op", "reward_before", "reward_after", "accepted"}

    def test_prompt_applied_before_loop(self, dark_png, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        save_model(zero_model(), model_path)
        out = tmp_path / "polished.png"
        code = run(["autopolish", "--image", dark_png, "--model", model_path,
                    "--prompt", "brighten the image by 50%", "--out", out])
        assert code == 0
        capsys.readouterr()
        before = luma(load_image(dark_png).pixels).mean()
        after = luma(load_image(out).pixels).mean()
        assert after > before

    def test_region_prompt_rejected(self, dark_png, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        save_model(zero_model(), model_path)
        code = run(["autopolish", "--image", dark_png, "--model", model_path,
                    "--prompt", "brighten the lamp a little",
                    "--out", tmp_path / "x.png"])
        assert code == 4

    def test_bad_prompt_is_parse_error(self, dark_png, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        save_model(zero_model(), model_path)
        code = run(["autopolish", "--image", dark_png, "--model", model_path,
                    "--prompt", "frobnicate", "--out", tmp_path / "x.png"])
        assert code == 3


class TestDatasetPipeline:
    def test_build_then_train(self, tmp_path, rng, capsys):
        src = tmp_path / "sources"
        src.mkdir()
        for i in range(2):
            save_image(helpers.random_image(rng, h=10, w=10, lo=0.05, hi=0.5),
                       src / f"s{i}.png")
        out_dir = tmp_path / "variants"
        code = run(["build-dataset", "--sources-dir", src, "--out-dir", out_dir,
                    "--levels", "1.10,1.30", "--per-level", "2", "--seed", 3])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["records"] == 2 * 2 * 2
        manifest = Path(summary["manifest"])
        assert manifest.exists()

    def test_build_dataset_reproducible(self, tmp_path, rng, capsys):
        src = tmp_path / "sources"
        src.mkdir()
        save_image(helpers.random_image(rng, h=8, w=8, lo=0.1, hi=0.5),
                   src / "s0.png")
        for name in ("a", "b"):
            code = run(["build-dataset", "--sources-dir", src,
                        "--out-dir", tmp_path / name,
                        "--levels", "1.10", "--per-level", "2", "--seed", 7])
            assert code == 0
        capsys.readouterr()
        files_a = sorted((tmp_path / "a").glob("*.png"))
        files_b = sorted((tmp_path / "b").glob("*.png"))
        assert [f.read_bytes() for f in files_a] == [f.read_bytes() for f in files_b]

    def test_empty_sources_dir(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert run(["build-dataset", "--sources-dir", empty,
                    "--out-dir", tmp_path / "o"]) == 2


class TestDdimDemo:
    def test_summary_and_csv(self, tmp_path, capsys):
        csv_path = tmp_path / "traj.csv"
        code = run(["--seed", 5, "ddim-demo", "--steps", 10,
                    "--trajectories", 200, "--out", csv_path])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["trajectories"] == 200
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "trajectory,y0"
        assert len(lines) == 201

    def test_seeded_runs_identical(self, tmp_path, capsys):
        outputs = []
        for name in ("x.csv", "y.csv"):
            path = tmp_path / name
            assert run(["--seed", 9, "ddim-demo", "--steps", 5,
                        "--trajectories", 50, "--out", path]) == 0
            outputs.append(path.read_bytes())
        capsys.readouterr()
        assert outputs[0] == outputs[1]


def test_module_entry_point_help():
    result = subprocess.run(
        [sys.executable, "-m", "promptlight", "--help"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "promptlight" in result.stdout
