import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import disk_mask
from spotid import evaluation, gallery as gallery_mod, imaging
from spotid.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def write_scale_image(path, size=64):
    from PIL import Image

    gray = np.full((size, size), 0.1)
    gray[disk_mask((size, size), size // 2, size // 2, 8)] = 0.9
    arr = (np.repeat(gray[..., None], 3, axis=2) * 255).astype(np.uint8)
    Image.fromarray(arr).save(path)


class TestSegmentCommand:
    def test_writes_mask_and_metadata(self, runner, tmp_path):
        img = tmp_path / "scale.png"
        out = tmp_path / "mask.png"
        write_scale_image(img)
        result = runner.invoke(main, ["segment", str(img), "--out", str(out)])
        assert result.exit_code == 0, result.output
        mask = imaging.load_mask(out)
        assert mask.any()
        meta = json.loads(result.output)
        assert meta["foreground_pixels"] == int(mask.sum())
        assert meta["params_used"]["gamma"] == 2.2

    def test_emit_threads(self, runner, tmp_path):
        img = tmp_path / "scale.png"
        out = tmp_path / "mask.png"
        write_scale_image(img)
        result = runner.invoke(
            main, ["segment", str(img), "--out", str(out), "--emit-threads"]
        )
        assert result.exit_code == 0, result.output
        dark = imaging.load_mask(tmp_path / "mask.dark.png")
        bright = imaging.load_mask(tmp_path / "mask.bright.png")
        assert np.array_equal(imaging.load_mask(out), dark | bright)

    def test_params_yaml(self, runner, tmp_path):
        img = tmp_path / "scale.png"
        write_scale_image(img)
        cfg = tmp_path / "params.yaml"
        cfg.write_text("gamma: 1.7\narea_min: 5\n")
        result = runner.invoke(
            main,
            ["segment", str(img), "--out", str(tmp_path / "m.png"), "--params", str(cfg)],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["params_used"]["gamma"] == 1.7

    def test_missing_input_fails(self, runner, tmp_path):
        result = runner.invoke(
            main, ["segment", str(tmp_path / "absent.png"), "--out", "m.png"]
        )
        assert result.exit_code != 0


@pytest.fixture()
def corpus_dir(tmp_path):
    out = tmp_path / "corpus"
    gallery_mod.generate_synthetic_corpus(
        3, 2, seed=9, width=128, height=128, spots_range=(6, 9), out_dir=out
    )
    return out


class TestIdentifyCommand:
    def test_table_output(self, runner, corpus_dir, tmp_path):
        g = gallery_mod.load_gallery(corpus_dir)
        query = tmp_path / "query.png"
        imaging.save_mask(g.mask_of(g.records[0]), query)
        result = runner.invoke(
            main, ["identify", str(query), "--gallery", str(corpus_dir), "--top", "3"]
        )
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith(f"{g.records[0].individual_id}:")

    def test_json_output(self, runner, corpus_dir, tmp_path):
        g = gallery_mod.load_gallery(corpus_dir)
        query = tmp_path / "query.png"
        imaging.save_mask(g.mask_of(g.records[2]), query)
        result = runner.invoke(
            main,
            ["identify", str(query), "--gallery", str(corpus_dir), "--json",
             "--method", "icp"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["method"] == "icp"
        assert body["candidates"][0]["dissimilarity"] < 1e-9


class TestEvalSeg:
    def test_json_report(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        seg_dir = tmp_path / "seg"
        gt_dir.mkdir()
        seg_dir.mkdir()
        rng = np.random.default_rng(3)
        for k in range(3):
            gt = np.zeros((40, 40), bool)
            for cx, cy in rng.uniform(6, 34, (4, 2)):
                gt |= disk_mask((40, 40), cx, cy, 3)
            seg = gt ^ (rng.uniform(size=gt.shape) < 0.01)
            imaging.save_mask(gt, gt_dir / f"im{k}.png")
            imaging.save_mask(seg, seg_dir / f"im{k}.png")
        result = runner.invoke(main, ["eval-seg", str(gt_dir), str(seg_dir)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["images"] == 3
        assert 0 <= body["summary"]["recall"]["mean"] <= 1
        assert len(body["hoover"]["correct_detected"]) == 10

    def test_perfect_masks_score_perfectly(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        seg_dir = tmp_path / "seg"
        gt_dir.mkdir()
        seg_dir.mkdir()
        gt = disk_mask((30, 30), 15, 15, 5)
        imaging.save_mask(gt, gt_dir / "a.png")
        imaging.save_mask(gt, seg_dir / "a.png")
        body = json.loads(
            runner.invoke(main, ["eval-seg", str(gt_dir), str(seg_dir)]).output
        )
        assert body["summary"]["f_measure"]["mean"] == 1.0
        assert body["hoover"]["correct_detected"] == [1.0] * 10

    def test_csv_report(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        seg_dir = tmp_path / "seg"
        gt_dir.mkdir()
        seg_dir.mkdir()
        gt = disk_mask((20, 20), 10, 10, 4)
        imaging.save_mask(gt, gt_dir / "a.png")
        imaging.save_mask(gt, seg_dir / "a.png")
        result = runner.invoke(
            main, ["eval-seg", str(gt_dir), str(seg_dir), "--report", "csv"]
        )
        assert result.exit_code == 0
        assert result.output.splitlines()[0].startswith("image,")

    def test_missing_pair_fails(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        seg_dir = tmp_path / "seg"
        gt_dir.mkdir()
        seg_dir.mkdir()
        imaging.save_mask(disk_mask((20, 20), 10, 10, 4), gt_dir / "a.png")
        result = runner.invoke(main, ["eval-seg", str(gt_dir), str(seg_dir)])
        assert result.exit_code != 0


class TestMatrixAndEvalId:
    def test_end_to_end_matrix_then_eval(self, runner, corpus_dir, tmp_path):
        out_csv = tmp_path / "matrix.csv"
        result = runner.invoke(
            main,
            ["match-matrix", "--source", str(corpus_dir), "--target", str(corpus_dir),
             "--out", str(out_csv), "--workers", "2"],
        )
        assert result.exit_code == 0, result.output
        matrix = evaluation.load_matrix_csv(out_csv)
        assert len(matrix.labels) == 6

        roc_out = tmp_path / "eval" / "roc.json"
        result = runner.invoke(
            main, ["eval-id", str(out_csv), "--roc-out", str(roc_out)]
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert 0 <= body["eer"] <= 1
        assert body["top1"] == 1.0
        advisory = json.loads(roc_out.read_text())
        assert advisory["eer"] == body["eer"]
        assert advisory["eer_threshold"] == body["eer_threshold"]


class TestSynth:
    def test_writes_loadable_gallery(self, runner, tmp_path):
        out = tmp_path / "synth"
        result = runner.invoke(
            main,
            ["synth", "--out", str(out), "--individuals", "2", "--samples", "2",
             "--seed", "5"],
        )
        assert result.exit_code == 0, result.output
        g = gallery_mod.load_gallery(out)
        assert len(g.records) == 4

    def test_seed_reproducible(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert (
                runner.invoke(
                    main,
                    ["synth", "--out", str(out), "--individuals", "2",
                     "--samples", "1", "--seed", "3"],
                ).exit_code
                == 0
            )
        ga, gb = gallery_mod.load_gallery(a), gallery_mod.load_gallery(b)
        for ra, rb in zip(ga.records, gb.records):
            assert np.array_equal(ga.mask_of(ra), gb.mask_of(rb))
