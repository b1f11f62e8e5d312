"""Command-line interface: segment, identify, evaluate, serve."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import evaluation, gallery as gallery_mod, imaging, matching
from .errors import SpotIdError
from .segmentation import SegmentationParams, segment_scale

DEFAULT_HOOVER_TOLERANCES = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]


def _load_params(path) -> SegmentationParams:
    if path is None:
        return SegmentationParams()
    data = yaml.safe_load(Path(path).read_text()) or {}
    return SegmentationParams.from_dict(data)


@click.group()
def main():
    """Spot-pattern biometric toolkit."""


@main.command()
@click.argument("input_image", type=click.Path(exists=True))
@click.option("--params", "params_path", type=click.Path(exists=True), default=None,
              help="Flat key/value YAML file mirroring SegmentationParams.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--emit-threads", is_flag=True, help="Also write per-thread masks.")
def segment(input_image, params_path, out_path, emit_threads):
    """Segment skin spots from a scale photograph."""
    params = _load_params(params_path)
    img = imaging.load_image(input_image)
    result = segment_scale(img, params)
    out = Path(out_path)
    imaging.save_mask(result.mask, out)
    if emit_threads:
        imaging.save_mask(result.dark_thread_mask, out.with_suffix(".dark.png"))
        imaging.save_mask(result.bright_thread_mask, out.with_suffix(".bright.png"))
    meta = {
        "input": str(input_image),
        "mask": str(out),
        "params_used": result.params_used.to_dict(),
        "foreground_pixels": int(result.mask.sum()),
    }
    click.echo(json.dumps(meta, indent=2))


@main.command()
@click.argument("mask_path", type=click.Path(exists=True))
@click.option("--gallery", "gallery_dir", type=click.Path(exists=True), required=True)
@click.option("--method", type=click.Choice(list(matching.METHODS)),
              default=matching.METHOD_ICP_PROCRUSTES)
@click.option("--top", "top_n", type=int, default=5)
@click.option("--json", "as_json", is_flag=True)
def identify(mask_path, gallery_dir, method, top_n, as_json):
    """Rank gallery scales against a query mask."""
    gal = gallery_mod.load_gallery(gallery_dir)
    mask = imaging.load_mask(mask_path)
    ranked = matching.identify(mask, gal, method=method)
    rows = [
        {
            "individual_id": s.individual_id,
            "scale_id": s.scale_id,
            "dissimilarity": s.dissimilarity,
        }
        for s in ranked.scores[:top_n]
    ]
    if as_json:
        click.echo(json.dumps({"method": method, "candidates": rows,
                               "skipped": ranked.skipped}, indent=2))
    else:
        for r in rows:
            click.echo(f"{r['individual_id']}:{r['scale_id']}\t{r['dissimilarity']:.6g}")


def _paired_masks(gt_dir, seg_dir):
    gt_dir, seg_dir = Path(gt_dir), Path(seg_dir)
    names = sorted(p.name for p in gt_dir.glob("*.png"))
    if not names:
        raise click.ClickException(f"no PNG masks in {gt_dir}")
    for name in names:
        seg_path = seg_dir / name
        if not seg_path.exists():
            raise click.ClickException(f"missing segmented mask {seg_path}")
        yield name, imaging.load_mask(gt_dir / name), imaging.load_mask(seg_path)


@main.command(name="eval-seg")
@click.argument("gt_dir", type=click.Path(exists=True))
@click.argument("seg_dir", type=click.Path(exists=True))
@click.option("--report", type=click.Choice(["json", "csv"]), default="json")
def eval_seg(gt_dir, seg_dir, report):
    """Confusion / PRF summaries and Hoover curves over a mask corpus."""
    per_image = []
    hoover_acc = None
    for name, gt, seg in _paired_masks(gt_dir, seg_dir):
        cm = evaluation.confusion(gt, seg)
        pr = evaluation.prf(cm)
        hv = evaluation.hoover(gt, seg, DEFAULT_HOOVER_TOLERANCES)
        per_image.append(
            {
                "image": name,
                "x11": cm.x11, "x12": cm.x12, "x21": cm.x21, "x22": cm.x22,
                "tn": cm.tn, "fn": cm.fn, "fp": cm.fp, "tp": cm.tp,
                "precision": pr.precision, "recall": pr.recall,
                "f_measure": pr.f_measure,
            }
        )
        cls = np.array([hv.correct_detected, hv.over_segmented,
                        hv.under_segmented, hv.missed, hv.noise])
        hoover_acc = cls if hoover_acc is None else hoover_acc + cls

    hoover_mean = hoover_acc / len(per_image)

    def mean_std(key):
        vals = [r[key] for r in per_image if r[key] is not None]
        if not vals:
            return None, None
        return float(np.mean(vals)), float(np.std(vals))

    summary = {}
    for key in ("x11", "x12", "x21", "x22", "precision", "recall", "f_measure"):
        m, s = mean_std(key)
        summary[key] = {"mean": m, "std": s}
    result = {
        "images": len(per_image),
        "summary": summary,
        "hoover": {
            "tolerances": DEFAULT_HOOVER_TOLERANCES,
            "correct_detected": hoover_mean[0].tolist(),
            "over_segmented": hoover_mean[1].tolist(),
            "under_segmented": hoover_mean[2].tolist(),
            "missed": hoover_mean[3].tolist(),
            "noise": hoover_mean[4].tolist(),
        },
        "per_image": per_image,
    }
    if report == "json":
        click.echo(json.dumps(result, indent=2))
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=list(per_image[0]))
        writer.writeheader()
        writer.writerows(per_image)


@main.command(name="match-matrix")
@click.option("--source", "source_dir", type=click.Path(exists=True), required=True)
@click.option("--target", "target_dir", type=click.Path(exists=True), required=True)
@click.option("--method", type=click.Choice(list(matching.METHODS)),
              default=matching.METHOD_ICP_PROCRUSTES)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1)
def match_matrix(source_dir, target_dir, method, out_path, workers):
    """Build the all-pairs dissimilarity matrix for two galleries."""
    src = gallery_mod.load_gallery(source_dir)
    tgt = gallery_mod.load_gallery(target_dir)
    matrix = evaluation.build_dissimilarity_matrix(src, tgt, method=method,
                                                   workers=workers)
    evaluation.save_matrix_csv(matrix, out_path)
    click.echo(f"wrote {len(matrix.labels)}x{len(matrix.labels)} matrix to {out_path}")


@main.command(name="eval-id")
@click.argument("matrix_csv", type=click.Path(exists=True))
@click.option("--report", type=click.Choice(["json"]), default="json")
@click.option("--steps", type=int, default=1000)
@click.option("--roc-out", type=click.Path(), default=None,
              help="Also write {eer, eer_threshold} JSON (advisory threshold file).")
def eval_id(matrix_csv, report, steps, roc_out):
    """EER, FAR/FRR curves and Top-1/Top-5 rates from a dissimilarity matrix."""
    matrix = evaluation.load_matrix_csv(matrix_csv)
    roc = evaluation.far_frr(matrix, steps=steps)
    result = {
        "eer": roc.eer,
        "eer_threshold": roc.eer_threshold,
        "top1": evaluation.n_rank(matrix, 1),
        "top5": evaluation.n_rank(matrix, 5),
        "thresholds": roc.thresholds.tolist(),
        "far": roc.far.tolist(),
        "frr": roc.frr.tolist(),
    }
    if roc_out:
        Path(roc_out).parent.mkdir(parents=True, exist_ok=True)
        Path(roc_out).write_text(
            json.dumps({"eer": roc.eer, "eer_threshold": roc.eer_threshold})
        )
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--individuals", type=int, default=30)
@click.option("--samples", "samples_per", type=int, default=3)
@click.option("--jitter", "jitter_sigma", type=float, default=1.0)
@click.option("--seed", type=int, default=0)
def synth(out_dir, individuals, samples_per, jitter_sigma, seed):
    """Generate a seeded synthetic gallery (stand-in for field data)."""
    gal, _ = gallery_mod.generate_synthetic_corpus(
        individuals, samples_per, jitter_sigma=jitter_sigma, seed=seed,
        out_dir=out_dir,
    )
    click.echo(f"wrote {len(gal.records)} records to {out_dir}")


@main.command()
@click.option("--gallery", "gallery_dir", type=click.Path(), required=True)
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
def serve(gallery_dir, port, host):
    """Run the local review service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(gallery_dir), host=host, port=port)


def entry():  # pragma: no cover
    try:
        main()
    except SpotIdError as err:
        raise click.ClickException(str(err))


if __name__ == "__main__":
    main()
