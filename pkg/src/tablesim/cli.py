"""Batch pipeline driver: generate -> scan -> split -> evaluate -> serve.

Every command is idempotent under identical flags; outputs carry no
timestamps. Exit codes: 0 success, 2 validation error, 3 pipeline error.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import constants
from .annotate import (
    assemble_variant,
    load_boxes,
    load_labeled_cloud,
    save_boxes,
    save_labeled_cloud,
    split_dataset,
)
from .catalog import load_catalog, validate_catalog
from .errors import TablesimError, ValidationError
from .fusion import ReconstructionParams
from .metrics import map_at, miou
from .placement import SceneConfig, procedural_place
from .scansim import DEFAULT_INTRINSICS, save_depth_frame
from .synthetic import build_demo_catalog

warnings.filterwarnings("ignore", message="The TBB threading layer")


def _emit(as_json: bool, message: str, **fields) -> None:
    if as_json:
        click.echo(json.dumps({"msg": message, **fields}, sort_keys=True))
    else:
        extra = " ".join(f"{k}={v}" for k, v in fields.items())
        click.echo(f"{message} {extra}".rstrip())


def _load_config_defaults(path: str) -> dict:
    """Pipeline manifest: {command: {option: value}}; flags still win."""
    text = Path(path).read_text()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            raise ValidationError("TOML configs need Python >= 3.11; use JSON")
        return tomllib.loads(text)
    return json.loads(text)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON/TOML file with per-command defaults")
@click.pass_context
def main(ctx, config_path) -> None:
    """Tabletop scene pipeline."""
    if config_path:
        try:
            ctx.default_map = _load_config_defaults(config_path)
        except (OSError, ValueError) as e:
            click.echo(f"error: bad config file: {e}", err=True)
            sys.exit(2)


def _run(fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except (ValidationError, click.UsageError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    except TablesimError as e:
        click.echo(f"pipeline error: {e}", err=True)
        sys.exit(3)


@main.command("catalog")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--assets-per-category", default=2, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def catalog_cmd(out_dir, seed, assets_per_category, as_json):
    """Build the built-in synthetic demo catalog."""

    def body():
        cat = build_demo_catalog(out_dir, seed=seed,
                                 assets_per_category=assets_per_category)
        findings = validate_catalog(cat)
        _emit(as_json, "catalog built", path=str(Path(out_dir) / "catalog.json"),
              objects=len(cat.objects), tables=len(cat.tables),
              findings=len(findings))
        for f in findings:
            _emit(as_json, "finding", kind=f.kind, subject=f.subject,
                  detail=f.detail)

    _run(body)


@main.command("gen")
@click.option("--catalog", "catalog_path", required=True,
              type=click.Path(exists=True))
@click.option("--variant", type=click.Choice(["vanilla", "crowd", "whole_room"]),
              default="vanilla", show_default=True)
@click.option("--count", default=5, show_default=True, help="scenes to generate")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def gen_cmd(catalog_path, variant, count, seed, out_dir, as_json):
    """Generate procedural scene configs."""

    def body():
        if count < 1:
            raise ValidationError("--count must be >= 1")
        cat = load_catalog(catalog_path)
        cat.require_nonempty()
        configs_dir = Path(out_dir) / "configs"
        configs_dir.mkdir(parents=True, exist_ok=True)
        root = np.random.default_rng(seed)
        scene_seeds = root.integers(0, 2**31 - 1, size=count)
        table_picks = root.integers(0, len(cat.tables), size=count)
        for i in range(count):
            table = cat.tables[int(table_picks[i])]
            config = SceneConfig(room_ref=table.room, table_id=table.id,
                                 seed=int(scene_seeds[i]), variant=variant)
            procedural_place(config, cat,
                             count_range=constants.VARIANT_COUNT_RANGES[variant])
            path = configs_dir / f"scene_{i:04d}.json"
            config.save(path)
            _emit(as_json, "config written", path=str(path),
                  table=table.id, objects=len(config.placements))

    _run(body)


def _scan_one(config_path: Path, catalog_path: str, out_dir: Path,
              params: ReconstructionParams, save_frames: bool) -> dict:
    cat = load_catalog(catalog_path)
    config = SceneConfig.load(config_path)
    stem = config_path.stem
    frames_dir = out_dir / "frames" / stem
    sink = None
    if save_frames:
        frames_dir.mkdir(parents=True, exist_ok=True)

        def sink(idx, frame):
            save_depth_frame(frame, frames_dir / f"frame_{idx:04d}.png")

    sample = assemble_variant(config, cat, config.variant, seed=config.seed,
                              method="scan", params=params, scene_id=stem,
                              frame_sink=sink)
    scenes_dir = out_dir / "scenes"
    labels_dir = out_dir / "labels"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)
    from .meshio import save_mesh
    save_mesh(sample.mesh, scenes_dir / f"{stem}.ply")
    save_boxes(sample.boxes, scenes_dir / f"{stem}_boxes.json")
    save_labeled_cloud(sample.cloud, labels_dir / f"{stem}_labels.ply")
    return {"scene": stem, "points": len(sample.cloud),
            "boxes": len(sample.boxes)}


@main.command("scan")
@click.option("--catalog", "catalog_path", required=True,
              type=click.Path(exists=True))
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True),
              help="directory of scene config JSON files")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--voxel-size", default=constants.TSDF_VOXEL_DEFAULT,
              show_default=True)
@click.option("--poses", default=constants.POSE_BUDGET_DEFAULT, show_default=True)
@click.option("--frames", default=constants.FUSED_FRAMES_TARGET, show_default=True,
              help="target fused frame count")
@click.option("--resolution-scale", default=0.25, show_default=True,
              help="camera resolution as a fraction of 640x480")
@click.option("--no-noise", is_flag=True)
@click.option("--save-frames", is_flag=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def scan_cmd(catalog_path, in_dir, out_dir, voxel_size, poses, frames,
             resolution_scale, no_noise, save_frames, jobs, as_json):
    """Simulate scans for every config: render, fuse, auto-annotate."""

    def body():
        config_paths = sorted(Path(in_dir).glob("*.json"))
        if not config_paths:
            raise ValidationError(f"no config files in {in_dir}")
        params = ReconstructionParams(
            intrinsics=DEFAULT_INTRINSICS.scaled(resolution_scale),
            n_poses=poses, fused_frames=frames, voxel_size=voxel_size,
            noise=not no_noise)
        out = Path(out_dir)
        if jobs > 1:
            from multiprocessing import get_context
            ctx = get_context("spawn")
            with ctx.Pool(jobs) as pool:
                results = pool.starmap(
                    _scan_one,
                    [(p, catalog_path, out, params, save_frames)
                     for p in config_paths])
        else:
            results = [_scan_one(p, catalog_path, out, params, save_frames)
                       for p in config_paths]
        for r in results:
            _emit(as_json, "scene scanned", **r)

    _run(body)


@main.command("split")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True),
              help="directory of scene config JSON files")
@click.option("--ratio", default=0.828, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def split_cmd(in_dir, ratio, seed, out_dir, as_json):
    """Scene-level train/test split (tables never straddle splits)."""

    def body():
        if not 0 < ratio < 1:
            raise ValidationError("--ratio must be in (0, 1)")
        config_paths = sorted(Path(in_dir).glob("*.json"))
        if not config_paths:
            raise ValidationError(f"no config files in {in_dir}")
        items = [(p.stem, SceneConfig.load(p).table_id) for p in config_paths]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            train, test = split_dataset(items, ratio, seed)
        splits_dir = Path(out_dir) / "splits"
        splits_dir.mkdir(parents=True, exist_ok=True)
        (splits_dir / "train.txt").write_text(
            "".join(f"{sid}\n" for sid, _ in sorted(train)))
        (splits_dir / "test.txt").write_text(
            "".join(f"{sid}\n" for sid, _ in sorted(test)))
        _emit(as_json, "split written", train=len(train), test=len(test),
              dir=str(splits_dir))

    _run(body)


@main.command("eval")
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--gt", required=True, type=click.Path(exists=True))
@click.option("--metric", type=click.Choice(["miou", "map25"]), required=True)
@click.option("--num-classes", default=0, help="0 = infer from labels")
@click.option("--iou-thresh", default=constants.MAP_IOU_THRESHOLD,
              show_default=True)
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(pred, gt, metric, num_classes, iou_thresh, as_json):
    """Evaluate predictions: label PLYs (miou) or box JSONs (map25)."""

    def body():
        if metric == "miou":
            p = load_labeled_cloud(pred)
            g = load_labeled_cloud(gt)
            n = num_classes or int(max(p.semantic.max(initial=0),
                                       g.semantic.max(initial=0))) + 1
            mean, per_class = miou(p.semantic, g.semantic, n)
            payload = {"miou": mean,
                       "per_class": {int(i): float(v)
                                     for i, v in enumerate(per_class)
                                     if not np.isnan(v)}}
        else:
            pred_boxes, scores = load_boxes(pred)
            if scores is None:
                scores = [1.0] * len(pred_boxes)
            gt_boxes, _ = load_boxes(gt)
            mean, per_class = map_at(list(zip(pred_boxes, scores)), gt_boxes,
                                     iou_thresh=iou_thresh)
            payload = {"map": mean,
                       "iou_thresh": iou_thresh,
                       "per_class": {int(k): float(v)
                                     for k, v in per_class.items()}}
        click.echo(json.dumps(payload, indent=None if as_json else 2,
                              sort_keys=True))

    _run(body)


@main.command("stats")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True))
@click.option("--configs", "configs_dir", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def stats_cmd(catalog_path, configs_dir, as_json):
    """Shipped defaults plus per-category instance counts of a generated set."""

    def body():
        payload = {"defaults": constants.defaults_summary()}
        if configs_dir:
            if not catalog_path:
                raise ValidationError("--configs needs --catalog to map categories")
            cat = load_catalog(catalog_path)
            counts: dict[str, int] = {}
            scenes = 0
            by_variant: dict[str, int] = {}
            for path in sorted(Path(configs_dir).glob("*.json")):
                config = SceneConfig.load(path)
                scenes += 1
                by_variant[config.variant] = by_variant.get(config.variant, 0) + 1
                for p in config.placements:
                    category = cat.object(p.asset_id).category
                    counts[category] = counts.get(category, 0) + 1
            payload["scenes"] = scenes
            payload["scenes_by_variant"] = by_variant
            payload["instances_by_category"] = dict(sorted(counts.items()))
            payload["instances_total"] = sum(counts.values())
        if as_json:
            click.echo(json.dumps(payload, sort_keys=True))
        else:
            click.echo(json.dumps(payload, indent=2, sort_keys=True))

    _run(body)


@main.command("serve")
@click.option("--catalog", "catalog_path", required=True,
              type=click.Path(exists=True))
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="static frontend bundle to mount at /ui")
def serve_cmd(catalog_path, store_dir, host, port, seed, ui_dir):
    """Run the placement service."""

    def body():
        from .service import serve
        serve(catalog_path, store_dir, host=host, port=port, seed=seed,
              ui_dir=ui_dir)

    _run(body)


if __name__ == "__main__":
    main()
