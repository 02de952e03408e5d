"""Command-line client for the proposal toolkit.

Every subcommand builds a service request from input files, runs it either
in-process or against a running server (``--server URL``), and writes
canonical JSON (sorted keys, compact separators) so reruns are byte-identical.

Exit codes: 0 success, 2 input parse/validation error, 3 invariant violation.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx
from pydantic import BaseModel, ValidationError

from .config import CONFIG_ENV_VAR, RunConfig, load_config
from .service import handlers
from .service import schemas as S

PARSE_ERROR = 2
INVARIANT_ERROR = 3


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot parse {path}: {exc}", err=True)
        sys.exit(PARSE_ERROR)


def _parse(model: type[BaseModel], data, source: str) -> BaseModel:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        click.echo(f"error: {source}: field {loc!r}: {first['msg']}", err=True)
        sys.exit(PARSE_ERROR)


def _dispatch(handler, req: BaseModel, server: str | None, endpoint: str) -> dict:
    if server:
        resp = httpx.post(
            server.rstrip("/") + endpoint, json=req.model_dump(mode="json"), timeout=300
        )
        if resp.status_code != 200:
            click.echo(f"error: server returned {resp.status_code}: {resp.text}", err=True)
            sys.exit(INVARIANT_ERROR)
        return resp.json()
    try:
        return handler(req).model_dump(mode="json")
    except (ValueError, RuntimeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(INVARIANT_ERROR)


def _write(data: dict, output: str | None) -> None:
    text = json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _load_cfg(config_path: str | None) -> RunConfig:
    try:
        return load_config(config_path)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        click.echo(f"error: cannot load config: {exc}", err=True)
        sys.exit(PARSE_ERROR)


@click.group()
def main() -> None:
    """Adaptive per-category region-proposal toolkit."""


server_option = click.option("--server", default=None, help="Base URL of a running service; defaults to in-process execution.")
output_option = click.option("--output", "-o", default=None, help="Output path (stdout when omitted).")
config_option = click.option("--config", "config_path", default=None, help=f"Config file (JSON); falls back to ${CONFIG_ENV_VAR}.")


@main.command()
@click.option("--spec", "spec_path", default=None, help="Scene-spec JSON file.")
@click.option("--seed", type=int, required=True)
@server_option
@output_option
def simulate(spec_path, seed, server, output):
    """Sample a synthetic scene with ground-truth boxes and counts."""
    spec = _parse(S.SceneSpecModel, _read_json(spec_path), spec_path) if spec_path else S.SceneSpecModel()
    req = S.SimulateRequest(spec=spec, seed=seed)
    _write(_dispatch(handlers.handle_simulate, req, server, "/simulate"), output)


@main.command("assign-counts")
@click.option("--counts", "counts_path", default=None, help="Count file {category: count}.")
@click.option("--scene", "scene_path", default=None, help="Scene file; counts are tallied from its objects.")
@click.option("--seed", type=int, required=True)
@server_option
@output_option
@config_option
def assign_counts(counts_path, scene_path, seed, server, output, config_path):
    """Label (category, level) cells for count-prior training."""
    cfg = _load_cfg(config_path)
    if counts_path:
        counts = _read_json(counts_path)
    elif scene_path:
        scene = _parse(S.Scene, _read_json(scene_path), scene_path)
        counts = {}
        for obj in scene.objects:
            counts[str(obj.category)] = counts.get(str(obj.category), 0) + 1
    else:
        click.echo("error: one of --counts or --scene is required", err=True)
        sys.exit(PARSE_ERROR)
    req = _parse(
        S.AssignCountsRequest,
        {"counts": counts, "levels": list(cfg.base_levels), "seed": seed},
        counts_path or scene_path or "<args>",
    )
    _write(_dispatch(handlers.handle_assign_counts, req, server, "/assign-counts"), output)


@main.command("predict-counts")
@click.option("--prediction", "pred_path", required=True, help="Prediction file {categories, levels, scores, regressions}.")
@click.option("--threshold", type=float, default=None, help="Score threshold (default from config).")
@server_option
@output_option
@config_option
def predict_counts(pred_path, threshold, server, output, config_path):
    """Decode final per-category counts from raw count-prior outputs."""
    cfg = _load_cfg(config_path)
    data = _read_json(pred_path)
    data.setdefault("score_threshold", threshold if threshold is not None else cfg.count_score_threshold)
    req = _parse(S.PredictCountsRequest, data, pred_path)
    _write(_dispatch(handlers.handle_predict_counts, req, server, "/predict-counts"), output)


@main.command("label-anchors")
@click.option("--scene", "scene_path", required=True, help="Scene file with integer categories >= 1.")
@click.option("--grid-w", type=int, required=True)
@click.option("--grid-h", type=int, required=True)
@click.option("--seed", type=int, required=True)
@server_option
@output_option
@config_option
def label_anchors(scene_path, grid_w, grid_h, seed, server, output, config_path):
    """Assign multi-class labels to a grid of anchors."""
    cfg = _load_cfg(config_path)
    scene = _parse(S.Scene, _read_json(scene_path), scene_path)
    req = _parse(
        S.LabelAnchorsRequest,
        {
            "grid_w": grid_w,
            "grid_h": grid_h,
            "scales": list(cfg.anchor_scales),
            "ratios": list(cfg.anchor_ratios),
            "stride": cfg.anchor_stride,
            "ground_truth": [o.model_dump() for o in scene.objects],
            "pos_iou": cfg.pos_iou,
            "neg_iou": cfg.neg_iou,
            "neg_ratio": cfg.neg_ratio,
            "seed": seed,
        },
        scene_path,
    )
    _write(_dispatch(handlers.handle_label_anchors, req, server, "/label-anchors"), output)


@main.command()
@click.option("--detections", "det_path", required=True, help="Detection file [{category, score, box}].")
@server_option
@output_option
@config_option
def nms(det_path, server, output, config_path):
    """Run per-category non-maximum suppression."""
    cfg = _load_cfg(config_path)
    req = _parse(
        S.NmsRequest,
        {
            "detections": _read_json(det_path),
            "iou_threshold": cfg.nms_iou,
            "per_category": cfg.nms_iou_per_category,
        },
        det_path,
    )
    _write(_dispatch(handlers.handle_nms, req, server, "/nms"), output)


@main.command()
@click.option("--detections", "det_path", required=True)
@click.option("--counts", "counts_path", required=True, help="Predicted count file {category: count}.")
@server_option
@output_option
@config_option
def select(det_path, counts_path, server, output, config_path):
    """Keep the top proposals per category under the adaptive budget."""
    cfg = _load_cfg(config_path)
    req = _parse(
        S.SelectRequest,
        {
            "detections": _read_json(det_path),
            "counts": _read_json(counts_path),
            "pos_factor": cfg.pos_factor,
            "base_budget": cfg.base_budget,
        },
        det_path,
    )
    _write(_dispatch(handlers.handle_select, req, server, "/select"), output)


@main.command()
@click.option("--detections", "det_path", required=True)
@click.option("--ground-truth", "gt_path", required=True, help="Scene file with ground-truth objects.")
@click.option("--prc-dir", default=None, help="Directory for per-category recall,precision CSV files.")
@click.option("--eleven-point", is_flag=True, default=False)
@server_option
@output_option
@config_option
def evaluate(det_path, gt_path, prc_dir, eleven_point, server, output, config_path):
    """Match detections to ground truth and report AP / mAP."""
    cfg = _load_cfg(config_path)
    scene = _parse(S.Scene, _read_json(gt_path), gt_path)
    req = _parse(
        S.EvaluateRequest,
        {
            "detections": _read_json(det_path),
            "ground_truth": [o.model_dump() for o in scene.objects],
            "iou_threshold": cfg.eval_iou,
            "eleven_point": eleven_point,
        },
        det_path,
    )
    result = _dispatch(handlers.handle_evaluate, req, server, "/evaluate")
    _write(result, output)
    if prc_dir:
        out = Path(prc_dir)
        out.mkdir(parents=True, exist_ok=True)
        for cat, entry in result["categories"].items():
            lines = ["recall,precision"] + [f"{r},{p}" for r, p in entry["curve"]]
            (out / f"{cat}.csv").write_text("\n".join(lines) + "\n")


@main.command()
@click.option("--scene-spec", "spec_path", default=None)
@click.option("--noise", "noise_path", default=None)
@click.option("--seed", type=int, required=True)
@server_option
@output_option
@config_option
def pipeline(spec_path, noise_path, seed, server, output, config_path):
    """Simulate, decode counts, budget, select, and evaluate end to end."""
    cfg = _load_cfg(config_path)
    spec = _parse(S.SceneSpecModel, _read_json(spec_path), spec_path) if spec_path else S.SceneSpecModel()
    noise = _parse(S.NoiseSpecModel, _read_json(noise_path), noise_path) if noise_path else S.NoiseSpecModel()
    req = S.PipelineRequest(config=cfg, scene=spec, noise=noise, seed=seed)
    _write(_dispatch(handlers.handle_pipeline, req, server, "/pipeline"), output)


if __name__ == "__main__":
    main()
