"""`lens` command-line interface: dataset generation, training, evaluation,
benchmarking, and the edge/relay daemons."""
from __future__ import annotations

import json
import logging
import sys
import time
from pathlib import Path

import click
import numpy as np

from lens.videoio import (
    ActionLabel,
    SkipPolicy,
    generate_synthetic_dataset,
    iter_dataset_paths,
    load_clip,
    measure_throughput,
    repeat_frames,
)

log = logging.getLogger("lens")


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            click.echo(f"{key}: {value}")


@click.group()
@click.option("--log-level", default="warning", show_default=True)
@click.option("--seed", default=7, show_default=True, help="Global random seed.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, log_level, seed, as_json):
    """Low-light surveillance toolkit."""
    _setup_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["json"] = as_json


@main.command("gen-data")
@click.option("--out", "out_dir", default="dataset", show_default=True)
@click.option("--groups", default=8, show_default=True)
@click.option("--clips", default=3, show_default=True)
@click.option("--width", default=64, show_default=True)
@click.option("--height", default=64, show_default=True)
@click.pass_context
def gen_data(ctx, out_dir, groups, clips, width, height):
    """Generate the synthetic low-light clip corpus."""
    out = generate_synthetic_dataset(
        ctx.obj["seed"], groups_per_action=groups, clips_per_group=clips,
        width=width, height=height, out_dir=out_dir,
    )
    total = 4 * groups * clips
    _emit({"dataset": str(out), "clips": total}, ctx.obj["json"])


def _load_videos(dataset: str, flow_cache: str | None):
    from lens.streams import SpatialVideo, TemporalVideo
    from lens.streams.augment import DESK_AUGMENT
    from lens.streams.data import cached_flow_planes

    cache = flow_cache or str(Path(dataset) / "_flows")
    spatial, temporal, labels = [], [], []
    for path, label in iter_dataset_paths(dataset):
        clip = load_clip(path)
        spatial.append(SpatialVideo(clip=clip, label=int(label), cfg=DESK_AUGMENT))
        temporal.append(
            TemporalVideo(planes=cached_flow_planes(path, clip, cache), label=int(label))
        )
        labels.append(int(label))
    return spatial, temporal, labels


@main.command("train-streams")
@click.option("--dataset", default="dataset", show_default=True)
@click.option("--out", "out_dir", default="models", show_default=True)
@click.option("--epochs", default=None, type=int, help="Override preset epochs.")
@click.option("--flow-cache", default=None)
@click.pass_context
def train_streams(ctx, dataset, out_dir, epochs, flow_cache):
    """Train the spatial stream, then the temporal stream via
    cross-modality initialization from the trained spatial model."""
    from dataclasses import replace

    from lens.streams import (
        StreamKind,
        cross_modality_init,
        evaluate,
        new_model,
        save_model,
        train_stream,
    )
    from lens.streams.train import DESK_SPATIAL_CONFIG, DESK_TEMPORAL_CONFIG

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spatial_videos, temporal_videos, _ = _load_videos(dataset, flow_cache)

    cfg_s = DESK_SPATIAL_CONFIG if epochs is None else replace(
        DESK_SPATIAL_CONFIG, epochs=epochs
    )
    cfg_t = DESK_TEMPORAL_CONFIG if epochs is None else replace(
        DESK_TEMPORAL_CONFIG, epochs=epochs
    )

    spatial = new_model(StreamKind.SPATIAL, 3, seed=cfg_s.seed)
    if cfg_s.epochs > 0:
        result_s = train_stream(spatial, spatial_videos, cfg_s)
        history_s = result_s.history_dicts()
    else:
        log.warning("spatial stream left at initialization (--epochs 0)")
        history_s = []
    save_model(spatial, out / "spatial.lmdl", {"history": history_s})

    stack_channels = 2 * temporal_videos[0].stack_len
    temporal = new_model(
        StreamKind.TEMPORAL, stack_channels, seed=cfg_t.seed, conv_bias=1.0
    )
    temporal.conv_w[:] = cross_modality_init(spatial.conv_w, stack_channels)
    if cfg_t.epochs > 0:
        result_t = train_stream(temporal, temporal_videos, cfg_t)
        history_t = result_t.history_dicts()
    else:
        log.warning("temporal stream left at initialization (--epochs 0)")
        history_t = []
    save_model(temporal, out / "temporal.lmdl", {"history": history_t})

    _emit(
        {
            "spatial_model": str(out / "spatial.lmdl"),
            "temporal_model": str(out / "temporal.lmdl"),
            "spatial_train_accuracy": evaluate(spatial, spatial_videos),
            "temporal_train_accuracy": evaluate(temporal, temporal_videos),
        },
        ctx.obj["json"],
    )


def _stream_features(spatial_model, temporal_model, spatial_videos, temporal_videos):
    from lens.streams import predict_video

    features, labels = [], []
    for sv, tv in zip(spatial_videos, temporal_videos):
        s = predict_video(spatial_model, sv)
        t = predict_video(temporal_model, tv)
        features.append(np.concatenate([s, t]))
        labels.append(sv.label)
    return np.array(features), np.array(labels)


@main.command("train-svm")
@click.option("--models", "models_dir", default="models", show_default=True)
@click.option("--dataset", default="dataset", show_default=True,
              help="Corpus whose generation parameters the held-out set copies.")
@click.option("--heldout-groups", default=4, show_default=True)
@click.option("--trials", default=12, show_default=True)
@click.pass_context
def train_svm(ctx, models_dir, dataset, heldout_groups, trials):
    """Fit the fusion SVM on stream outputs over freshly generated held-out
    clips (the streams never saw them), selecting hyperparameters by
    randomized search with 5-fold cross-validation."""
    import tempfile

    from lens.fusion import random_search, save_svm, svm_fit
    from lens.streams import load_model
    from lens.videoio.synth import dataset_manifest

    models = Path(models_dir)
    spatial = load_model(models / "spatial.lmdl")
    temporal = load_model(models / "temporal.lmdl")

    manifest = dataset_manifest(dataset)
    with tempfile.TemporaryDirectory(prefix="lens-heldout-") as tmp:
        heldout = generate_synthetic_dataset(
            manifest["seed"] + 1000,
            groups_per_action=heldout_groups,
            clips_per_group=manifest["clips_per_group"],
            width=manifest["width"],
            height=manifest["height"],
            out_dir=Path(tmp) / "heldout",
        )
        spatial_videos, temporal_videos, _ = _load_videos(str(heldout), None)
        features, labels = _stream_features(
            spatial, temporal, spatial_videos, temporal_videos
        )

    seed = ctx.obj["seed"]
    best_cfg, best_cv, trial_log = random_search(features, labels, trials, seed=seed)
    model = svm_fit(features, labels, best_cfg)
    sidecar = {
        "cv_mean": best_cv.mean,
        "cv_std": best_cv.std,
        "fold_accuracies": best_cv.fold_accuracies,
        "gamma": best_cfg.gamma,
        "C": best_cfg.C,
        "coef0": best_cfg.coef0,
        "trials": trial_log,
    }
    save_svm(model, models / "fusion.lsvm", sidecar)
    _emit(
        {"svm_model": str(models / "fusion.lsvm"), "cv_mean": best_cv.mean,
         "gamma": best_cfg.gamma, "C": best_cfg.C, "coef0": best_cfg.coef0},
        ctx.obj["json"],
    )


@main.command("eval")
@click.option("--dataset", default="dataset", show_default=True)
@click.option("--models", "models_dir", default="models", show_default=True)
@click.option("--out", "out_path", default=None, help="Write the JSON report here.")
@click.option("--flow-cache", default=None)
@click.pass_context
def cmd_eval(ctx, dataset, models_dir, out_path, flow_cache):
    """Per-stream and fused accuracy, confusion matrices, percent changes."""
    from lens.fusion import (
        confusion_matrix,
        load_svm,
        percent_change_table,
        svm_predict,
    )
    from lens.streams import load_model, predict_video

    models = Path(models_dir)
    spatial = load_model(models / "spatial.lmdl")
    temporal = load_model(models / "temporal.lmdl")
    svm = load_svm(models / "fusion.lsvm")

    spatial_videos, temporal_videos, labels = _load_videos(dataset, flow_cache)
    spatial_preds, temporal_preds, fused_preds = [], [], []
    for sv, tv in zip(spatial_videos, temporal_videos):
        s = predict_video(spatial, sv)
        t = predict_video(temporal, tv)
        fused_label, _ = svm_predict(svm, np.concatenate([s, t])[None])
        spatial_preds.append(int(np.argmax(s)))
        temporal_preds.append(int(np.argmax(t)))
        fused_preds.append(int(fused_label[0]))

    cm_s = confusion_matrix(labels, spatial_preds)
    cm_t = confusion_matrix(labels, temporal_preds)
    cm_f = confusion_matrix(labels, fused_preds)
    changes = percent_change_table(cm_s, cm_t, cm_f)
    report = {
        "classes": [a.wire_name for a in ActionLabel],
        "spatial_accuracy": cm_s.accuracy(),
        "temporal_accuracy": cm_t.accuracy(),
        "fused_accuracy": cm_f.accuracy(),
        "confusion": {
            "spatial": cm_s.to_lists(),
            "temporal": cm_t.to_lists(),
            "fused": cm_f.to_lists(),
        },
        "percent_change": {
            stream: ["inf" if np.isinf(x) else round(x, 2) for x in row]
            for stream, row in changes.items()
        },
    }
    text = json.dumps(report, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@main.command("bench")
@click.option("--cost-ms", default=100.0, show_default=True,
              help="Synthetic edge per-frame cost.")
@click.option("--cloud-cost-ms", default=40.0, show_default=True)
@click.option("--reduced-factor", default=0.4, show_default=True,
              help="Cost multiplier for half-resolution rows.")
@click.option("--window-s", default=1.5, show_default=True)
@click.option("--skip", "skip_n", default=1, show_default=True)
@click.pass_context
def bench(ctx, cost_ms, cloud_cost_ms, reduced_factor, window_s, skip_n):
    """Effective-FPS table for edge/cloud with frame skipping and reduced
    resolution, against a calibrated synthetic per-frame cost."""
    from lens.videoio.synth import render_clip

    clip = render_clip(ctx.obj["seed"], ActionLabel.NO_ACTION, 0, 0, 64, 64)
    rows = []
    for mode, base_cost in (("edge", cost_ms), ("cloud", cloud_cost_ms)):
        for skip, reduced in ((0, False), (skip_n, False), (0, True), (skip_n, True)):
            cost_s = base_cost * (reduced_factor if reduced else 1.0) / 1000.0

            def work(_frame, cost=cost_s):
                time.sleep(cost)

            report = measure_throughput(
                repeat_frames(clip), work, SkipPolicy(skip=skip), window_s
            )
            tag = ("J" if mode == "edge" else "C") \
                + ("+SF" if skip else "") + ("+R" if reduced else "")
            rows.append(
                {
                    "row": tag,
                    "mode": mode,
                    "skip": skip,
                    "reduced": reduced,
                    "processing_fps": round(report.processing_fps, 2),
                    "effective_fps": round(report.effective_fps, 2),
                }
            )
    baseline = {r["mode"]: r["effective_fps"] for r in rows if not r["skip"] and not r["reduced"]}
    for r in rows:
        r["speedup"] = round(r["effective_fps"] / baseline[r["mode"]], 2)
    if ctx.obj["json"]:
        click.echo(json.dumps({"rows": rows}, sort_keys=True))
    else:
        click.echo(f"{'row':10} {'eff. FPS':>9} {'proc. FPS':>10} {'speedup':>8}")
        for r in rows:
            click.echo(
                f"{r['row']:10} {r['effective_fps']:9.2f} "
                f"{r['processing_fps']:10.2f} {r['speedup']:8.2f}"
            )


@main.command("flow")
@click.argument("clip_path")
@click.option("--index", default=0, show_default=True, help="First frame of the pair.")
@click.option("--out", "out_path", default=None, help="Write .lflo here.")
@click.option("--viz", "viz_path", default=None, help="Write a color-wheel PNG here.")
@click.pass_context
def cmd_flow(ctx, clip_path, index, out_path, viz_path):
    """Compute and optionally visualize flow for one frame pair of a clip."""
    from lens.optflow import flow_colorize, save_flow, tvl1_flow

    clip = load_clip(clip_path)
    if index + 1 >= len(clip):
        raise click.ClickException(f"clip has {len(clip)} frames; need index+1")
    flow = tvl1_flow(clip.frames[index], clip.frames[index + 1])
    stats = {
        "mean_magnitude": float(flow.magnitude.mean()),
        "max_magnitude": float(flow.magnitude.max()),
    }
    if out_path:
        save_flow(flow, out_path)
        stats["lflo"] = out_path
    if viz_path:
        from PIL import Image

        Image.fromarray(flow_colorize(flow).pixels).save(viz_path)
        stats["viz"] = viz_path
    _emit(stats, ctx.obj["json"])


@main.group()
def edge():
    """Edge agent commands."""


@edge.command("run")
@click.option("--config", "config_path", default=None, help="edge.toml")
@click.option("--clip", "clip_path", required=True,
              help="Frame source: an .lclip file.")
@click.option("--mode", type=click.Choice(["edge", "cloud"]), default=None)
@click.option("--skip", "skip_n", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--camera-id", default=None)
@click.option("--gps", default=None, help="LAT,LON")
@click.option("--relay", "relay_url", default=None)
@click.option("--models", "models_dir", default="models", show_default=True)
@click.option("--no-transmit", is_flag=True, help="Score and detect only.")
@click.pass_context
def edge_run(ctx, config_path, clip_path, mode, skip_n, threshold, camera_id,
             gps, relay_url, models_dir, no_transmit):
    """Run the pipeline over a recorded clip and transmit any detections."""
    from lens.edge import (
        EdgeConfig,
        InferenceMode,
        PipelineScorer,
        Transmitter,
        load_edge_config,
        run_pipeline,
    )
    from lens.fusion import load_svm
    from lens.streams import load_model

    config = load_edge_config(config_path) if config_path else EdgeConfig()
    if mode is not None:
        config.mode = InferenceMode(mode)
    if skip_n is not None:
        config.skip = SkipPolicy(skip=skip_n)
    if threshold is not None:
        config.threshold = min(max(threshold, 0.0), 1.0)
    if camera_id is not None:
        config.camera_id = camera_id
    if gps is not None:
        lat, lon = (float(x) for x in gps.split(","))
        config.lat, config.lon = lat, lon
    if relay_url is not None:
        config.relay_url = relay_url

    scorer = None
    if config.mode == InferenceMode.EDGE:
        models = Path(models_dir)
        scorer = PipelineScorer(
            load_model(models / config.spatial_model),
            load_model(models / config.temporal_model),
            load_svm(models / config.svm_model),
        )
    transmitter = None
    if not no_transmit:
        transmitter = Transmitter(
            config.relay_url, config.auth_token, config.spool_dir
        )
    clip = load_clip(clip_path)
    result = run_pipeline(clip.frames, config, scorer=scorer, transmitter=transmitter,
                          fps=clip.fps)
    if transmitter is not None:
        transmitter.close()
    _emit(
        {
            "frames_ingested": result.frames_ingested,
            "frames_processed": result.frames_processed,
            "events": len(result.events),
            "acknowledged": len(result.acks),
            "labels": [e.label.wire_name for e in result.events],
        },
        ctx.obj["json"],
    )


@main.group()
def relay():
    """Relay service commands."""


@relay.command("serve")
@click.option("--config", "config_path", required=True, help="relay.toml")
@click.option("--dashboard", "dashboard_dir", default=None,
              help="Static dashboard assets to serve under /app.")
def relay_serve(config_path, dashboard_dir):
    """Serve the REST/SSE API and, when models are configured, the binary
    frame-inference port."""
    import uvicorn

    from lens.relay import (
        ModelBundle,
        RelayState,
        create_app,
        load_relay_config,
        start_inference_server,
    )

    config = load_relay_config(config_path)
    state = RelayState(config)
    app = create_app(state, dashboard_dir=dashboard_dir)
    if config.spatial_model and config.temporal_model and config.svm_model:
        bundle = ModelBundle(config.spatial_model, config.temporal_model,
                             config.svm_model)
        start_inference_server(config.host, config.infer_port, bundle)
        log.info("inference server on %s:%d", config.host, config.infer_port)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
