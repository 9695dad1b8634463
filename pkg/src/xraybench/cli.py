"""Command-line entry point.

    xraybench split     --bundle DIR [--ratios 0.6,0.1,0.3] [--seed N]
    xraybench train     --bundle DIR --out DIR [--seed N] [--epochs N]
                        [--batch-size N] [--lr F] [--weight-decay F]
    xraybench eval-cnn  --checkpoint FILE --bundle DIR --out DIR [--split S]
    xraybench zeroshot  --embeddings DIR --out DIR [--mode argmax|calibrated]
                        [--val-embeddings DIR] [--grid-lo F] [--grid-hi F]
                        [--grid-step F] [--logit-scale F]
    xraybench gradcam   --checkpoint FILE --bundle DIR --ids a,b,c --out DIR
                        [--target-class 0|1]
    xraybench synth     --kind K --out DIR [--seed N] [--what bundle|embeddings|both]

Commands exit 0 on success, 2 on usage or validation problems, 3 on numeric
failures, and 4 on I/O failures.  Given identical inputs and seeds, every
command writes byte-identical reports, logs, and checkpoints.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import calibrate, figures, metrics, synth, zeroshot
from .checkpoint import CheckpointMeta, restore_model, save_checkpoint
from .data import load_bundle, normalize, save_bundle, stratified_split, write_manifest
from .errors import InvalidArgument, NumericError, XrayBenchError
from .gradcam import emit_overlay, gradcam
from .optim import AdamWConfig
from .train import TrainConfig, predict_probs, train_model, write_training_log

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_predictions_csv(path: str, preds: metrics.PredictionSet) -> None:
    lines = ["id,p1,pred,truth"]
    for i, sample_id in enumerate(preds.ids):
        lines.append(
            f"{sample_id},{float(preds.p_pos[i])!r},"
            f"{int(preds.predicted[i])},{int(preds.truth[i])}"
        )
    _write_text(path, "\n".join(lines) + "\n")


def _emit_report_files(out: str, preds: metrics.PredictionSet, rep) -> None:
    """The shared tail of every evaluation command: report, CSV, ROC, figure."""
    _write_text(os.path.join(out, "metrics.json"), rep.to_json())
    _write_predictions_csv(os.path.join(out, "predictions.csv"), preds)
    points = metrics.roc_curve_points(preds.p_pos, preds.truth)
    metrics.write_roc_csv(os.path.join(out, "roc_curve.csv"), points)
    figures.save_roc_curve(os.path.join(out, "roc_curve.png"), points)


def cmd_split(args) -> int:
    bundle = load_bundle(args.bundle)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    bundle.records = stratified_split(bundle.records, ratios, args.seed)
    write_manifest(bundle, args.bundle)
    counts = {
        s: int(bundle.split_indices(s).size) for s in ("train", "val", "test")
    }
    print(
        f"split {args.bundle}: train={counts['train']} "
        f"val={counts['val']} test={counts['test']}"
    )
    return EXIT_OK


def cmd_train(args) -> int:
    bundle = load_bundle(args.bundle)
    config = TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        optimizer=AdamWConfig(lr=args.lr, weight_decay=args.weight_decay),
    )
    result = train_model(bundle, config)

    os.makedirs(args.out, exist_ok=True)
    meta = CheckpointMeta(
        seed=config.seed,
        epoch=result.best_epoch,
        val_auc=result.best_val_auc,
        optimizer={
            "algo": "adamw",
            "lr": config.optimizer.lr,
            "weight_decay": config.optimizer.weight_decay,
            "beta1": config.optimizer.beta1,
            "beta2": config.optimizer.beta2,
            "epsilon": config.optimizer.epsilon,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
        },
    )
    save_checkpoint(os.path.join(args.out, "checkpoint.xrb"), result.best_model(), meta)
    write_training_log(os.path.join(args.out, "training_log.csv"), result.history)
    figures.save_training_curves(
        os.path.join(args.out, "training_curves.png"),
        [row[0] for row in result.history],
        [row[1] for row in result.history],
        [row[2] for row in result.history],
    )
    print(
        f"trained {args.epochs} epochs; best val AUC {result.best_val_auc!r} "
        f"at epoch {result.best_epoch}"
    )
    return EXIT_OK


def cmd_eval_cnn(args) -> int:
    model, _ = restore_model(args.checkpoint)
    bundle = load_bundle(args.bundle)
    preds = predict_probs(model, bundle, args.split)
    rep = metrics.report(preds, threshold=0.5)
    os.makedirs(args.out, exist_ok=True)
    _emit_report_files(args.out, preds, rep)
    print(
        f"eval-cnn {args.split}: acc={rep.acc!r} f1={rep.f1!r} auc={rep.roc_auc!r}"
    )
    return EXIT_OK


def cmd_zeroshot(args) -> int:
    eset = zeroshot.load_embedding_set(args.embeddings)
    preds = zeroshot.score_set(eset, logit_scale=args.logit_scale)
    rep_argmax = metrics.report(preds, threshold=None)
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "metrics_argmax.json"), rep_argmax.to_json())
    _write_predictions_csv(os.path.join(args.out, "predictions.csv"), preds)
    points = metrics.roc_curve_points(preds.p_pos, preds.truth)
    metrics.write_roc_csv(os.path.join(args.out, "roc_curve.csv"), points)
    figures.save_roc_curve(os.path.join(args.out, "roc_curve.png"), points)
    summary = f"zeroshot argmax: f1={rep_argmax.f1!r} auc={rep_argmax.roc_auc!r}"

    if args.mode == "calibrated":
        if not args.val_embeddings:
            raise InvalidArgument("calibrated mode requires --val-embeddings")
        val_set = zeroshot.load_embedding_set(args.val_embeddings)
        val_preds = zeroshot.score_set(val_set, logit_scale=args.logit_scale)
        grid = calibrate.ThresholdGrid(args.grid_lo, args.grid_hi, args.grid_step)
        cal = calibrate.sweep(val_preds.p_pos, val_preds.truth, grid)
        rep_cal = calibrate.calibrated_report(
            preds.p_pos, preds.truth, cal.tau_star, ids=preds.ids
        )
        _write_text(os.path.join(args.out, "calibration.json"), cal.to_json())
        calibrate.write_curve_csv(
            os.path.join(args.out, "calibration_curve.csv"), cal.curve
        )
        figures.save_calibration_curve(
            os.path.join(args.out, "calibration_curve.png"), cal.curve, cal.tau_star
        )
        _write_text(
            os.path.join(args.out, "metrics_calibrated.json"), rep_cal.to_json()
        )
        cal_preds = metrics.PredictionSet(
            ids=preds.ids,
            p_pos=preds.p_pos,
            predicted=calibrate.apply_threshold(preds.p_pos, cal.tau_star),
            truth=preds.truth,
        )
        _write_predictions_csv(
            os.path.join(args.out, "predictions_calibrated.csv"), cal_preds
        )
        summary += (
            f"; calibrated: tau={cal.tau_star!r} f1={rep_cal.f1!r} "
            f"auc={rep_cal.roc_auc!r}"
        )

    print(summary)
    return EXIT_OK


def cmd_gradcam(args) -> int:
    model, _ = restore_model(args.checkpoint)
    bundle = load_bundle(args.bundle)
    ids = [s for s in args.ids.split(",") if s] if args.ids else []
    known = {r.id for r in bundle.records}
    unknown = [s for s in ids if s not in known]
    if unknown:
        raise InvalidArgument(f"unknown record ids: {', '.join(unknown)}")

    os.makedirs(args.out, exist_ok=True)
    for sample_id in ids:
        frame = bundle.frames[bundle.index_of(sample_id)]
        cam = gradcam(model, normalize(frame, bundle.normalization), args.target_class)
        emit_overlay(
            frame, cam.heat, os.path.join(args.out, f"{sample_id}_gradcam.ppm")
        )
    print(f"gradcam: wrote {len(ids)} overlay(s) to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.what in ("bundle", "both"):
        bundle = synth.make_bundle(args.kind, args.seed)
        save_bundle(bundle, os.path.join(args.out, "bundle"))
    if args.what in ("embeddings", "both"):
        for split in ("val", "test"):
            eset = synth.make_embedding_set(args.kind, split, args.seed)
            zeroshot.save_embedding_set(
                eset, os.path.join(args.out, f"embeddings-{split}")
            )
    print(f"synth {args.kind} ({args.what}) -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xraybench",
        description="Supervised CNN vs calibrated zero-shot embeddings "
        "on 64x64 chest X-ray tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="assign stratified train/val/test splits")
    p.add_argument("--bundle", required=True)
    p.add_argument("--ratios", default="0.6,0.1,0.3")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train the CNN and keep the best checkpoint")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-cnn", help="evaluate a checkpoint on one split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_cnn)

    p = sub.add_parser("zeroshot", help="score precomputed embeddings")
    p.add_argument("--embeddings", required=True, help="test embedding set")
    p.add_argument("--mode", choices=("argmax", "calibrated"), default="argmax")
    p.add_argument("--val-embeddings")
    p.add_argument("--grid-lo", type=float, default=0.02)
    p.add_argument("--grid-hi", type=float, default=0.98)
    p.add_argument("--grid-step", type=float, default=0.001)
    p.add_argument("--logit-scale", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_zeroshot)

    p = sub.add_parser("gradcam", help="write class activation overlays")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--ids", default="", help="comma-separated record ids")
    p.add_argument("--target-class", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gradcam)

    p = sub.add_parser("synth", help="generate synthetic bundles/embeddings")
    p.add_argument("--kind", required=True, choices=sorted(synth.IMAGE_KINDS))
    p.add_argument("--what", choices=("bundle", "embeddings", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except XrayBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
