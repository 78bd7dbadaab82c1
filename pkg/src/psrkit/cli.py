"""Command-line surface: evaluate, recognize, simulate, sample, validate.

Exit codes: 0 success, 2 usage error, 3 parse/config failure, 4 undefined
metric (e.g. empty ground truth). Set PSR_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .errors import (
    ConfigError,
    PsrError,
    SchemaError,
    UndefinedMetricError,
)
from .filtering import ConfidenceFrame, FilterState, filter_step, fuse_streams
from .metrics import aggregate, evaluate
from .procedure import EventSequence
from .sampling import clip_indices, kcas_pmf, kfs_batch, sample_clip_ends
from .simulator import run_experiment, simulate
from .state_inference import asd_stream_probs

log = logging.getLogger(__name__)


def _add_parse_mode(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--strict", dest="strict", action="store_true", default=True,
        help="abort on any malformed record (default)",
    )
    group.add_argument(
        "--lenient", dest="strict", action="store_false",
        help="log and skip malformed records",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psrkit",
        description="Streaming procedure-step recognition engine and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="score predictions against ground-truth labels")
    p.add_argument("--labels", required=True, help="ground-truth labels JSONL")
    p.add_argument("--predictions", required=True, help="predicted events JSONL")
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--csv", help="per-video metrics CSV (default: <out>.csv)")
    p.add_argument("--weights", default="", help="edit costs, e.g. insert=1,transpose=2")
    p.add_argument("--include-incorrect", action="store_true",
                   help="keep incorrect completions in the ground truth (diagnostics)")
    p.add_argument("--optimal-matching", action="store_true",
                   help="experimental assignment-based matching instead of greedy")
    p.add_argument("--streams", nargs="*", default=[],
                   help="optional confidence streams for --series-out")
    p.add_argument("--procedure", help="procedure name or file (to validate records)")
    p.add_argument("--series-out", help="per-step confidence-vs-time CSV")
    _add_parse_mode(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recognize", help="turn detector streams into step predictions")
    p.add_argument("--streams", nargs="+", required=True,
                   help="stream files; kind is read from each file's schema header")
    p.add_argument("--procedure", required=True, help="procedure name or file")
    p.add_argument("--threshold", type=float, default=1.0,
                   help="cumulative confidence threshold T (default 1.0)")
    p.add_argument("--decay", type=float, default=0.75,
                   help="retention multiplier on evidence-free frames (default 0.75)")
    p.add_argument("--evidence-floor", type=float, default=0.0,
                   help="probabilities at or below this count as no evidence")
    p.add_argument("--fuse", action="store_true",
                   help="require fusing a state and a temporal stream")
    p.add_argument("--min-confidence", type=float, default=0.0,
                   help="ignore state detections below this confidence")
    p.add_argument("--out", required=True, help="predictions JSONL output path")
    p.add_argument("--series-out", help="per-step confidence/accumulator CSV")
    _add_parse_mode(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("simulate", help="generate traces and the pipeline comparison")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="emit clip-end draws or a key-frame batch")
    p.add_argument("--labels", required=True, help="ground-truth labels JSONL")
    p.add_argument("--mode", required=True, choices=["kcas", "kfs"])
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--procedure", help="procedure name or file (required for kfs)")
    p.add_argument("--video-len", type=int, help="frames per video (required for kcas)")
    p.add_argument("--sigma", type=float, default=45.0, help="Gaussian std in frames")
    p.add_argument("--delta", type=float, default=80.0,
                   help="separation of the two Gaussians from each completion")
    p.add_argument("--window", type=int, default=256, help="clip window w in frames")
    p.add_argument("--clip-frames", type=int, default=64,
                   help="frames sampled per clip (N_w)")
    p.add_argument("--n", type=int, default=100, help="clip draws per video")
    p.add_argument("--tf", type=float, default=2.0,
                   help="seconds after a completion eligible for key frames")
    p.add_argument("--n-sample", type=int, default=16, help="real frames per state")
    p.add_argument("--n-syn", type=int, default=0, help="synthetic refs per state")
    p.add_argument("--synthetic-pool",
                   help="JSON file mapping state_id to synthetic references")
    _add_parse_mode(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="check files against their schemas")
    p.add_argument("--labels", nargs="*", default=[], help="label files to validate")
    p.add_argument("--streams", nargs="*", default=[], help="stream files to validate")
    p.add_argument("--procedure", help="procedure name or file for cross-checks")
    p.set_defaults(func=cmd_validate)

    return parser


def _load_streams(paths, proc, strict):
    """Split stream files by declared schema into (asd map, temporal map)."""
    asd = None
    temporal = None
    for path in paths:
        schema = fileio.peek_schema(path)
        if schema == fileio.ASD_SCHEMA:
            if asd is not None:
                raise SchemaError("more than one state-detection stream given")
            asd = fileio.parse_asd_stream(path, proc, strict=strict)
        elif schema == fileio.TEMPORAL_SCHEMA:
            if temporal is not None:
                raise SchemaError("more than one temporal stream given")
            n = proc.n_steps if proc is not None else None
            temporal = fileio.parse_temporal_stream(path, n, strict=strict)
        else:
            raise SchemaError(
                f"not a recognized stream schema: {schema!r}", path=str(path)
            )
    return asd, temporal


def _densify(frames, video_len, n_steps, stream_id):
    by_frame = {f.frame: f for f in frames}
    zero = tuple(0.0 for _ in range(n_steps))
    out = []
    for t in range(video_len):
        f = by_frame.get(t)
        if f is None:
            f = ConfidenceFrame(frame=t, probs=zero, stream_id=stream_id)
        out.append(f)
    return out


def cmd_evaluate(args) -> int:
    proc = fileio.resolve_procedure(args.procedure) if args.procedure else None
    weights = fileio.parse_weights(args.weights)
    gt = fileio.parse_labels(args.labels, proc=proc, strict=args.strict)
    preds = fileio.parse_labels(args.predictions, proc=proc, strict=args.strict)
    orphans = sorted(set(preds) - set(gt))
    if orphans:
        raise UndefinedMetricError(
            f"predictions reference videos with no ground truth: {orphans}"
        )
    reports = {}
    for vid in sorted(gt):
        pred = preds.get(vid) or EventSequence((), video_id=vid, fps=gt[vid].fps)
        reports[vid] = evaluate(
            gt[vid],
            pred,
            weights=weights,
            include_incorrect=args.include_incorrect,
            optimal_matching=args.optimal_matching,
        )
    summary = aggregate(reports)
    config = {
        "command": "evaluate",
        "labels": str(args.labels),
        "predictions": str(args.predictions),
        "weights": dataclasses.asdict(weights),
        "include_incorrect": args.include_incorrect,
        "optimal_matching": args.optimal_matching,
        "strict": args.strict,
    }
    fileio.write_json(args.out, fileio.build_report(reports, summary, config))
    csv_path = args.csv or str(Path(args.out).with_suffix(".csv"))
    fileio.write_metrics_csv(reports, summary, csv_path)
    if args.series_out:
        if not args.streams:
            raise ValueError("--series-out needs --streams to read confidences from")
        _write_prob_series(args.streams, proc, args.strict, args.series_out)
    tau = "undefined" if summary.tau_s is None else f"{summary.tau_s:.3f}s"
    print(
        f"evaluated {summary.n_videos} video(s): pos={summary.pos:.4f} "
        f"f1={summary.f1:.4f} tau={tau}"
    )
    return 0


def _write_prob_series(paths, proc, strict, out_path):
    asd, temporal = _load_streams(paths, proc, strict)
    rows = []
    for source in (asd, temporal):
        if source is None:
            continue
        for vid in sorted(source):
            items = source[vid]
            if items and isinstance(items[0], ConfidenceFrame):
                for f in items:
                    for k, p in enumerate(f.probs):
                        if p > 0:
                            action = proc.actions[k] if proc else k
                            rows.append((vid, f.frame, k, action, p, ""))
            else:
                for det in items:
                    rows.append((vid, det.frame, "", "", det.confidence, ""))
    fileio.write_series_csv(rows, out_path)


def cmd_recognize(args) -> int:
    proc = fileio.resolve_procedure(args.procedure)
    asd, temporal = _load_streams(args.streams, proc, args.strict)
    if args.fuse and (asd is None or temporal is None):
        raise ValueError("--fuse needs one state stream and one temporal stream")
    if asd is None and temporal is None:
        raise ValueError("no usable streams given")
    videos = sorted(set(asd or {}) | set(temporal or {}))
    predictions = {}
    series_rows = []
    for vid in videos:
        dets = (asd or {}).get(vid, [])
        temp = (temporal or {}).get(vid, [])
        video_len = 0
        if dets:
            video_len = max(video_len, dets[-1].frame + 1)
        if temp:
            video_len = max(video_len, temp[-1].frame + 1)
        if video_len == 0:
            predictions[vid] = EventSequence((), video_id=vid, fps=proc.fps)
            continue
        if dets and temp:
            stream = fuse_streams(
                asd_stream_probs(dets, proc, video_len,
                                 min_confidence=args.min_confidence),
                _densify(temp, video_len, proc.n_steps, "temporal"),
            )
        elif dets:
            stream = asd_stream_probs(dets, proc, video_len,
                                      min_confidence=args.min_confidence)
        else:
            stream = _densify(temp, video_len, proc.n_steps, "temporal")
        state = FilterState(
            procedure=proc,
            threshold=args.threshold,
            decay=args.decay,
            evidence_floor=args.evidence_floor,
        )
        events = []
        active = {
            k for f in stream for k, p in enumerate(f.probs) if p > 0
        }
        for f in stream:
            _, emitted = filter_step(state, f)
            events.extend(emitted)
            if args.series_out:
                for k in sorted(active):
                    series_rows.append(
                        (vid, f.frame, k, proc.actions[k], f.probs[k],
                         state.accumulators[k])
                    )
        predictions[vid] = EventSequence.from_events(events, video_id=vid, fps=proc.fps)
    fileio.serialize_labels(predictions, args.out)
    if args.series_out:
        fileio.write_series_csv(series_rows, args.series_out)
    total = sum(len(p) for p in predictions.values())
    print(f"recognized {total} step completion(s) across {len(videos)} video(s)")
    return 0


def cmd_simulate(args) -> int:
    config, thresholds = fileio.load_sim_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces = simulate(config)
    result = run_experiment(
        config,
        t_asd=thresholds["asd"],
        t_fused=thresholds["fused"],
        t_temporal=thresholds["temporal"],
        decay=thresholds["decay"],
        traces=traces,
    )
    gt = {t.ground_truth.video_id: t.ground_truth for t in traces}
    fileio.serialize_labels(gt, out_dir / "gt_labels.jsonl")
    fileio.serialize_asd_stream(
        {t.ground_truth.video_id: t.asd_detections for t in traces},
        out_dir / "asd_stream.jsonl",
    )
    fileio.serialize_temporal_stream(
        {t.ground_truth.video_id: t.temporal_frames for t in traces},
        out_dir / "temporal_stream.jsonl",
    )
    fileio.write_occlusion_masks(
        {t.ground_truth.video_id: t.occlusion_mask for t in traces},
        out_dir / "occlusion.jsonl",
    )
    doc = {"schema": fileio.COMPARISON_SCHEMA, "version": fileio.VERSION}
    doc.update(result.to_dict())
    fileio.write_json(out_dir / "comparison.json", doc)
    for name in ("asd", "temporal", "fused"):
        s = result.summaries[name]
        tau = "undefined" if s.tau_s is None else f"{s.tau_s:.3f}s"
        print(f"{name:9s} pos={s.pos:.4f} f1={s.f1:.4f} tau={tau}")
    return 0


def cmd_sample(args) -> int:
    labels = fileio.parse_labels(args.labels, strict=args.strict)
    if args.mode == "kcas":
        if args.video_len is None:
            raise ValueError("--video-len is required for kcas sampling")
        specs = {}
        children = np.random.SeedSequence(args.seed).spawn(len(labels))
        for child, vid in zip(children, sorted(labels)):
            completions = [e.frame for e in labels[vid].correct_only()]
            dist = kcas_pmf(
                completions, args.video_len, sigma=args.sigma, delta=args.delta,
                w=args.window,
            )
            ends = sample_clip_ends(dist, args.n, seed=child)
            specs[vid] = [
                clip_indices(int(e), args.window, args.clip_frames) for e in ends
            ]
        config = {
            "command": "sample-kcas",
            "sigma": args.sigma,
            "delta": args.delta,
            "window": args.window,
            "clip_frames": args.clip_frames,
            "n": args.n,
            "seed": args.seed,
            "video_len": args.video_len,
        }
        fileio.write_clip_samples(args.out, specs, config)
        print(f"sampled {args.n} clip(s) for each of {len(specs)} video(s)")
        return 0
    # kfs
    if not args.procedure:
        raise ValueError("--procedure is required for kfs sampling")
    proc = fileio.resolve_procedure(args.procedure)
    pool = None
    if args.synthetic_pool:
        import json

        raw = json.loads(Path(args.synthetic_pool).read_text())
        pool = {int(k): list(v) for k, v in raw.items()}
    spec = kfs_batch(
        labels,
        proc,
        t_f=args.tf,
        n_sample=args.n_sample,
        n_syn=args.n_syn,
        synthetic_pool=pool,
        seed=args.seed,
    )
    config = {
        "command": "sample-kfs",
        "seed": args.seed,
        "procedure": args.procedure,
        "synthetic_pool": args.synthetic_pool,
    }
    fileio.write_kfs_batch(args.out, spec, config)
    print(f"built a batch of {len(spec.entries)} entries over {spec.n_state} state(s)")
    return 0


def cmd_validate(args) -> int:
    proc = fileio.resolve_procedure(args.procedure) if args.procedure else None
    for path in args.labels:
        seqs = fileio.parse_labels(path, proc=proc, strict=True)
        events = sum(len(s) for s in seqs.values())
        print(f"{path}: OK ({len(seqs)} video(s), {events} event(s))")
    for path in args.streams:
        schema = fileio.peek_schema(path)
        if schema == fileio.ASD_SCHEMA:
            if proc is None:
                raise SchemaError(
                    "state streams need --procedure for state-id validation",
                    path=str(path),
                )
            dets = fileio.parse_asd_stream(path, proc, strict=True)
            count = sum(len(d) for d in dets.values())
            print(f"{path}: OK ({len(dets)} video(s), {count} detection(s))")
        elif schema == fileio.TEMPORAL_SCHEMA:
            frames = fileio.parse_temporal_stream(
                path, proc.n_steps if proc else None, strict=True
            )
            count = sum(len(f) for f in frames.values())
            print(f"{path}: OK ({len(frames)} video(s), {count} frame(s))")
        else:
            raise SchemaError(f"unrecognized stream schema {schema!r}", path=str(path))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = os.environ.get("PSR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    try:
        return args.func(args)
    except UndefinedMetricError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except (SchemaError, ConfigError, OSError, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (PsrError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
