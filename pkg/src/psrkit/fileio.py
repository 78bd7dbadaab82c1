"""File formats: JSONL streams, JSON documents, and flat CSV tables.

Every emitted file starts with a schema header (JSONL) or carries schema
fields (JSON documents); parsers reject other schemas and future versions.
Serialization is canonical (sorted keys, shortest round-trip floats) so that
reruns with identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, SchemaError
from .filtering import ConfidenceFrame
from .losses import EmbeddingBatch, ProbBatch
from .metrics import DatasetSummary, EditWeights, EvaluationReport
from .procedure import (
    KINDS,
    AssemblyState,
    EventSequence,
    Procedure,
    StepEvent,
    frame_to_seconds,
    toy_motorcycle,
)
from .sampling import ClipSpec, KfsBatchSpec, KfsEntry
from .state_inference import StateDetection

log = logging.getLogger(__name__)

VERSION = 1

LABELS_SCHEMA = "psrkit/labels"
ASD_SCHEMA = "psrkit/asd-stream"
TEMPORAL_SCHEMA = "psrkit/temporal-stream"
PROCEDURE_SCHEMA = "psrkit/procedure"
REPORT_SCHEMA = "psrkit/report"
CLIP_SAMPLES_SCHEMA = "psrkit/clip-samples"
KFS_BATCH_SCHEMA = "psrkit/kfs-batch"
OCCLUSION_SCHEMA = "psrkit/occlusion"
SIM_CONFIG_SCHEMA = "psrkit/sim-config"
COMPARISON_SCHEMA = "psrkit/comparison"


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path: str | Path, schema: str) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}", path=str(path)) from e
    if not isinstance(doc, dict):
        raise SchemaError("expected a JSON object", path=str(path))
    _check_header(doc, schema, str(path), 1)
    return doc


def _check_header(header: dict, schema: str, path: str, line: int) -> None:
    if header.get("schema") != schema:
        raise SchemaError(
            f"expected schema {schema!r}, found {header.get('schema')!r}",
            path=path,
            line=line,
        )
    version = header.get("version")
    if version != VERSION:
        raise SchemaError(
            f"file declares version {version!r}; this reader supports {VERSION}",
            path=path,
            line=line,
        )


def write_jsonl(
    path: str | Path,
    schema: str,
    records: Iterable[dict],
    header_extra: Mapping[str, Any] | None = None,
) -> None:
    header: dict[str, Any] = {"schema": schema, "version": VERSION}
    if header_extra:
        header.update(header_extra)
    lines = [canonical_dumps(header)]
    lines.extend(canonical_dumps(r) for r in records)
    Path(path).write_text("\n".join(lines) + "\n")


def read_jsonl(path: str | Path, schema: str) -> tuple[dict, list[tuple[int, dict]]]:
    """Header plus (line number, record) pairs. An empty file yields no records."""
    path = Path(path)
    lines = path.read_text().splitlines()
    body: list[tuple[int, dict]] = []
    header: dict = {}
    seen_header = False
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e.msg}", path=str(path), line=lineno) from e
        if not isinstance(obj, dict):
            raise SchemaError("each line must be a JSON object", path=str(path), line=lineno)
        if not seen_header:
            _check_header(obj, schema, str(path), lineno)
            header = obj
            seen_header = True
        else:
            body.append((lineno, obj))
    return header, body


def peek_schema(path: str | Path) -> str | None:
    """The schema name declared by a file's first non-blank line, if any."""
    for line in Path(path).read_text().splitlines():
        if line.strip():
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                return None
            return obj.get("schema") if isinstance(obj, dict) else None
    return None


def _field(rec: dict, name: str, path: str, lineno: int):
    if name not in rec:
        raise SchemaError(f"missing field {name!r}", path=path, line=lineno)
    return rec[name]


def _collect(
    path: str | Path,
    schema: str,
    parse_one: Callable[[dict, int], Any],
    strict: bool,
) -> tuple[dict, list]:
    header, body = read_jsonl(path, schema)
    out = []
    for lineno, rec in body:
        try:
            out.append(parse_one(rec, lineno))
        except SchemaError as e:
            if strict:
                raise
            log.warning("skipping bad record: %s", e)
    return header, out


# ---------------------------------------------------------------------------
# step-completion labels / predictions


def serialize_labels(sequences: Mapping[str, EventSequence], path: str | Path) -> None:
    records = []
    for video_id in sorted(sequences):
        seq = sequences[video_id]
        for e in seq.events:
            records.append(
                {
                    "action": e.action,
                    "component": e.component,
                    "correct": e.correct,
                    "fps": seq.fps,
                    "frame": e.frame,
                    "kind": e.kind,
                    "video_id": video_id,
                }
            )
    write_jsonl(path, LABELS_SCHEMA, records)


def parse_labels(
    path: str | Path,
    proc: Procedure | None = None,
    strict: bool = True,
) -> dict[str, EventSequence]:
    """Load per-video event sequences from a labels/predictions file.

    In strict mode any malformed record aborts with its line number; lenient
    mode logs and skips it. Duplicate (video, frame, action) triples are
    always an error.
    """
    spath = str(path)

    def parse_one(rec: dict, lineno: int):
        video_id = _field(rec, "video_id", spath, lineno)
        frame = _field(rec, "frame", spath, lineno)
        fps = _field(rec, "fps", spath, lineno)
        action = _field(rec, "action", spath, lineno)
        component = _field(rec, "component", spath, lineno)
        kind = _field(rec, "kind", spath, lineno)
        correct = _field(rec, "correct", spath, lineno)
        if not isinstance(frame, int) or frame < 0:
            raise SchemaError(f"frame must be a non-negative integer, got {frame!r}", spath, lineno)
        if not isinstance(action, int):
            raise SchemaError(f"action must be an integer id, got {action!r}", spath, lineno)
        if not isinstance(component, int) or component < 0:
            raise SchemaError(f"component must be a non-negative integer, got {component!r}", spath, lineno)
        if kind not in KINDS:
            raise SchemaError(f"kind must be one of {list(KINDS)}, got {kind!r}", spath, lineno)
        if not isinstance(correct, bool):
            raise SchemaError(f"correct must be a boolean, got {correct!r}", spath, lineno)
        if not isinstance(fps, (int, float)) or isinstance(fps, bool) or fps <= 0:
            raise SchemaError(f"fps must be a positive number, got {fps!r}", spath, lineno)
        if proc is not None:
            if action not in proc.action_effects:
                raise SchemaError(f"unknown action {action} for procedure {proc.name!r}", spath, lineno)
            if proc.effect(action) != (component, kind):
                raise SchemaError(
                    f"action {action} should be {proc.action_label(action)!r}, "
                    f"record says component {component} / {kind}",
                    spath,
                    lineno,
                )
        event = StepEvent(
            action=action,
            component=component,
            kind=kind,
            correct=correct,
            frame=frame,
            time_s=frame_to_seconds(frame, float(fps)),
        )
        return lineno, str(video_id), float(fps), event

    _, rows = _collect(path, LABELS_SCHEMA, parse_one, strict)
    by_video: dict[str, list] = {}
    fps_of: dict[str, float] = {}
    seen: dict[tuple[str, int, int], int] = {}
    for lineno, video_id, fps, event in rows:
        key = (video_id, event.frame, event.action)
        if key in seen:
            raise SchemaError(
                f"duplicate (video, frame, action) = {key}, first seen on line {seen[key]}",
                spath,
                lineno,
            )
        seen[key] = lineno
        if video_id in fps_of and fps_of[video_id] != fps:
            raise SchemaError(
                f"video {video_id!r} declares conflicting fps values", spath, lineno
            )
        fps_of[video_id] = fps
        by_video.setdefault(video_id, []).append(event)
    return {
        vid: EventSequence.from_events(events, video_id=vid, fps=fps_of[vid])
        for vid, events in by_video.items()
    }


# ---------------------------------------------------------------------------
# detector streams


def serialize_asd_stream(
    detections: Mapping[str, Sequence[StateDetection]], path: str | Path
) -> None:
    records = []
    for video_id in sorted(detections):
        for det in detections[video_id]:
            if det.state.state_id is None:
                raise ValueError(
                    f"detection at frame {det.frame} has no state id; cannot serialize"
                )
            records.append(
                {
                    "confidence": det.confidence,
                    "frame": det.frame,
                    "state_id": det.state.state_id,
                    "video_id": video_id,
                }
            )
    write_jsonl(path, ASD_SCHEMA, records)


def parse_asd_stream(
    path: str | Path, proc: Procedure, strict: bool = True
) -> dict[str, list[StateDetection]]:
    spath = str(path)
    states_by_id = {
        s.state_id: s for s in (proc.states or ()) if s.state_id is not None
    }

    def parse_one(rec: dict, lineno: int):
        video_id = str(_field(rec, "video_id", spath, lineno))
        frame = _field(rec, "frame", spath, lineno)
        state_id = _field(rec, "state_id", spath, lineno)
        confidence = _field(rec, "confidence", spath, lineno)
        if not isinstance(frame, int) or frame < 0:
            raise SchemaError(f"frame must be a non-negative integer, got {frame!r}", spath, lineno)
        if state_id not in states_by_id:
            raise SchemaError(
                f"unknown state_id {state_id!r}; known ids: {sorted(states_by_id)}",
                spath,
                lineno,
            )
        if not isinstance(confidence, (int, float)) or not 0 <= confidence <= 1:
            raise SchemaError(f"confidence must be in [0, 1], got {confidence!r}", spath, lineno)
        return video_id, StateDetection(
            frame=frame, state=states_by_id[state_id], confidence=float(confidence)
        )

    _, rows = _collect(path, ASD_SCHEMA, parse_one, strict)
    out: dict[str, list[StateDetection]] = {}
    last: dict[str, int] = {}
    for video_id, det in rows:
        if video_id in last and det.frame <= last[video_id]:
            raise SchemaError(
                f"video {video_id!r}: frame {det.frame} not after frame {last[video_id]}",
                spath,
            )
        last[video_id] = det.frame
        out.setdefault(video_id, []).append(det)
    return out


def serialize_temporal_stream(
    frames: Mapping[str, Sequence[ConfidenceFrame]], path: str | Path
) -> None:
    records = []
    for video_id in sorted(frames):
        for f in frames[video_id]:
            records.append(
                {"frame": f.frame, "probs": list(f.probs), "video_id": video_id}
            )
    write_jsonl(path, TEMPORAL_SCHEMA, records)


def parse_temporal_stream(
    path: str | Path,
    n_steps: int | None = None,
    strict: bool = True,
) -> dict[str, list[ConfidenceFrame]]:
    spath = str(path)

    def parse_one(rec: dict, lineno: int):
        video_id = str(_field(rec, "video_id", spath, lineno))
        frame = _field(rec, "frame", spath, lineno)
        probs = _field(rec, "probs", spath, lineno)
        if not isinstance(frame, int) or frame < 0:
            raise SchemaError(f"frame must be a non-negative integer, got {frame!r}", spath, lineno)
        if not isinstance(probs, list):
            raise SchemaError("probs must be a list", spath, lineno)
        if n_steps is not None and len(probs) != n_steps:
            raise SchemaError(
                f"frame {frame}: probs has length {len(probs)}, expected {n_steps}",
                spath,
                lineno,
            )
        if any(
            not isinstance(p, (int, float)) or isinstance(p, bool) or not 0 <= p <= 1
            for p in probs
        ):
            raise SchemaError(f"frame {frame}: probabilities outside [0, 1]", spath, lineno)
        return video_id, ConfidenceFrame(
            frame=frame, probs=tuple(float(p) for p in probs), stream_id="temporal"
        )

    _, rows = _collect(path, TEMPORAL_SCHEMA, parse_one, strict)
    out: dict[str, list[ConfidenceFrame]] = {}
    last: dict[str, int] = {}
    for video_id, frame in rows:
        if video_id in last and frame.frame <= last[video_id]:
            raise SchemaError(
                f"video {video_id!r}: frame {frame.frame} not after frame {last[video_id]}",
                spath,
            )
        last[video_id] = frame.frame
        out.setdefault(video_id, []).append(frame)
    return out


# ---------------------------------------------------------------------------
# procedures


BUILTIN_PROCEDURES: dict[str, Callable[[], Procedure]] = {
    "toy-motorcycle": toy_motorcycle,
}


def save_procedure(proc: Procedure, path: str | Path) -> None:
    doc = {
        "schema": PROCEDURE_SCHEMA,
        "version": VERSION,
        "name": proc.name,
        "fps": proc.fps,
        "components": list(proc.components),
        "actions": [
            {"id": a, "component": proc.effect(a)[0], "kind": proc.effect(a)[1]}
            for a in proc.actions
        ],
        "states": None
        if proc.states is None
        else [{"state_id": s.state_id, "bits": s.to_string()} for s in proc.states],
    }
    write_json(path, doc)


def load_procedure(path: str | Path) -> Procedure:
    doc = read_json(path, PROCEDURE_SCHEMA)
    spath = str(path)
    try:
        states = None
        if doc.get("states") is not None:
            states = tuple(
                AssemblyState.from_string(s["bits"], s.get("state_id"))
                for s in doc["states"]
            )
        return Procedure(
            components=tuple(doc["components"]),
            actions=tuple(a["id"] for a in doc["actions"]),
            action_effects={a["id"]: (a["component"], a["kind"]) for a in doc["actions"]},
            fps=doc["fps"],
            states=states,
            name=doc.get("name", "procedure"),
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed procedure document: {e}", path=spath) from e


def resolve_procedure(spec: str) -> Procedure:
    """A builtin procedure name or a path to a procedure JSON file."""
    if spec in BUILTIN_PROCEDURES:
        return BUILTIN_PROCEDURES[spec]()
    if Path(spec).exists():
        return load_procedure(spec)
    raise SchemaError(
        f"{spec!r} is neither a builtin procedure ({sorted(BUILTIN_PROCEDURES)}) "
        "nor an existing file"
    )


# ---------------------------------------------------------------------------
# reports


def build_report(
    per_video: Mapping[str, EvaluationReport],
    summary: DatasetSummary,
    config: Mapping[str, Any],
) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "version": VERSION,
        "config": dict(config),
        "videos": {vid: per_video[vid].to_dict() for vid in sorted(per_video)},
        "aggregate": summary.to_dict(),
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    return str(value)


def write_metrics_csv(
    per_video: Mapping[str, EvaluationReport],
    summary: DatasetSummary,
    path: str | Path,
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["video_id", "pos", "precision", "recall", "f1", "tau_s", "tp", "fp", "fn"]
        )
        for vid in sorted(per_video):
            r = per_video[vid]
            writer.writerow(
                [vid, r.pos, r.precision, r.recall, r.f1, _csv_cell(r.tau_s)]
                + list(r.counts)
            )
        writer.writerow(
            ["ALL", summary.pos, summary.precision, summary.recall, summary.f1,
             _csv_cell(summary.tau_s)] + list(summary.counts)
        )


def write_series_csv(rows: Iterable[tuple], path: str | Path) -> None:
    """Per-step confidence and accumulator values over time, for plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["video_id", "frame", "step", "action", "prob", "accumulator"])
        for row in rows:
            writer.writerow(list(row))


# ---------------------------------------------------------------------------
# sampler outputs


def write_clip_samples(
    path: str | Path, specs: Mapping[str, Sequence[ClipSpec]], config: Mapping[str, Any]
) -> None:
    records = []
    for video_id in sorted(specs):
        for s in specs[video_id]:
            records.append(
                {
                    "end_frame": s.end_frame,
                    "indices": list(s.indices),
                    "video_id": video_id,
                    "window": s.window,
                }
            )
    write_jsonl(path, CLIP_SAMPLES_SCHEMA, records, header_extra={"config": dict(config)})


def parse_clip_samples(path: str | Path) -> tuple[dict, dict[str, list[ClipSpec]]]:
    spath = str(path)

    def parse_one(rec: dict, lineno: int):
        try:
            return str(rec["video_id"]), ClipSpec(
                end_frame=rec["end_frame"],
                window=rec["window"],
                indices=tuple(rec["indices"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed clip record: {e}", spath, lineno) from e

    header, rows = _collect(path, CLIP_SAMPLES_SCHEMA, parse_one, strict=True)
    out: dict[str, list[ClipSpec]] = {}
    for video_id, spec in rows:
        out.setdefault(video_id, []).append(spec)
    return header.get("config", {}), out


def write_kfs_batch(path: str | Path, spec: KfsBatchSpec, config: Mapping[str, Any]) -> None:
    extra = {
        "config": dict(config),
        "t_f": spec.t_f,
        "n_sample": spec.n_sample,
        "n_syn": spec.n_syn,
        "n_state": spec.n_state,
        "fps": spec.fps,
    }
    records = []
    for e in spec.entries:
        rec: dict[str, Any] = {"source": e.source, "state_id": e.state_id}
        if e.source == "real":
            rec["video_id"] = e.video_id
            rec["frame"] = e.frame
        else:
            rec["ref"] = e.ref
        records.append(rec)
    write_jsonl(path, KFS_BATCH_SCHEMA, records, header_extra=extra)


def parse_kfs_batch(path: str | Path) -> KfsBatchSpec:
    spath = str(path)

    def parse_one(rec: dict, lineno: int):
        try:
            source = rec["source"]
            if source == "real":
                return KfsEntry(
                    state_id=rec["state_id"],
                    source="real",
                    video_id=str(rec["video_id"]),
                    frame=int(rec["frame"]),
                )
            if source == "synthetic":
                return KfsEntry(state_id=rec["state_id"], source="synthetic", ref=rec["ref"])
            raise SchemaError(f"unknown source {source!r}", spath, lineno)
        except KeyError as e:
            raise SchemaError(f"missing field {e}", spath, lineno) from e

    header, entries = _collect(path, KFS_BATCH_SCHEMA, parse_one, strict=True)
    try:
        return KfsBatchSpec(
            entries=tuple(entries),
            t_f=header["t_f"],
            n_sample=header["n_sample"],
            n_syn=header["n_syn"],
            n_state=header["n_state"],
            fps=header["fps"],
        )
    except KeyError as e:
        raise SchemaError(f"batch header missing {e}", spath, line=1) from e


# ---------------------------------------------------------------------------
# simulator outputs


def write_occlusion_masks(masks: Mapping[str, Sequence[bool]], path: str | Path) -> None:
    records = [
        {"mask": "".join("1" if b else "0" for b in masks[vid]), "video_id": vid}
        for vid in sorted(masks)
    ]
    write_jsonl(path, OCCLUSION_SCHEMA, records)


def parse_occlusion_masks(path: str | Path) -> dict[str, list[bool]]:
    spath = str(path)

    def parse_one(rec: dict, lineno: int):
        try:
            mask = rec["mask"]
            if any(c not in "01" for c in mask):
                raise SchemaError("mask must be a 0/1 string", spath, lineno)
            return str(rec["video_id"]), [c == "1" for c in mask]
        except KeyError as e:
            raise SchemaError(f"missing field {e}", spath, lineno) from e

    _, rows = _collect(path, OCCLUSION_SCHEMA, parse_one, strict=True)
    return dict(rows)


# ---------------------------------------------------------------------------
# loss batch loaders (columnar text)


def load_embedding_batch(path: str | Path, temperature: float = 0.07) -> EmbeddingBatch:
    """Rows of `<label> <v1> ... <vd>`; blank lines and #-comments ignored."""
    labels = []
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            labels.append(int(parts[0]))
            rows.append([float(x) for x in parts[1:]])
        except ValueError as e:
            raise SchemaError(f"bad embedding row: {e}", str(path), lineno) from e
    if rows and len({len(r) for r in rows}) != 1:
        raise SchemaError("embedding rows differ in dimension", str(path))
    return EmbeddingBatch(
        vectors=np.array(rows, dtype=float),
        labels=np.array(labels),
        temperature=temperature,
    )


def load_prob_batch(path: str | Path) -> ProbBatch:
    """First data line is the step count C; each row then holds C binary
    targets followed by C predicted probabilities."""
    lines = [
        (no, ln.strip())
        for no, ln in enumerate(Path(path).read_text().splitlines(), start=1)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise SchemaError("empty probability batch", str(path))
    try:
        c = int(lines[0][1])
    except ValueError as e:
        raise SchemaError("first line must be the step count", str(path), lines[0][0]) from e
    targets, preds = [], []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2 * c:
            raise SchemaError(f"expected {2 * c} columns, got {len(parts)}", str(path), lineno)
        try:
            values = [float(x) for x in parts]
        except ValueError as e:
            raise SchemaError(f"bad number: {e}", str(path), lineno) from e
        targets.append(values[:c])
        preds.append(values[c:])
    return ProbBatch(predictions=np.array(preds), targets=np.array(targets, dtype=int))


# ---------------------------------------------------------------------------
# simulator config


def _typed(doc: Mapping, field_name: str, types, default=None, required=False):
    if field_name not in doc:
        if required:
            raise ConfigError(field_name, "is required")
        return default
    value = doc[field_name]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(field_name, f"has the wrong type: {value!r}")
    return value


def load_sim_config(path: str | Path):
    """(SimConfig, thresholds dict) from a JSON config document."""
    from .simulator import (
        AsdModel,
        ErrorModel,
        OcclusionModel,
        SimConfig,
        TemporalModel,
    )

    doc = read_json(path, SIM_CONFIG_SCHEMA)
    known = {
        "schema", "version", "procedure", "n_videos", "fps", "step_gap",
        "occlusion", "asd", "temporal", "errors", "seed", "tail_frames",
        "thresholds",
    }
    for key in doc:
        if key not in known:
            raise ConfigError(key, "is not a recognized config field")

    proc_spec = doc.get("procedure", "toy-motorcycle")
    if isinstance(proc_spec, str):
        proc = resolve_procedure(proc_spec)
    else:
        raise ConfigError("procedure", "must be a builtin name or a file path")

    def sub(name: str) -> dict:
        value = doc.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(name, "must be an object")
        return value

    occ = sub("occlusion")
    asd = sub("asd")
    temporal = sub("temporal")
    errors = sub("errors")
    config = SimConfig(
        procedure=proc,
        n_videos=int(_typed(doc, "n_videos", (int,), default=3)),
        fps=float(_typed(doc, "fps", (int, float), default=proc.fps)),
        step_gap=float(_typed(doc, "step_gap", (int, float), default=120.0)),
        occlusion=OcclusionModel(
            p_occlude=float(_typed(occ, "p_occlude", (int, float), required=True)),
            p_reveal=float(_typed(occ, "p_reveal", (int, float), required=True)),
        ),
        asd=AsdModel(
            confidence=float(_typed(asd, "confidence", (int, float), default=0.9)),
            false_detection_rate=float(
                _typed(asd, "false_detection_rate", (int, float), default=0.0)
            ),
        ),
        temporal=TemporalModel(
            response_frames=int(_typed(temporal, "response_frames", (int,), default=30)),
            peak_prob=float(_typed(temporal, "peak_prob", (int, float), default=0.6)),
            hit_prob=float(_typed(temporal, "hit_prob", (int, float), default=0.7)),
            fp_rate=float(_typed(temporal, "fp_rate", (int, float), default=1e-3)),
            fp_low=float(_typed(temporal, "fp_low", (int, float), default=0.1)),
            fp_high=float(_typed(temporal, "fp_high", (int, float), default=0.4)),
        ),
        errors=ErrorModel(
            p_incorrect=float(_typed(errors, "p_incorrect", (int, float), default=0.0))
        ),
        seed=int(_typed(doc, "seed", (int,), default=0)),
        tail_frames=int(_typed(doc, "tail_frames", (int,), default=600)),
    )
    thresholds = doc.get("thresholds", {})
    if not isinstance(thresholds, dict):
        raise ConfigError("thresholds", "must be an object")
    out_thresholds = {
        "asd": float(_typed(thresholds, "asd", (int, float), default=0.5)),
        "fused": float(_typed(thresholds, "fused", (int, float), default=0.4)),
        "decay": float(_typed(thresholds, "decay", (int, float), default=0.75)),
    }
    t_temp = _typed(thresholds, "temporal", (int, float), default=None)
    out_thresholds["temporal"] = float(t_temp) if t_temp is not None else None
    return config, out_thresholds


# ---------------------------------------------------------------------------
# external annotation import


def import_raw_annotations(path: str | Path, fps: float) -> dict[str, EventSequence]:
    """Adapter for third-party annotation exports.

    Intended mapping: source video identifier -> video_id, completion frame
    index -> frame, the annotated action -> (action, component, kind) via a
    procedure table, and the correctness flag -> correct.

    TODO: finalize the column mapping against the released annotation files.
    """
    raise NotImplementedError("external annotation import is not wired up yet")


def parse_weights(spec: str) -> EditWeights:
    """Parse `insert=1,delete=1,substitute=1,transpose=1` style weight strings."""
    if not spec.strip():
        return EditWeights()
    values = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ValueError(f"bad weight component {part!r}; expected name=value")
        name, _, raw = part.partition("=")
        name = name.strip()
        if name not in ("insert", "delete", "substitute", "transpose"):
            raise ValueError(f"unknown edit weight {name!r}")
        values[name] = float(raw)
    return EditWeights(**values)
