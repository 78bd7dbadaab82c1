"""Streaming confidence-accumulation filter.

Per-frame step probabilities are summed per step until the running total
reaches a threshold, at which point a timestamped step completion is emitted
and the accumulator resets. Steps that receive no evidence on a frame decay
multiplicatively instead. A step that has emitted stays ineligible until the
opposing event kind for the same component is emitted (install unlocks after
remove and vice versa), which stops a single long burst from firing twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, StreamOrderError, StructureError
from .procedure import EventSequence, Procedure, StepEvent

STREAM_IDS = ("asd", "temporal", "fused")

# Accumulated float sums may sit a hair under the threshold they mathematically
# reach (e.g. ten adds of 0.1); treat anything this close as a crossing.
EMIT_TOL = 1e-9


@dataclass(frozen=True)
class ConfidenceFrame:
    """Per-step completion probabilities for one frame of one stream."""

    frame: int
    probs: tuple[float, ...]
    stream_id: str = "fused"

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if self.frame < 0:
            raise StructureError(f"frame must be non-negative, got {self.frame}")
        if self.stream_id not in STREAM_IDS:
            raise StructureError(f"stream_id must be one of {STREAM_IDS}")
        if any(p < 0.0 or p > 1.0 for p in self.probs):
            raise ValueError(f"probabilities outside [0, 1] at frame {self.frame}")


@dataclass
class FilterState:
    """Mutable per-video accumulator state; single-owner, one stream at a time."""

    procedure: Procedure
    threshold: float
    decay: float = 0.75
    evidence_floor: float = 0.0
    accumulators: np.ndarray = field(default=None)
    last_kind: list = field(default=None)
    last_frame: int | None = None

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay retention must be in (0, 1], got {self.decay}")
        if self.evidence_floor < 0:
            raise ValueError("evidence floor must be non-negative")
        if self.accumulators is None:
            self.accumulators = np.zeros(self.procedure.n_steps)
        if self.last_kind is None:
            self.last_kind = [None] * self.procedure.n_components


def filter_step(
    state: FilterState, frame: ConfidenceFrame
) -> tuple[FilterState, list[StepEvent]]:
    """Advance the filter by one frame, returning it and any emitted events.

    The state is updated in place and returned for chaining. Within a frame,
    simultaneous crossings emit in ascending step index, and eligibility
    updates from those emissions apply immediately.
    """
    proc = state.procedure
    if len(frame.probs) != proc.n_steps:
        raise StructureError(
            f"frame {frame.frame} carries {len(frame.probs)} probs, expected {proc.n_steps}"
        )
    if state.last_frame is not None and frame.frame <= state.last_frame:
        raise StreamOrderError(
            f"frame {frame.frame} arrived after frame {state.last_frame}"
        )
    probs = np.asarray(frame.probs, dtype=float)
    evidence = probs > state.evidence_floor
    state.accumulators = np.where(
        evidence, state.accumulators + probs, state.accumulators * state.decay
    )
    emitted: list[StepEvent] = []
    for k in np.nonzero(state.accumulators >= state.threshold - EMIT_TOL)[0]:
        action = proc.actions[int(k)]
        component, kind = proc.effect(action)
        if state.last_kind[component] == kind:
            continue  # already recognized; wait for the opposing event
        emitted.append(proc.make_event(action, frame.frame))
        state.last_kind[component] = kind
        state.accumulators[int(k)] = 0.0
    state.last_frame = frame.frame
    return state, emitted


def run_filter(
    frames: Iterable[ConfidenceFrame],
    proc: Procedure,
    threshold: float,
    decay: float = 0.75,
    evidence_floor: float = 0.0,
    video_id: str = "video",
) -> EventSequence:
    """Filter a whole ordered stream into an event sequence.

    Equivalent to folding `filter_step` over the frames in any chunking.
    """
    state = FilterState(
        procedure=proc,
        threshold=threshold,
        decay=decay,
        evidence_floor=evidence_floor,
    )
    events: list[StepEvent] = []
    for f in frames:
        _, out = filter_step(state, f)
        events.extend(out)
    return EventSequence.from_events(events, video_id=video_id, fps=proc.fps)


def fuse(
    asd: ConfidenceFrame,
    temporal: ConfidenceFrame,
    w_asd: float = 0.5,
    w_temporal: float = 0.5,
) -> ConfidenceFrame:
    """Element-wise weighted average of two aligned frames (default 0.5/0.5)."""
    if w_asd < 0 or w_temporal < 0 or abs(w_asd + w_temporal - 1.0) > 1e-12:
        raise ValueError("fusion weights must be non-negative and sum to 1")
    if asd.frame != temporal.frame:
        raise AlignmentError(
            f"frame mismatch: {asd.frame} vs {temporal.frame}"
        )
    if len(asd.probs) != len(temporal.probs):
        raise AlignmentError(
            f"length mismatch at frame {asd.frame}: "
            f"{len(asd.probs)} vs {len(temporal.probs)}"
        )
    fused = tuple(
        w_asd * a + w_temporal * t for a, t in zip(asd.probs, temporal.probs)
    )
    return ConfidenceFrame(frame=asd.frame, probs=fused, stream_id="fused")


def fuse_streams(
    asd_frames: Sequence[ConfidenceFrame],
    temporal_frames: Sequence[ConfidenceFrame],
    w_asd: float = 0.5,
    w_temporal: float = 0.5,
) -> list[ConfidenceFrame]:
    """Fuse two streams frame-by-frame; both must cover the same frames."""
    if len(asd_frames) != len(temporal_frames):
        raise AlignmentError(
            f"streams differ in length: {len(asd_frames)} vs {len(temporal_frames)}"
        )
    return [
        fuse(a, t, w_asd, w_temporal)
        for a, t in zip(asd_frames, temporal_frames)
    ]
