"""R-OPE interactive evaluation: stream frames to a tracker, detect
failures, and restart at scheduled restart frames.

One session is a strictly sequential request/response loop over a
transport. The evaluator initializes the tracker with the first frame's
ground truth, then sends frames in order. A prediction whose overlap
with the ground truth drops below the failure threshold triggers a jump
to the next scheduled restart frame, where the tracker is re-initialized
with ground truth; the frames in between are skipped (excluded from the
curves; the robustness score carries the penalty through the restart
count). Absent and shot-transition frames are sent and acknowledged but
never scored and never trigger a failure.

Frames consumed for (re-)initialization are not scored, mirroring the
first frame of a one-pass evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import SequenceRecord
from .geometry import BoundingBox, center_distance, iou, npre_value
from .metrics import filter_frames
from .protocol import ProtocolError, ProtocolMessage, Transport, TransportTimeout


@dataclass(frozen=True)
class SessionConfig:
    tau_fail: float = 0.5
    timeout: float = 30.0


@dataclass(frozen=True)
class ScoredFrame:
    box: BoundingBox
    iou: float
    distance: float
    npre: float


@dataclass
class SessionResult:
    """Outcome of one R-OPE session.

    ``scored`` maps 1-based eligible frame indices to their scores;
    ``skipped`` lists eligible frames lost between a failure and its
    restart (or after schedule exhaustion). ``restarts`` records
    (failure frame, restart frame) pairs in order; restart frames are
    initialization frames and appear in neither scored nor skipped.
    """

    sequence_id: str
    schedule_size: int
    scored: dict[int, ScoredFrame] = field(default_factory=dict)
    skipped: list[int] = field(default_factory=list)
    restarts: list[tuple[int, int]] = field(default_factory=list)
    rho: float | None = None

    @property
    def restarts_used(self) -> int:
        return len(self.restarts)


class SessionAborted(Exception):
    """Protocol violation, timeout, or client failure mid-session."""

    def __init__(self, sequence_id: str, reason: str):
        super().__init__(f"{sequence_id}: {reason}")
        self.sequence_id = sequence_id
        self.reason = reason


def detect_failure(pred: BoundingBox, gt: BoundingBox, tau_fail: float = 0.5) -> bool:
    """True iff the prediction's IoU with the ground truth falls below the
    threshold (strictly: IoU exactly at the threshold is not a failure)."""
    return iou(pred, gt) < tau_fail


def next_restart(schedule, after: int) -> int | None:
    """Smallest scheduled restart frame strictly after the given frame."""
    for idx in schedule:
        if idx > after:
            return idx
    return None


def _expect(transport: Transport, sequence_id: str, timeout: float) -> ProtocolMessage:
    try:
        msg = transport.recv(timeout)
    except TransportTimeout as exc:
        raise SessionAborted(sequence_id, str(exc)) from None
    except ProtocolError as exc:
        raise SessionAborted(sequence_id, f"malformed message: {exc}") from None
    if msg.type == "error":
        raise SessionAborted(sequence_id, f"client error: {msg.message}")
    return msg


def _expect_ready(transport: Transport, sequence_id: str, timeout: float) -> None:
    msg = _expect(transport, sequence_id, timeout)
    if msg.type != "ready":
        raise SessionAborted(sequence_id, f"expected ready, got {msg.type}")


def _expect_prediction(
    transport: Transport, sequence_id: str, index: int, timeout: float
) -> BoundingBox:
    msg = _expect(transport, sequence_id, timeout)
    if msg.type != "prediction":
        raise SessionAborted(sequence_id, f"expected prediction, got {msg.type}")
    if msg.index != index:
        raise SessionAborted(
            sequence_id, f"out-of-order prediction: expected index {index}, got {msg.index}"
        )
    try:
        return BoundingBox(*msg.box)
    except ValueError as exc:
        raise SessionAborted(sequence_id, f"malformed prediction box: {exc}") from None


def run_session(
    record: SequenceRecord,
    transport: Transport,
    config: SessionConfig = SessionConfig(),
) -> SessionResult:
    """Run one R-OPE session over a connected transport.

    The record must carry a non-empty restart schedule. Raises
    SessionAborted on timeouts, protocol violations, or client errors.
    """
    if not record.restart_schedule:
        raise ValueError(f"{record.id}: R-OPE needs a non-empty restart schedule")
    n = len(record)
    eligible = set(filter_frames(record))
    result = SessionResult(
        sequence_id=record.id, schedule_size=len(record.restart_schedule)
    )
    timeout = config.timeout

    def frame_path(f: int) -> str:
        return str(record.frame_paths[f - 1])

    transport.send(
        ProtocolMessage(
            type="init",
            index=1,
            box=record.gt[0].as_tuple(),
            path=frame_path(1),
            sequence=record.id,
        )
    )
    _expect_ready(transport, record.id, timeout)

    t = 2
    while t <= n:
        transport.send(ProtocolMessage(type="frame", index=t, path=frame_path(t)))
        pred = _expect_prediction(transport, record.id, t, timeout)
        if t in eligible:
            gt = record.gt[t - 1]
            result.scored[t] = ScoredFrame(
                box=pred,
                iou=iou(pred, gt),
                distance=center_distance(pred, gt),
                npre=npre_value(pred, gt, record.frame_size),
            )
            if detect_failure(pred, gt, config.tau_fail):
                restart_at = next_restart(record.restart_schedule, t)
                if restart_at is None:
                    result.skipped.extend(f for f in range(t + 1, n + 1) if f in eligible)
                    break
                result.restarts.append((t, restart_at))
                result.skipped.extend(
                    f for f in range(t + 1, restart_at) if f in eligible
                )
                transport.send(
                    ProtocolMessage(
                        type="restart",
                        index=restart_at,
                        box=record.gt[restart_at - 1].as_tuple(),
                        path=frame_path(restart_at),
                    )
                )
                _expect_ready(transport, record.id, timeout)
                t = restart_at + 1
                continue
        t += 1

    transport.send(ProtocolMessage(type="end"))
    return result
