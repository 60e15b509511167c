"""An R-OPE session against in-process trackers, plus the robustness score.

Run with: python3 demos/05_rope_session.py
"""

from giteval import BoundingBox, FrameSize, SequenceRecord, robustness, run_session
from giteval.protocol import InProcessTransport, ProtocolMessage
from giteval.session import SessionConfig

# 16 frames, restart points at 4, 8, and 12 (in a real dataset these are
# pre-selected frames with rich target appearance).
n = 16
gt = tuple(BoundingBox(20.0 + 10 * k, 30.0 + 5 * k, 80.0, 60.0) for k in range(n))
record = SequenceRecord(
    id="rope-demo",
    frame_paths=tuple(f"frames/{k + 1:06d}.png" for k in range(n)),
    gt=gt,
    absent=(False,) * n,
    shotcut=(False,) * n,
    occluded=(False,) * n,
    restart_schedule=(4, 8, 12),
    frame_size=FrameSize(1920, 1080),
)


class FlakyTracker:
    """Tracks perfectly except for a blackout on frames 5-6."""

    def __call__(self, msg):
        if msg.type in ("init", "restart"):
            return ProtocolMessage(type="ready")
        if msg.type == "frame":
            if msg.index in (5, 6):
                box = (0.0, 0.0, 2.0, 2.0)  # lost the target
            else:
                box = record.gt[msg.index - 1].as_tuple()
            return ProtocolMessage(type="prediction", index=msg.index, box=box)
        return None


result = run_session(record, InProcessTransport(FlakyTracker()), SessionConfig(tau_fail=0.5))

print(f"schedule size R = {result.schedule_size}, restarts used I = {result.restarts_used}")
for failure, restart in result.restarts:
    print(f"  failed on frame {failure}, re-initialized at restart point {restart}")
print(f"skipped frames (lost between failure and restart): {result.skipped}")
print(f"scored frames: {sorted(result.scored)}")
print()

# The restart count feeds the robustness score: each video contributes
# S(1/rho) * (1 - I/R), where rho is its mean inter-frame correlation.
# Low-correlation (harder) videos carry more weight through the sigmoid.
sessions = [
    (1.0, result.schedule_size, result.restarts_used),  # this video, rho = 1
    (0.4, 10, 2),                                       # a harder video, 2 restarts
    (0.9, 5, 5),                                        # schedule exhausted: contributes 0
]
report = robustness(sessions)
for video in report.videos:
    print(
        f"rho={video.rho:.2f} R={video.schedule_size:2d} I={video.restarts_used:2d}"
        f" -> contribution {video.contribution:.4f}"
    )
print(f"robustness R = {report.r:.4f}  (weighting: {report.weight_name})")
