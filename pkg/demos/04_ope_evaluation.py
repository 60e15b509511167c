"""One-pass evaluation: frame filtering, curves, and aggregation.

Run with: python3 demos/04_ope_evaluation.py
"""

import numpy as np

from giteval import BoundingBox, FrameSize, SequenceRecord, aggregate, evaluate_ope, filter_frames
from giteval.dataset import ResultTrack

# Build an annotated sequence in memory: 20 frames, the target leaves the
# view on frames 8-9, and frame 13 starts a new shot.
n = 20
absent = {8, 9}
shotcut = {13}
gt = [
    None if (k + 1) in absent else BoundingBox(40.0 + 8 * k, 60.0 + 4 * k, 90.0, 70.0)
    for k in range(n)
]
record = SequenceRecord(
    id="demo",
    frame_paths=tuple(f"frames/{k + 1:06d}.png" for k in range(n)),
    gt=tuple(gt),
    absent=tuple((k + 1) in absent for k in range(n)),
    shotcut=tuple((k + 1) in shotcut for k in range(n)),
    occluded=(False,) * n,
    restart_schedule=(),
    frame_size=FrameSize(1280, 720),
)

eligible = filter_frames(record)
print(f"eligible frames: {eligible}")
print("(frame 1 initializes the tracker; absent and transition frames are excluded)")
print()

# Three result tracks: the oracle, a jittery tracker, and one that drifts
# away linearly.
rng = np.random.default_rng(1)
oracle = ResultTrack("oracle", record.gt, (None,) * n)
jitter = ResultTrack(
    "jitter",
    tuple(
        None if b is None else BoundingBox(b.x + rng.normal(0, 6), b.y + rng.normal(0, 6), b.w, b.h)
        for b in record.gt
    ),
    (None,) * n,
)
drift = ResultTrack(
    "drift",
    tuple(
        None if b is None else BoundingBox(b.x + 12.0 * k, b.y, b.w, b.h)
        for k, b in enumerate(record.gt)
    ),
    (None,) * n,
)

for result in (oracle, jitter, drift):
    evaluation = evaluate_ope(record, result)
    pre = evaluation.curves["PRE"]
    print(
        f"{result.sequence_id:7s}"
        f" PRE@20px={pre.rank_score:.3f}"
        f" NPRE AUC={evaluation.curves['NPRE'].auc:.3f}"
        f" SR(IoU) AUC={evaluation.curves['SR_IOU'].auc:.3f}"
        f" SR(GIoU) AUC={evaluation.curves['SR_GIOU'].auc:.3f}"
    )
print()

# Aggregation pools per-frame scores across sequences (frame-weighted),
# so long videos count proportionally to their length.
short = SequenceRecord(
    id="demo-short",
    frame_paths=record.frame_paths[:8],
    gt=record.gt[:8],
    absent=record.absent[:8],
    shotcut=record.shotcut[:8],
    occluded=record.occluded[:8],
    restart_schedule=(),
    frame_size=record.frame_size,
)
evals = [
    evaluate_ope(record, jitter),
    evaluate_ope(short, ResultTrack("jitter", jitter.boxes[:8], (None,) * 8)),
]
pooled = aggregate(evals)
print(f"pooled over {pooled.total_frames} frames: SR(IoU) AUC = {pooled.curves['SR_IOU'].auc:.3f}")
print(f"per-sequence mean of the same metric:   {pooled.per_sequence_mean['SR_IOU']['auc']:.3f}")
