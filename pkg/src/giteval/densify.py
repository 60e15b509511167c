"""Densify sparse manual annotations using forward/backward tracker passes.

Gap frames between two manual keyframes are filled by combining the
neighboring manual boxes (P_gt before, N_gt after) with the forward-pass
prediction B_pos and the backward-pass prediction B_neg, gated by DIoU
agreement tests:

  situation 1   P_gt and N_gt nearly coincide (miniature movement):
                average them directly.
  situation 2   B_pos and B_neg agree (normal movement): trust whichever
                of them stays inside the manual envelope E1 =
                enclose(P_gt, N_gt); if neither does, fall back to the
                manual average.
  situation 3   the passes disagree (rapid movement or a nearby shot
                boundary): near a shot edge use the pass initialized on
                the same side; otherwise keep the pass that agrees better
                with its own manual anchor, clipped to E1.

Every output carries a provenance tag naming the branch that produced it.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass

from .dataset import ResultTrack
from .geometry import BoundingBox, average_box, contains, diou, enclose, intersect


class ShotPosition(enum.Enum):
    INTERIOR = "interior"
    FIRST_TWO_IN_SHOT = "first_two_in_shot"
    LAST_TWO_IN_SHOT = "last_two_in_shot"


class Provenance(str, enum.Enum):
    MANUAL = "manual"
    SITUATION1 = "situation1"
    SITUATION2A = "situation2a"
    SITUATION2B = "situation2b"
    SITUATION2C = "situation2c"
    SITUATION3_SHOT = "situation3_shot"
    SITUATION3_D3 = "situation3_d3"
    SITUATION3_D4 = "situation3_d4"
    FALLBACK = "fallback"


class DensifyError(Exception):
    pass


@dataclass(frozen=True)
class DensifyContext:
    """Inputs for densifying one gap frame."""

    p_gt: BoundingBox
    n_gt: BoundingBox
    b_pos: BoundingBox
    b_neg: BoundingBox
    shot_position: ShotPosition = ShotPosition.INTERIOR
    tau1: float = 0.9
    tau2: float = 0.5

    def __post_init__(self):
        for name in ("tau1", "tau2"):
            tau = getattr(self, name)
            if not -1.0 < tau <= 1.0:
                raise ValueError(f"{name} must lie in (-1, 1], got {tau}")


@dataclass(frozen=True)
class DensifyDecision:
    """One densified box plus the branch that produced it and the DIoU
    gate values that were evaluated along the way (None where a branch
    was never reached)."""

    box: BoundingBox
    provenance: Provenance
    d1: float | None = None
    d2: float | None = None
    d3: float | None = None
    d4: float | None = None


@dataclass(frozen=True)
class DenseTrack:
    """Densified per-frame track; manual frames keep their boxes unchanged."""

    boxes: tuple[BoundingBox, ...]
    provenance: tuple[Provenance, ...]
    decisions: tuple[DensifyDecision | None, ...]  # None on manual frames
    tau1: float
    tau2: float

    def __len__(self) -> int:
        return len(self.boxes)


def densify_frame(ctx: DensifyContext) -> DensifyDecision:
    """Synthesize the box for one gap frame.

    Follows the three-situation branch structure exactly; the only case
    the branches leave open is an empty situation-3 intersection, which
    falls back to the manual average under a distinct provenance tag.
    """
    d1 = diou(ctx.p_gt, ctx.n_gt)
    if d1 >= ctx.tau1:
        return DensifyDecision(average_box(ctx.p_gt, ctx.n_gt), Provenance.SITUATION1, d1=d1)

    e1 = enclose(ctx.p_gt, ctx.n_gt)
    d2 = diou(ctx.b_pos, ctx.b_neg)
    if d2 >= ctx.tau2:
        pos_inside = contains(e1, ctx.b_pos)
        neg_inside = contains(e1, ctx.b_neg)
        if pos_inside and neg_inside:
            box, tag = average_box(ctx.b_pos, ctx.b_neg), Provenance.SITUATION2A
        elif pos_inside or neg_inside:
            box, tag = (ctx.b_pos if pos_inside else ctx.b_neg), Provenance.SITUATION2B
        else:
            box, tag = average_box(ctx.p_gt, ctx.n_gt), Provenance.SITUATION2C
        return DensifyDecision(box, tag, d1=d1, d2=d2)

    if ctx.shot_position is ShotPosition.LAST_TWO_IN_SHOT:
        return DensifyDecision(
            average_box(ctx.b_pos, ctx.p_gt), Provenance.SITUATION3_SHOT, d1=d1, d2=d2
        )
    if ctx.shot_position is ShotPosition.FIRST_TWO_IN_SHOT:
        return DensifyDecision(
            average_box(ctx.b_neg, ctx.n_gt), Provenance.SITUATION3_SHOT, d1=d1, d2=d2
        )

    d3 = diou(ctx.p_gt, ctx.b_pos)
    d4 = diou(ctx.n_gt, ctx.b_neg)
    candidate = ctx.b_pos if d3 >= d4 else ctx.b_neg
    clipped = intersect(e1, candidate)
    if clipped is None:
        return DensifyDecision(
            average_box(ctx.p_gt, ctx.n_gt), Provenance.FALLBACK, d1=d1, d2=d2, d3=d3, d4=d4
        )
    tag = Provenance.SITUATION3_D3 if d3 >= d4 else Provenance.SITUATION3_D4
    return DensifyDecision(clipped, tag, d1=d1, d2=d2, d3=d3, d4=d4)


def shot_positions(shotcut: list[bool] | tuple[bool, ...]) -> list[ShotPosition]:
    """Per-frame shot position derived from shot-cut start flags.

    A frame is last_two_in_shot when a new shot starts one or two frames
    later, first_two_in_shot when a shot started one or two frames
    earlier. When both hold (a very short shot) last-two wins, matching
    the branch order of the densification rules.
    """
    n = len(shotcut)
    positions = []
    for idx0 in range(n):
        last_two = (idx0 + 1 < n and shotcut[idx0 + 1]) or (
            idx0 + 2 < n and shotcut[idx0 + 2]
        )
        first_two = (idx0 - 1 >= 0 and shotcut[idx0 - 1]) or (
            idx0 - 2 >= 0 and shotcut[idx0 - 2]
        )
        if last_two:
            positions.append(ShotPosition.LAST_TWO_IN_SHOT)
        elif first_two:
            positions.append(ShotPosition.FIRST_TWO_IN_SHOT)
        else:
            positions.append(ShotPosition.INTERIOR)
    return positions


def _shot_starts(shotcut, n: int) -> list[int]:
    # shot index per frame; a flagged frame begins a new shot
    shots = []
    shot = 0
    for idx0 in range(n):
        if shotcut[idx0] and idx0 > 0:
            shot += 1
        shots.append(shot)
    return shots


def densify_sequence(
    keyframes: list[int],
    manual: list[BoundingBox],
    forward: ResultTrack,
    backward: ResultTrack,
    shotcut: list[bool] | tuple[bool, ...],
    tau1: float = 0.9,
    tau2: float = 0.5,
) -> DenseTrack:
    """Densify a whole sequence from sparse manual keyframes.

    ``keyframes`` are 1-based frame indices, paired elementwise with the
    ``manual`` boxes. The forward/backward tracks and the shotcut flags
    must cover the full sequence. Every gap frame needs an enclosing
    keyframe pair inside its own shot and predictions from both passes.
    """
    if len(keyframes) != len(manual):
        raise DensifyError(
            f"{len(keyframes)} keyframe indices but {len(manual)} manual boxes"
        )
    if not keyframes:
        raise DensifyError("no keyframes given")
    n = len(forward)
    if len(backward) != n:
        raise DensifyError(
            f"forward track has {n} frames, backward has {len(backward)}"
        )
    if len(shotcut) != n:
        raise DensifyError(f"shotcut flags cover {len(shotcut)} of {n} frames")
    manual_by_frame: dict[int, BoundingBox] = {}
    previous = 0
    for idx, box in zip(keyframes, manual):
        if not 1 <= idx <= n:
            raise DensifyError(f"keyframe index {idx} out of range 1..{n}")
        if idx <= previous:
            raise DensifyError("keyframe indices must be strictly increasing")
        previous = idx
        manual_by_frame[idx] = box

    shots = _shot_starts(shotcut, n)
    positions = shot_positions(shotcut)
    sorted_keys = sorted(manual_by_frame)

    boxes: list[BoundingBox] = []
    provenance: list[Provenance] = []
    decisions: list[DensifyDecision | None] = []
    for f in range(1, n + 1):
        if f in manual_by_frame:
            boxes.append(manual_by_frame[f])
            provenance.append(Provenance.MANUAL)
            decisions.append(None)
            continue
        pos = bisect.bisect_left(sorted_keys, f)
        p_idx = sorted_keys[pos - 1] if pos > 0 else None
        n_idx = sorted_keys[pos] if pos < len(sorted_keys) else None
        if (
            p_idx is None
            or n_idx is None
            or shots[p_idx - 1] != shots[f - 1]
            or shots[n_idx - 1] != shots[f - 1]
        ):
            raise DensifyError(
                f"frame {f}: no enclosing keyframe pair within its shot"
            )
        b_pos = forward.boxes[f - 1]
        b_neg = backward.boxes[f - 1]
        if b_pos is None:
            raise DensifyError(f"frame {f}: forward track has no prediction")
        if b_neg is None:
            raise DensifyError(f"frame {f}: backward track has no prediction")
        ctx = DensifyContext(
            p_gt=manual_by_frame[p_idx],
            n_gt=manual_by_frame[n_idx],
            b_pos=b_pos,
            b_neg=b_neg,
            shot_position=positions[f - 1],
            tau1=tau1,
            tau2=tau2,
        )
        decision = densify_frame(ctx)
        boxes.append(decision.box)
        provenance.append(decision.provenance)
        decisions.append(decision)

    return DenseTrack(
        boxes=tuple(boxes),
        provenance=tuple(provenance),
        decisions=tuple(decisions),
        tau1=tau1,
        tau2=tau2,
    )


def provenance_csv_lines(track: DenseTrack) -> list[str]:
    """Provenance CSV: comment header capturing the gate thresholds, then
    one `frame,tag,D1,D2,D3,D4` row per frame."""

    def fmt(value: float | None) -> str:
        return "" if value is None else repr(float(value))

    lines = [
        f"# tau1={track.tau1!r} tau2={track.tau2!r}",
        "frame,tag,D1,D2,D3,D4",
    ]
    for idx, (tag, decision) in enumerate(zip(track.provenance, track.decisions), start=1):
        if decision is None:
            lines.append(f"{idx},{tag.value},,,,")
        else:
            lines.append(
                f"{idx},{tag.value},{fmt(decision.d1)},{fmt(decision.d2)},"
                f"{fmt(decision.d3)},{fmt(decision.d4)}"
            )
    return lines
