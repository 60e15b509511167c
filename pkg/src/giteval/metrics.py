"""Per-sequence and aggregate evaluation: precision, normalized precision
and success curves, attribute breakdowns, and the restart-based
robustness score.

Frames are filtered before scoring: the initialization frame, absent
frames, and shot-transition frames never enter a curve. Curve grids are
fixed and uniform; AUC is the trapezoidal mean over the grid, normalized
by the threshold range so every AUC lives in [0, 1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import attributes as attr_mod
from .attributes import AttributeVector, UndefinedCorrelationError, ppmcc, to_grayscale
from .dataset import ResultTrack, SequenceRecord, load_frame
from .geometry import BoundingBox, center_distance, diou, giou, iou, npre_value

METRIC_NAMES = ("PRE", "NPRE", "SR_IOU", "SR_GIOU", "SR_DIOU")

PRE_THRESHOLDS = np.arange(0.0, 51.0)
PRE_RANK_PIXELS = 20
NPRE_THRESHOLDS = np.linspace(0.0, 1.0, 101)
SR_IOU_THRESHOLDS = np.linspace(0.0, 1.0, 101)
SR_SIGNED_THRESHOLDS = np.linspace(-1.0, 1.0, 101)

RHO_FLOOR = 1e-3


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class EvaluationCurve:
    """Fraction-of-frames curve over a fixed threshold grid.

    ``rank_score`` is the value trackers are ranked on: the 20 px point
    for PRE, the AUC for everything else.
    """

    metric: str
    thresholds: np.ndarray
    values: np.ndarray
    auc: float
    rank_score: float


def _uniform_auc(values: np.ndarray) -> float:
    # trapezoidal mean on a uniform grid; exact 1.0 for an all-ones curve
    inner = float(values[1:-1].sum())
    return (float(values[0]) / 2.0 + float(values[-1]) / 2.0 + inner) / (len(values) - 1)


def precision_curve(distances: Sequence[float]) -> EvaluationCurve:
    """Precision plot: fraction of frames with center distance <= threshold,
    thresholds 0..50 px, ranked at 20 px."""
    dist = np.asarray(distances, dtype=np.float64)
    if dist.size == 0:
        raise MetricsError("precision curve needs at least one frame")
    values = (dist[None, :] <= PRE_THRESHOLDS[:, None]).mean(axis=1)
    return EvaluationCurve(
        metric="PRE",
        thresholds=PRE_THRESHOLDS.copy(),
        values=values,
        auc=_uniform_auc(values),
        rank_score=float(values[PRE_RANK_PIXELS]),
    )


def npre_curve(values_in: Sequence[float]) -> EvaluationCurve:
    """Normalized precision plot: fraction of frames with score <= threshold
    over 101 thresholds in [0, 1], ranked by AUC."""
    scores = np.asarray(values_in, dtype=np.float64)
    if scores.size == 0:
        raise MetricsError("normalized precision curve needs at least one frame")
    if np.any(scores < 0.0) or np.any(scores > 1.0):
        raise MetricsError("normalized precision values must lie in [0, 1]")
    values = (scores[None, :] <= NPRE_THRESHOLDS[:, None]).mean(axis=1)
    auc = _uniform_auc(values)
    return EvaluationCurve(
        metric="NPRE",
        thresholds=NPRE_THRESHOLDS.copy(),
        values=values,
        auc=auc,
        rank_score=auc,
    )


def success_curve(
    scores_in: Sequence[float],
    score_range: tuple[float, float],
    metric: str = "SR_IOU",
) -> EvaluationCurve:
    """Success plot: fraction of frames with overlap >= threshold over 101
    thresholds spanning the score's natural range, ranked by AUC."""
    lo, hi = score_range
    scores = np.asarray(scores_in, dtype=np.float64)
    if scores.size == 0:
        raise MetricsError("success curve needs at least one frame")
    if np.any(scores < lo) or np.any(scores > hi):
        raise MetricsError(f"overlap scores must lie in [{lo}, {hi}]")
    thresholds = np.linspace(lo, hi, 101)
    values = (scores[None, :] >= thresholds[:, None]).mean(axis=1)
    auc = _uniform_auc(values)
    return EvaluationCurve(
        metric=metric, thresholds=thresholds, values=values, auc=auc, rank_score=auc
    )


def filter_frames(record: SequenceRecord) -> list[int]:
    """Eligible 1-based frame indices: everything except frame 1 (used for
    initialization), absent frames, and shot-transition frames."""
    return [
        f
        for f in range(2, len(record) + 1)
        if not record.absent[f - 1] and not record.shotcut[f - 1]
    ]


@dataclass(frozen=True)
class FrameScores:
    """Per-frame scores aligned with an eligible-frame index list."""

    distance: np.ndarray
    npre: np.ndarray
    iou: np.ndarray
    giou: np.ndarray
    diou: np.ndarray


@dataclass(frozen=True)
class SequenceEvaluation:
    sequence_id: str
    eligible_frames: tuple[int, ...]
    scores: FrameScores
    curves: dict[str, EvaluationCurve]


def _score_frame(
    pred: BoundingBox | None, gt: BoundingBox, record: SequenceRecord
) -> tuple[float, float, float, float, float]:
    if pred is None:
        # missing prediction scores as a total miss
        return math.inf, 1.0, 0.0, -1.0, -1.0
    return (
        center_distance(pred, gt),
        npre_value(pred, gt, record.frame_size),
        iou(pred, gt),
        giou(pred, gt),
        diou(pred, gt),
    )


def curves_from_scores(scores: FrameScores, metrics: Sequence[str] = METRIC_NAMES) -> dict[str, EvaluationCurve]:
    builders: dict[str, Callable[[], EvaluationCurve]] = {
        "PRE": lambda: precision_curve(scores.distance),
        "NPRE": lambda: npre_curve(scores.npre),
        "SR_IOU": lambda: success_curve(scores.iou, (0.0, 1.0), "SR_IOU"),
        "SR_GIOU": lambda: success_curve(scores.giou, (-1.0, 1.0), "SR_GIOU"),
        "SR_DIOU": lambda: success_curve(scores.diou, (-1.0, 1.0), "SR_DIOU"),
    }
    unknown = set(metrics) - set(builders)
    if unknown:
        raise MetricsError(f"unknown metrics: {sorted(unknown)}")
    return {name: builders[name]() for name in METRIC_NAMES if name in metrics}


def evaluate_ope(
    record: SequenceRecord,
    result: ResultTrack,
    metrics: Sequence[str] = METRIC_NAMES,
) -> SequenceEvaluation:
    """Score one tracker's result track against a sequence (one-pass
    evaluation). Missing predictions on eligible frames are scored as
    total misses rather than skipped, so abstaining is never rewarded."""
    if len(result) != len(record):
        raise MetricsError(
            f"{record.id}: result has {len(result)} frames, sequence has {len(record)}"
        )
    eligible = filter_frames(record)
    if not eligible:
        raise MetricsError(f"{record.id}: no eligible frames to evaluate")
    rows = [_score_frame(result.boxes[f - 1], record.gt[f - 1], record) for f in eligible]
    arrays = [np.array(col, dtype=np.float64) for col in zip(*rows)]
    scores = FrameScores(*arrays)
    return SequenceEvaluation(
        sequence_id=record.id,
        eligible_frames=tuple(eligible),
        scores=scores,
        curves=curves_from_scores(scores, metrics),
    )


@dataclass(frozen=True)
class AttributeBreakdown:
    """Curves restricted to the eligible frames where one flag holds;
    ``curves`` is None when the subset is too small to be meaningful."""

    flag: str
    frame_count: int
    curves: dict[str, EvaluationCurve] | None


def subset_scores(scores: FrameScores, mask: np.ndarray) -> FrameScores:
    """Restrict per-frame scores to a boolean mask over the eligible frames."""
    return FrameScores(
        distance=scores.distance[mask],
        npre=scores.npre[mask],
        iou=scores.iou[mask],
        giou=scores.giou[mask],
        diou=scores.diou[mask],
    )


def attribute_breakdown(
    evaluation: SequenceEvaluation,
    attrs: Sequence[AttributeVector],
    min_count: int = 10,
    flags: Sequence[str] = attr_mod.FLAG_NAMES,
    metrics: Sequence[str] = METRIC_NAMES,
) -> dict[str, AttributeBreakdown]:
    """Recompute curves over per-attribute subsets of the eligible frames.

    ``attrs`` must align with the sequence frames (index f maps to
    attrs[f-1]). Subsets smaller than min_count are reported as
    insufficient instead of producing noise curves.
    """
    breakdowns = {}
    for flag in flags:
        if flag not in attr_mod.FLAG_NAMES:
            raise MetricsError(f"unknown attribute flag {flag!r}")
        mask = np.array(
            [attrs[f - 1].flag(flag) for f in evaluation.eligible_frames], dtype=bool
        )
        count = int(mask.sum())
        if count < min_count:
            breakdowns[flag] = AttributeBreakdown(flag, count, None)
        else:
            subset = subset_scores(evaluation.scores, mask)
            breakdowns[flag] = AttributeBreakdown(
                flag, count, curves_from_scores(subset, metrics)
            )
    return breakdowns


@dataclass(frozen=True)
class AggregateResult:
    """Benchmark-level curves: per-frame scores pooled across sequences
    (the default ranking basis), plus per-sequence means for reference."""

    curves: dict[str, EvaluationCurve]
    per_sequence_mean: dict[str, dict[str, float]]
    total_frames: int


def aggregate(
    evaluations: Sequence[SequenceEvaluation],
    metrics: Sequence[str] = METRIC_NAMES,
) -> AggregateResult:
    """Pool per-frame scores across sequences and rebuild the curves.

    Order-invariant: evaluations are pooled by concatenation of frame
    scores, so permuting the input changes nothing.
    """
    if not evaluations:
        raise MetricsError("nothing to aggregate")
    pooled = FrameScores(
        distance=np.concatenate([e.scores.distance for e in evaluations]),
        npre=np.concatenate([e.scores.npre for e in evaluations]),
        iou=np.concatenate([e.scores.iou for e in evaluations]),
        giou=np.concatenate([e.scores.giou for e in evaluations]),
        diou=np.concatenate([e.scores.diou for e in evaluations]),
    )
    curves = curves_from_scores(pooled, metrics)
    per_sequence = {}
    for name in curves:
        aucs = [e.curves[name].auc for e in evaluations if name in e.curves]
        ranks = [e.curves[name].rank_score for e in evaluations if name in e.curves]
        per_sequence[name] = {
            "auc": float(np.mean(aucs)),
            "rank_score": float(np.mean(ranks)),
        }
    return AggregateResult(
        curves=curves,
        per_sequence_mean=per_sequence,
        total_frames=int(pooled.iou.size),
    )


def logistic(x: float) -> float:
    """Standard logistic sigmoid, the default weight shaping in robustness."""
    return 1.0 / (1.0 + math.exp(-x))


@dataclass(frozen=True)
class VideoRobustness:
    rho: float
    schedule_size: int
    restarts_used: int
    contribution: float


@dataclass(frozen=True)
class RobustnessReport:
    videos: tuple[VideoRobustness, ...]
    r: float
    weight_name: str = "logistic"

    @property
    def n(self) -> int:
        return len(self.videos)


def robustness(
    sessions: Sequence[tuple[float, int, int]],
    weight_fn: Callable[[float], float] = logistic,
    weight_name: str = "logistic",
) -> RobustnessReport:
    """Robustness over R-OPE sessions: the mean over videos of
    S(1/rho) * (1 - restarts_used / schedule_size).

    ``sessions`` holds (rho, schedule_size, restarts_used) per video. Low
    inter-frame correlation (harder video) raises the weight S(1/rho);
    every restart consumed lowers the video's contribution, hitting zero
    when the whole schedule was spent.
    """
    if not sessions:
        raise MetricsError("robustness needs at least one session")
    videos = []
    total = 0.0
    for rho, schedule_size, restarts_used in sessions:
        if schedule_size < 1:
            raise MetricsError("session has an empty restart schedule")
        if not 0 <= restarts_used <= schedule_size:
            raise MetricsError(
                f"restarts used ({restarts_used}) must lie in 0..{schedule_size}"
            )
        if rho > 1.0:
            raise MetricsError(f"inter-frame correlation {rho} above 1")
        if rho < RHO_FLOOR:
            warnings.warn(
                f"correlation {rho} below {RHO_FLOOR}, clamping",
                RuntimeWarning,
                stacklevel=2,
            )
            rho = RHO_FLOOR
        contribution = weight_fn(1.0 / rho) * (1.0 - restarts_used / schedule_size)
        videos.append(VideoRobustness(rho, schedule_size, restarts_used, contribution))
        total += contribution
    return RobustnessReport(
        videos=tuple(videos), r=total / len(videos), weight_name=weight_name
    )


def sequence_correlation(record: SequenceRecord, frames=None) -> float:
    """Mean inter-frame Pearson correlation of a video.

    Pairs are consecutive frames that are both present and not separated
    by a shot cut; pairs with undefined correlation (constant frames) are
    skipped. Falls back to 1.0 with a warning when no pair qualifies.
    """
    n = len(record)
    if frames is None:
        frames = (load_frame(p) for p in record.frame_paths)
    values = []
    prev_gray = None
    for idx0, frame in enumerate(frames):
        gray = to_grayscale(frame)
        if prev_gray is not None:
            usable = (
                not record.absent[idx0 - 1]
                and not record.absent[idx0]
                and not record.shotcut[idx0]
            )
            if usable:
                try:
                    values.append(ppmcc(prev_gray, gray))
                except UndefinedCorrelationError:
                    pass
        prev_gray = gray
    if not values:
        warnings.warn(
            f"{record.id}: no usable frame pairs for correlation, assuming 1.0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 1.0
    return float(np.mean(values))
