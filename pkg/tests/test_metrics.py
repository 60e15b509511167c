import numpy as np
import pytest

from giteval.attributes import AttributeVector, evaluate_flags, ThresholdConfig
from giteval.dataset import ResultTrack, SequenceRecord
from giteval.geometry import BoundingBox, FrameSize
from giteval.metrics import (
    MetricsError,
    aggregate,
    attribute_breakdown,
    evaluate_ope,
    filter_frames,
    logistic,
    npre_curve,
    precision_curve,
    robustness,
    sequence_correlation,
    success_curve,
)

B = BoundingBox


def make_record(n=10, absent=(), shotcut=(), restart=(), size=FrameSize(640, 480)):
    gt = [
        None if (k + 1) in absent else B(50.0 + 3 * k, 60.0 + 2 * k, 80.0, 60.0)
        for k in range(n)
    ]
    return SequenceRecord(
        id="fixture",
        frame_paths=tuple(f"frames/{k + 1:06d}.png" for k in range(n)),
        gt=tuple(gt),
        absent=tuple((k + 1) in absent for k in range(n)),
        shotcut=tuple((k + 1) in shotcut for k in range(n)),
        occluded=tuple([False] * n),
        restart_schedule=tuple(restart),
        frame_size=size,
    )


def oracle_result(record):
    boxes = tuple(record.gt)
    return ResultTrack(record.id, boxes, tuple([None] * len(record)))


# --- frame filtering -----------------------------------------------------------


def test_filter_frames_fixture():
    record = make_record(n=10, absent={4, 5}, shotcut={7})
    assert filter_frames(record) == [2, 3, 6, 8, 9, 10]


def test_filter_frames_no_flags():
    assert filter_frames(make_record(n=5)) == [2, 3, 4, 5]


def test_filter_frames_degenerate():
    record = make_record(n=3, absent={2, 3})
    assert filter_frames(record) == []
    with pytest.raises(MetricsError, match="no eligible"):
        evaluate_ope(record, oracle_result(record))


# --- curves -----------------------------------------------------------------------


def test_precision_curve_examples():
    curve = precision_curve([0.0, 5.0, 25.0])
    assert curve.values[20] == pytest.approx(2 / 3)
    assert curve.rank_score == pytest.approx(2 / 3)
    assert len(curve.thresholds) == 51 and curve.thresholds[-1] == 50.0
    perfect = precision_curve([0.0, 0.0])
    assert np.all(perfect.values == 1.0) and perfect.auc == 1.0
    hopeless = precision_curve([1e6, 1e6])
    assert np.all(hopeless.values == 0.0) and hopeless.auc == 0.0
    with pytest.raises(MetricsError):
        precision_curve([])


def test_precision_curve_monotone_nondecreasing():
    rng = np.random.default_rng(1)
    curve = precision_curve(rng.uniform(0, 80, size=200))
    assert np.all(np.diff(curve.values) >= 0)
    assert np.all((curve.values >= 0) & (curve.values <= 1))


def test_npre_curve_examples():
    perfect = npre_curve([0.0, 0.0, 0.0])
    assert perfect.auc == 1.0 and perfect.rank_score == 1.0
    worst = npre_curve([1.0, 1.0])
    assert worst.values[-1] == 1.0 and np.all(worst.values[:-1] == 0.0)
    assert worst.auc == pytest.approx(0.005)  # only the boundary cell
    halves = npre_curve([0.0, 0.5])
    idx_quarter = 25
    assert halves.values[idx_quarter] == pytest.approx(0.5)
    with pytest.raises(MetricsError):
        npre_curve([1.5])
    with pytest.raises(MetricsError):
        npre_curve([])


def test_success_curve_examples():
    perfect = success_curve([1.0, 1.0], (0.0, 1.0))
    assert np.all(perfect.values == 1.0) and perfect.auc == 1.0
    zero = success_curve([0.0, 0.0], (0.0, 1.0))
    assert zero.values[0] == 1.0 and np.all(zero.values[1:] == 0.0)
    halves = success_curve([0.25, 0.75], (0.0, 1.0))
    assert halves.values[50] == pytest.approx(0.5)
    assert np.all(np.diff(halves.values) <= 0)  # non-increasing
    signed = success_curve([1.0, 1.0], (-1.0, 1.0), "SR_GIOU")
    assert signed.auc == 1.0
    with pytest.raises(MetricsError):
        success_curve([2.0], (0.0, 1.0))


# --- OPE evaluation ------------------------------------------------------------------


def test_evaluate_ope_oracle_maxes_every_metric():
    record = make_record(n=10, absent={4, 5}, shotcut={7})
    evaluation = evaluate_ope(record, oracle_result(record))
    assert evaluation.eligible_frames == (2, 3, 6, 8, 9, 10)
    assert evaluation.curves["PRE"].values[20] == 1.0
    assert evaluation.curves["NPRE"].auc == 1.0
    assert evaluation.curves["SR_IOU"].auc == 1.0
    assert evaluation.curves["SR_GIOU"].auc == 1.0
    assert evaluation.curves["SR_DIOU"].auc == 1.0
    assert np.all(evaluation.scores.iou == 1.0)
    assert np.all(evaluation.scores.distance == 0.0)


def test_evaluate_ope_shifted_result():
    record = make_record(n=6, size=FrameSize(2000, 2000))
    shifted = ResultTrack(
        record.id,
        tuple(
            None if box is None else B(box.x + 100.0, box.y, box.w, box.h)
            for box in record.gt
        ),
        tuple([None] * 6),
    )
    evaluation = evaluate_ope(record, shifted)
    assert np.all(evaluation.scores.iou == 0.0)  # 80-wide targets, 100 px shift
    assert evaluation.curves["PRE"].values[20] == 0.0
    assert np.all(evaluation.scores.distance == pytest.approx(100.0))


def test_evaluate_ope_missing_boxes_score_as_total_miss():
    record = make_record(n=5)
    empty = ResultTrack(record.id, tuple([None] * 5), tuple([None] * 5))
    evaluation = evaluate_ope(record, empty)
    assert np.all(np.isinf(evaluation.scores.distance))
    assert np.all(evaluation.scores.npre == 1.0)
    assert np.all(evaluation.scores.iou == 0.0)
    assert np.all(evaluation.scores.giou == -1.0)
    assert evaluation.curves["PRE"].values[-1] == 0.0
    assert evaluation.curves["SR_IOU"].auc == pytest.approx(0.005)


def test_evaluate_ope_length_mismatch():
    record = make_record(n=5)
    with pytest.raises(MetricsError, match="frames"):
        evaluate_ope(record, ResultTrack(record.id, (record.gt[0],), (None,)))


def test_per_frame_giou_diou_never_exceed_iou():
    record = make_record(n=8)
    rng = np.random.default_rng(17)
    boxes = tuple(
        B(box.x + rng.uniform(-40, 40), box.y + rng.uniform(-40, 40), box.w, box.h)
        for box in record.gt
    )
    evaluation = evaluate_ope(record, ResultTrack(record.id, boxes, tuple([None] * 8)))
    assert np.all(evaluation.scores.giou <= evaluation.scores.iou + 1e-12)
    assert np.all(evaluation.scores.diou <= evaluation.scores.iou + 1e-12)


# --- attribute breakdown ----------------------------------------------------------


def fm_vector(fm):
    return evaluate_flags(AttributeVector(d=0.5 if fm else 0.0), ThresholdConfig())


def test_attribute_breakdown_insufficient_and_full():
    record = make_record(n=12)
    evaluation = evaluate_ope(record, oracle_result(record))
    nowhere = [fm_vector(False) for _ in range(12)]
    everywhere = [fm_vector(True) for _ in range(12)]
    sparse = attribute_breakdown(evaluation, nowhere, min_count=10, flags=["FM"])
    assert sparse["FM"].frame_count == 0 and sparse["FM"].curves is None
    full = attribute_breakdown(evaluation, everywhere, min_count=10, flags=["FM"])
    assert full["FM"].frame_count == len(evaluation.eligible_frames)
    assert full["FM"].curves["SR_IOU"].auc == evaluation.curves["SR_IOU"].auc


def test_attribute_breakdown_isolates_hard_frames():
    record = make_record(n=22)
    eligible = filter_frames(record)
    hard = set(eligible[:10])  # FM true exactly where the tracker fails
    boxes = []
    for k, box in enumerate(record.gt, start=1):
        if k in hard:
            boxes.append(B(box.x + 500.0, box.y, box.w, box.h))  # IoU 0
        else:
            boxes.append(box)
    evaluation = evaluate_ope(record, ResultTrack(record.id, tuple(boxes), tuple([None] * 22)))
    attrs = [fm_vector(k in hard) for k in range(1, 23)]
    breakdown = attribute_breakdown(evaluation, attrs, min_count=10, flags=["FM"])
    fm_auc = breakdown["FM"].curves["SR_IOU"].auc
    overall = evaluation.curves["SR_IOU"].auc
    assert fm_auc == pytest.approx(0.005)
    assert fm_auc < overall < 1.0


# --- aggregation -------------------------------------------------------------------


def test_aggregate_single_sequence_is_identity():
    record = make_record(n=9)
    evaluation = evaluate_ope(record, oracle_result(record))
    agg = aggregate([evaluation])
    for name, curve in agg.curves.items():
        assert np.allclose(curve.values, evaluation.curves[name].values)


def test_aggregate_pools_frames():
    n = 11
    good = make_record(n=n)
    eval_good = evaluate_ope(good, oracle_result(good))
    bad_boxes = tuple(
        None if box is None else B(box.x + 5000.0, box.y, box.w, box.h) for box in good.gt
    )
    eval_bad = evaluate_ope(good, ResultTrack(good.id, bad_boxes, tuple([None] * n)))
    agg = aggregate([eval_good, eval_bad])
    # equal frame counts: pooled success sits midway between 1 and the floor
    assert agg.curves["SR_IOU"].auc == pytest.approx(
        (eval_good.curves["SR_IOU"].auc + eval_bad.curves["SR_IOU"].auc) / 2
    )
    assert agg.total_frames == 2 * len(eval_good.eligible_frames)
    permuted = aggregate([eval_bad, eval_good])
    assert np.allclose(permuted.curves["SR_IOU"].values, agg.curves["SR_IOU"].values)


def test_aggregate_copies_equal_single():
    record = make_record(n=7)
    evaluation = evaluate_ope(record, oracle_result(record))
    triple = aggregate([evaluation] * 3)
    assert np.allclose(triple.curves["PRE"].values, evaluation.curves["PRE"].values)
    with pytest.raises(MetricsError):
        aggregate([])


# --- robustness -----------------------------------------------------------------------


def test_robustness_sigmoid_example():
    report = robustness([(1.0, 10, 0)])
    assert report.r == pytest.approx(0.731059, abs=1e-6)
    assert report.r == pytest.approx(logistic(1.0))


def test_robustness_exhausted_schedule_contributes_zero():
    report = robustness([(0.5, 4, 4)])
    assert report.r == 0.0


def test_robustness_is_mean_of_contributions():
    report = robustness([(1.0, 10, 0), (0.5, 4, 4)])
    assert report.r == pytest.approx((logistic(1.0) + 0.0) / 2)
    assert report.n == 2


def test_robustness_monotone_in_restarts():
    previous = None
    for used in range(0, 11):
        r = robustness([(0.7, 10, used)]).r
        if previous is not None:
            assert r <= previous
        previous = r


def test_robustness_validation_and_clamping():
    with pytest.raises(MetricsError):
        robustness([(1.0, 0, 0)])
    with pytest.raises(MetricsError):
        robustness([(1.0, 5, 6)])
    with pytest.raises(MetricsError):
        robustness([(1.2, 5, 0)])
    with pytest.raises(MetricsError):
        robustness([])
    with pytest.warns(RuntimeWarning, match="clamping"):
        report = robustness([(1e-9, 5, 0)])
    assert report.videos[0].rho == 1e-3


def test_robustness_permutation_invariant():
    sessions = [(0.9, 10, 2), (0.4, 6, 1), (1.0, 3, 3)]
    assert robustness(sessions).r == pytest.approx(robustness(sessions[::-1]).r)


def test_robustness_bounds():
    rng = np.random.default_rng(23)
    for _ in range(100):
        schedule = int(rng.integers(1, 20))
        used = int(rng.integers(0, schedule + 1))
        rho = float(rng.uniform(0.001, 1.0))
        r = robustness([(rho, schedule, used)]).r
        assert 0.0 <= r < 1.0


# --- sequence correlation ----------------------------------------------------------


def test_sequence_correlation_identical_frames():
    record = make_record(n=4)
    rng = np.random.default_rng(2)
    frame = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    rho = sequence_correlation(record, frames=[frame] * 4)
    assert rho == pytest.approx(1.0)


def test_sequence_correlation_skips_cut_and_absent_pairs():
    record = make_record(n=4, absent={2}, shotcut={4})
    rng = np.random.default_rng(3)
    frames = [rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8) for _ in range(4)]
    # pairs (1,2) and (2,3) touch an absent frame; (3,4) crosses the cut
    with pytest.warns(RuntimeWarning, match="no usable"):
        rho = sequence_correlation(record, frames=frames)
    assert rho == 1.0
