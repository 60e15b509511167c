import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giteval.attributes import (
    AttributeVector,
    CSV_HEADER,
    FLAG_NAMES,
    ThresholdConfig,
    UndefinedCorrelationError,
    attribute_csv_lines,
    box_ratio,
    box_scale,
    evaluate_flags,
    frame_attributes,
    illumination_estimate,
    laplacian_variance,
    motion_index,
    parse_attribute_csv,
    ppmcc,
    sequence_attributes,
    to_grayscale,
)
from giteval.geometry import BoundingBox

CFG = ThresholdConfig()


def solid_frame(rgb, h=8, w=8):
    return np.tile(np.array(rgb, dtype=np.uint8), (h, w, 1))


def test_default_thresholds_are_the_published_constants():
    assert CFG.illum_special == 0.99
    assert CFG.illum_delta == 0.0001
    assert CFG.blur_low == 100
    assert CFG.blur_delta == 1.5
    assert (CFG.scale_low, CFG.scale_high) == (50, 750)
    assert CFG.scale_delta == 30
    assert (CFG.ratio_low, CFG.ratio_high) == (1 / 3, 3)
    assert CFG.ratio_delta == 0.2
    assert CFG.motion_fast == 0.2
    assert CFG.corr_strong == 0.8
    assert CFG.gamma == 2.2
    assert CFG.minkowski_power == 6


def test_threshold_config_validation():
    with pytest.raises(ValueError):
        ThresholdConfig(scale_low=800, scale_high=750)
    with pytest.raises(ValueError):
        ThresholdConfig(blur_delta=-1)
    with pytest.raises(ValueError):
        ThresholdConfig.from_dict({"bogus": 1})
    assert ThresholdConfig.from_dict({"motion_fast": 0.3}).motion_fast == 0.3


# --- grayscale --------------------------------------------------------------


def test_grayscale_examples():
    black = solid_frame((0, 0, 0))
    assert np.all(to_grayscale(black) == 0.0)
    white = solid_frame((255, 255, 255))
    assert to_grayscale(white) == pytest.approx(np.full((8, 8), 255.0))
    mixed = solid_frame((100, 200, 50))
    expected = 0.299 * 100 + 0.587 * 200 + 0.114 * 50
    assert expected == pytest.approx(153.0)
    assert to_grayscale(mixed) == pytest.approx(np.full((8, 8), expected))


# --- illumination ------------------------------------------------------------


def test_illumination_neutral_gray():
    gains, i = illumination_estimate(solid_frame((128, 128, 128)))
    assert i == pytest.approx(1.0, abs=1e-12)
    assert gains == pytest.approx(np.ones(3))


def test_illumination_red_cast():
    gains, i = illumination_estimate(solid_frame((200, 100, 100)))
    # constant image: illuminant per channel is just the linearized value
    e_ratio = (200 / 100) ** 2.2
    assert e_ratio == pytest.approx(4.5948, abs=1e-4)
    assert gains[1] / gains[0] == pytest.approx(e_ratio, rel=1e-9)
    normalized = gains / gains[1]
    assert normalized[0] == pytest.approx(0.21764, abs=1e-5)
    assert i == pytest.approx(0.8948, abs=1e-3)
    assert i < CFG.illum_special  # IE fires


def test_illumination_black_frame_clamps_with_warning():
    with pytest.warns(RuntimeWarning):
        gains, i = illumination_estimate(solid_frame((0, 0, 0)))
    assert i == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=10.0))
def test_cosine_invariant_to_gain_rescaling(scale):
    gains, i = illumination_estimate(solid_frame((180, 90, 60)))
    rescaled = gains * scale
    cos = float(rescaled.sum() / (np.sqrt(3) * np.linalg.norm(rescaled)))
    assert cos == pytest.approx(i, abs=1e-12)


# --- blur ---------------------------------------------------------------------


def test_laplacian_constant_frame_is_zero():
    assert laplacian_variance(np.full((7, 9), 42.0)) == 0.0
    assert 0.0 < CFG.blur_low  # zero variance lands in the blurry regime


def test_laplacian_single_pixel_fixture():
    g = np.zeros((5, 5))
    g[2, 2] = 255.0
    # interior responses: (0,255,0,255,-1020,255,0,255,0), population variance
    assert laplacian_variance(g) == 144500.0


def test_laplacian_checkerboard_is_sharp():
    g = np.indices((10, 10)).sum(axis=0) % 2 * 255.0
    v = laplacian_variance(g)
    assert v == pytest.approx(1020.0**2)
    assert v > CFG.blur_low


def test_laplacian_rejects_tiny_frames():
    with pytest.raises(ValueError):
        laplacian_variance(np.zeros((2, 5)))


def test_laplacian_matches_convolution_oracle():
    rng = np.random.default_rng(3)
    g = rng.uniform(0, 255, size=(12, 17))
    kernel = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
    rows, cols = g.shape
    responses = [
        float((g[r - 1 : r + 2, c - 1 : c + 2] * kernel).sum())
        for r in range(1, rows - 1)
        for c in range(1, cols - 1)
    ]
    assert laplacian_variance(g) == pytest.approx(np.var(responses), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-1000, max_value=1000))
def test_laplacian_invariant_under_constant_shift(offset):
    rng = np.random.default_rng(11)
    g = rng.uniform(0, 255, size=(9, 9))
    assert laplacian_variance(g + offset) == pytest.approx(laplacian_variance(g), rel=1e-9)


# --- correlation ---------------------------------------------------------------


def test_ppmcc_examples():
    rng = np.random.default_rng(5)
    a = rng.uniform(0, 255, size=(20, 20))
    assert ppmcc(a, a) == pytest.approx(1.0, abs=1e-9)
    assert ppmcc(a, 255.0 - a) == pytest.approx(-1.0, abs=1e-9)
    b = rng.uniform(0, 255, size=(100, 100))
    c = rng.uniform(0, 255, size=(100, 100))
    assert abs(ppmcc(b, c)) < 0.1


def test_ppmcc_constant_buffer_is_undefined():
    with pytest.raises(UndefinedCorrelationError):
        ppmcc(np.full((4, 4), 9.0), np.arange(16.0).reshape(4, 4))


def test_ppmcc_shape_mismatch():
    with pytest.raises(ValueError):
        ppmcc(np.zeros((2, 3)), np.zeros((3, 2)))


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.01, max_value=50),
    st.floats(min_value=-100, max_value=100),
)
def test_ppmcc_invariant_under_positive_affine(scale, offset):
    rng = np.random.default_rng(13)
    a = rng.uniform(0, 255, size=(15, 15))
    b = rng.uniform(0, 255, size=(15, 15))
    base = ppmcc(a, b)
    assert ppmcc(a * scale + offset, b) == pytest.approx(base, abs=1e-9)
    assert ppmcc(-a, b) == pytest.approx(-base, abs=1e-9)


# --- box indices ----------------------------------------------------------------


def test_box_scale_examples():
    assert box_scale(BoundingBox(0, 0, 100, 49)) == pytest.approx(70.0)
    s = box_scale(BoundingBox(0, 0, 50, 50))
    assert s == 50.0 and CFG.scale_low <= s <= CFG.scale_high  # SS unset
    assert box_scale(BoundingBox(0, 0, 10, 10)) == 10.0  # SS fires


def test_box_ratio_examples():
    assert box_ratio(BoundingBox(0, 0, 100, 49)) == pytest.approx(0.49)
    assert box_ratio(BoundingBox(0, 0, 10, 40)) == 4.0
    assert box_ratio(BoundingBox(1, 2, 17, 17)) == 1.0


def test_motion_index_examples():
    b = BoundingBox(0, 0, 100, 100)
    assert motion_index(b, b) == 0.0
    moved = BoundingBox(30, 40, 100, 100)
    assert motion_index(b, moved) == pytest.approx(0.5)
    small_step = BoundingBox(10, 0, 100, 100)
    assert motion_index(b, small_step) == pytest.approx(0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.01, max_value=100))
def test_motion_index_scale_invariance(k):
    a = BoundingBox(0, 0, 40, 30)
    b = BoundingBox(12, 5, 44, 28)
    scaled_a = BoundingBox(a.x * k, a.y * k, a.w * k, a.h * k)
    scaled_b = BoundingBox(b.x * k, b.y * k, b.w * k, b.h * k)
    assert motion_index(scaled_a, scaled_b) == pytest.approx(motion_index(a, b), rel=1e-9)


# --- flag thresholds -------------------------------------------------------------


def vector_with(**indices):
    return evaluate_flags(AttributeVector(**indices), CFG)


@pytest.mark.parametrize(
    "field,threshold,flag,fires_above",
    [
        ("di", 0.0001, "IV", True),
        ("dv", 1.5, "BV", True),
        ("ds", 30.0, "SV", True),
        ("dr", 0.2, "RV", True),
        ("d", 0.2, "FM", True),
        ("p", 0.8, "CC", True),
    ],
)
def test_strict_greater_flags_flip_exactly_at_boundary(field, threshold, flag, fires_above):
    at = vector_with(**{field: threshold})
    above = vector_with(**{field: threshold * (1 + 1e-9)})
    below = vector_with(**{field: threshold * (1 - 1e-9)})
    assert not at.flag(flag), f"{flag} must not fire exactly at its threshold"
    assert above.flag(flag) == fires_above
    assert not below.flag(flag)
    assert not vector_with().flag(flag)  # missing index never fires


def test_ie_flag_fires_strictly_below_threshold():
    assert not vector_with(i=0.99).IE
    assert vector_with(i=0.99 - 1e-9).IE
    assert not vector_with(i=1.0).IE


def test_band_flags_fire_outside_closed_interval():
    assert not vector_with(s=50.0).SS and not vector_with(s=750.0).SS
    assert vector_with(s=50.0 - 1e-6).SS and vector_with(s=750.0 + 1e-6).SS
    assert not vector_with(r=1 / 3).SR and not vector_with(r=3.0).SR
    assert vector_with(r=1 / 3 - 1e-9).SR and vector_with(r=3.0 + 1e-9).SR


# --- frame orchestration ----------------------------------------------------------


class FakeRecord:
    def __init__(self, gt, absent=None, shotcut=None, occluded=None):
        n = len(gt)
        self.gt = gt
        self.absent = absent or [False] * n
        self.shotcut = shotcut or [False] * n
        self.occluded = occluded or [False] * n

    def __len__(self):
        return len(self.gt)


def textured_frame(seed=0, h=16, w=16):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8).astype(np.uint8)


def test_first_frame_has_no_pairwise_flags():
    vec = frame_attributes(None, textured_frame(), BoundingBox(0, 0, 10, 10), (False, False, False))
    for flag in ("IV", "BV", "SV", "RV", "FM", "CC"):
        assert not vec.flag(flag)
    for index in ("di", "dv", "ds", "dr", "d", "p"):
        assert getattr(vec, index) is None
    assert vec.i is not None and vec.v is not None and vec.s is not None


def test_absent_frame_keeps_frame_indices_only():
    vec = frame_attributes(None, textured_frame(), None, (True, False, False))
    assert vec.IA
    assert vec.s is None and vec.r is None and vec.d is None
    assert vec.i is not None and vec.v is not None


def test_box_presence_must_match_absence_flag():
    with pytest.raises(ValueError):
        frame_attributes(None, textured_frame(), BoundingBox(0, 0, 5, 5), (True, False, False))
    with pytest.raises(ValueError):
        frame_attributes(None, textured_frame(), None, (False, False, False))


def test_identical_consecutive_frames():
    frame = textured_frame(seed=2)
    box = BoundingBox(1, 1, 8, 8)
    first = frame_attributes(None, frame, box, (False, False, False))
    second = frame_attributes((frame, box, first), frame, box, (False, False, False))
    for flag in ("IV", "BV", "SV", "RV", "FM"):
        assert not second.flag(flag)
    assert second.CC and second.p == pytest.approx(1.0, abs=1e-12)
    assert second.di == 0.0 and second.dv == 0.0 and second.d == 0.0


def test_shotcut_suppresses_pairwise_indices():
    frame = textured_frame(seed=3)
    box = BoundingBox(1, 1, 8, 8)
    first = frame_attributes(None, frame, box, (False, False, False))
    cut = frame_attributes((frame, box, first), frame, box, (False, True, False))
    assert cut.SC
    assert cut.p is None and cut.d is None and cut.di is None


def test_pairwise_needs_both_frames_present():
    frame = textured_frame(seed=4)
    absent_vec = frame_attributes(None, frame, None, (True, False, False))
    after = frame_attributes((frame, None, absent_vec), frame, BoundingBox(0, 0, 4, 4), (False, False, False))
    assert after.p is None and after.d is None


def test_sequence_attributes_static_sequence():
    frame = textured_frame(seed=5)
    box = BoundingBox(2, 2, 9, 9)
    record = FakeRecord(gt=[box, box, box])
    vectors = sequence_attributes([frame, frame, frame], record)
    assert len(vectors) == 3
    assert not vectors[0].CC
    assert vectors[1].CC and vectors[2].CC
    for vec in vectors[1:]:
        assert vec.d == 0.0 and not vec.FM


def test_sequence_attributes_empty_sequence():
    record = FakeRecord(gt=[])
    assert sequence_attributes([], record) == []


def test_sequence_attributes_shotcut_breaks_pairs():
    frame = textured_frame(seed=6)
    box = BoundingBox(2, 2, 9, 9)
    record = FakeRecord(gt=[box, box, box], shotcut=[False, True, False])
    vectors = sequence_attributes([frame, frame, frame], record)
    assert vectors[1].p is None and vectors[1].di is None
    assert vectors[2].p is not None


def test_sequence_attributes_decode_failure_names_frame():
    def frames():
        yield textured_frame()
        raise OSError("corrupt file")

    record = FakeRecord(gt=[BoundingBox(0, 0, 5, 5)] * 2)
    with pytest.raises(ValueError, match="frame 2"):
        sequence_attributes(frames(), record)


def test_sequence_attributes_count_mismatch():
    frame = textured_frame()
    record = FakeRecord(gt=[BoundingBox(0, 0, 5, 5)] * 2)
    with pytest.raises(ValueError, match="exhausted"):
        sequence_attributes([frame], record)
    with pytest.raises(ValueError):
        sequence_attributes([frame] * 3, record)


def test_determinism_bit_identical():
    frame = textured_frame(seed=9)
    box = BoundingBox(3, 1, 7, 6)
    first = frame_attributes(None, frame, box, (False, False, False))
    again = frame_attributes(None, frame.copy(), box, (False, False, False))
    assert first == again


def test_flags_consistent_with_recomputation():
    rng = np.random.default_rng(21)
    for _ in range(25):
        indices = {
            "i": float(rng.uniform(0.9, 1.0)),
            "di": float(rng.uniform(0, 0.001)),
            "v": float(rng.uniform(0, 300)),
            "dv": float(rng.uniform(0, 4)),
            "s": float(rng.uniform(1, 900)),
            "ds": float(rng.uniform(0, 60)),
            "r": float(rng.uniform(0.1, 5)),
            "dr": float(rng.uniform(0, 0.5)),
            "d": float(rng.uniform(0, 0.5)),
            "p": float(rng.uniform(-1, 1)),
        }
        vec = evaluate_flags(AttributeVector(**indices), CFG)
        assert vec.IE == (indices["i"] < CFG.illum_special)
        assert vec.IV == (indices["di"] > CFG.illum_delta)
        assert vec.BV == (indices["dv"] > CFG.blur_delta)
        assert vec.SS == (not CFG.scale_low <= indices["s"] <= CFG.scale_high)
        assert vec.SV == (indices["ds"] > CFG.scale_delta)
        assert vec.SR == (not CFG.ratio_low <= indices["r"] <= CFG.ratio_high)
        assert vec.RV == (indices["dr"] > CFG.ratio_delta)
        assert vec.FM == (indices["d"] > CFG.motion_fast)
        assert vec.CC == (indices["p"] > CFG.corr_strong)


# --- CSV round trip ------------------------------------------------------------


def test_attribute_csv_round_trip():
    frame_a = textured_frame(seed=30)
    frame_b = textured_frame(seed=31)
    box = BoundingBox(2, 2, 9, 9)
    record = FakeRecord(gt=[box, None, box], absent=[False, True, False])
    vectors = sequence_attributes([frame_a, frame_b, frame_a], record)
    lines = attribute_csv_lines(vectors)
    assert lines[0] == CSV_HEADER
    assert lines[0] == (
        "frame,IA,SC,IO,IE,IV,BV,SS,SV,SR,RV,FM,CC,i,di,v,dv,s,ds,r,dr,d,p"
    )
    parsed = parse_attribute_csv("\n".join(lines) + "\n")
    assert len(parsed) == 3
    for original, restored in zip(vectors, parsed):
        for flag in FLAG_NAMES:
            assert original.flag(flag) == restored.flag(flag)
        for index in ("i", "di", "v", "dv", "s", "ds", "r", "dr", "d", "p"):
            a, b = getattr(original, index), getattr(restored, index)
            assert (a is None and b is None) or a == b
    # absent frame row has empty box-index fields
    absent_row = lines[2].split(",")
    assert absent_row[1] == "1"  # IA
    assert absent_row[17] == ""  # s


def test_parse_attribute_csv_rejects_garbage():
    with pytest.raises(ValueError):
        parse_attribute_csv("nonsense\n")
    with pytest.raises(ValueError):
        parse_attribute_csv(CSV_HEADER + "\n1,2,3\n")
