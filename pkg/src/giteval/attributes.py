"""Per-frame challenge attributes for tracking sequences.

Twelve flags are computed per frame: three manual ones ingested from the
annotations (IA instance absent, SC shot cut, IO occlusion) and nine
derived from pixels and boxes (IE/IV illumination, BV blur variation,
SS/SV scale, SR/RV ratio, FM fast motion, CC inter-frame correlation).

Color frames are (H, W, 3) uint8 RGB numpy arrays; grayscale frames are
(H, W) float64 arrays. Pairwise indices compare a frame with its
predecessor and are left undefined on the first frame of a sequence, on
shot-cut starts, and whenever either frame is absent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields, replace
from typing import Iterable, Iterator

import numpy as np

from .geometry import BoundingBox, center

FLAG_NAMES = ("IA", "SC", "IO", "IE", "IV", "BV", "SS", "SV", "SR", "RV", "FM", "CC")
INDEX_NAMES = ("i", "di", "v", "dv", "s", "ds", "r", "dr", "d", "p")

CSV_HEADER = "frame," + ",".join(FLAG_NAMES) + "," + ",".join(INDEX_NAMES)

_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])
_ILLUMINANT_FLOOR = 1e-9


class UndefinedCorrelationError(ValueError):
    """Raised when a Pearson correlation is requested on a constant buffer."""


@dataclass(frozen=True)
class ThresholdConfig:
    """Decision thresholds for the twelve attribute flags.

    Defaults are the published constants; all are overridable via the
    config file.
    """

    illum_special: float = 0.99   # IE when i < illum_special
    illum_delta: float = 0.0001   # IV when |di| > illum_delta
    blur_low: float = 100.0       # sharpness below this counts as blurry
    blur_delta: float = 1.5       # BV when |dv| > blur_delta
    scale_low: float = 50.0       # SS when s outside [scale_low, scale_high]
    scale_high: float = 750.0
    scale_delta: float = 30.0     # SV when |ds| > scale_delta
    ratio_low: float = 1.0 / 3.0  # SR when r outside [ratio_low, ratio_high]
    ratio_high: float = 3.0
    ratio_delta: float = 0.2      # RV when |dr| > ratio_delta
    motion_fast: float = 0.2      # FM when d > motion_fast
    corr_strong: float = 0.8      # CC when p > corr_strong
    gamma: float = 2.2            # linearization exponent for illuminant estimation
    minkowski_power: float = 6.0  # Minkowski norm power for illuminant estimation

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"threshold {f.name} must be positive")
        if self.scale_low >= self.scale_high:
            raise ValueError("scale_low must be below scale_high")
        if self.ratio_low >= self.ratio_high:
            raise ValueError("ratio_low must be below ratio_high")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown threshold keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class AttributeVector:
    """Flags and underlying continuous indices for one frame.

    Indices that cannot be computed for the frame (no box, no valid
    predecessor, undefined correlation) are None, and the flags that
    depend on them are False.
    """

    IA: bool = False
    SC: bool = False
    IO: bool = False
    IE: bool = False
    IV: bool = False
    BV: bool = False
    SS: bool = False
    SV: bool = False
    SR: bool = False
    RV: bool = False
    FM: bool = False
    CC: bool = False
    i: float | None = None
    di: float | None = None
    v: float | None = None
    dv: float | None = None
    s: float | None = None
    ds: float | None = None
    r: float | None = None
    dr: float | None = None
    d: float | None = None
    p: float | None = None
    correction: tuple[float, float, float] | None = None

    def flag(self, name: str) -> bool:
        if name not in FLAG_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """Luminance conversion, 0.299 R + 0.587 G + 0.114 B, as float64."""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) color frame, got shape {frame.shape}")
    return frame.astype(np.float64) @ _GRAY_WEIGHTS


def illumination_estimate(
    frame: np.ndarray, config: ThresholdConfig = ThresholdConfig()
) -> tuple[np.ndarray, float]:
    """Shade of Gray illuminant estimate and its similarity to neutral light.

    Pixels are linearized channel-wise as (p/255)^gamma, the illuminant is
    the Minkowski mean of each channel, and the correction gains scale
    every channel estimate to their common mean. Returns (gains, i) where
    i is the cosine similarity between the gains and the neutral
    illuminant (1, 1, 1); i = 1 means perfectly neutral lighting.
    """
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.size == 0:
        raise ValueError(f"expected non-empty (H, W, 3) frame, got shape {frame.shape}")
    linear = (frame.reshape(-1, 3).astype(np.float64) / 255.0) ** config.gamma
    power = config.minkowski_power
    illuminant = np.mean(linear**power, axis=0) ** (1.0 / power)
    if np.any(illuminant < _ILLUMINANT_FLOOR):
        warnings.warn(
            "illuminant channel below floor, clamping; frame is nearly black",
            RuntimeWarning,
            stacklevel=2,
        )
        illuminant = np.maximum(illuminant, _ILLUMINANT_FLOOR)
    gains = illuminant.mean() / illuminant
    similarity = float(gains.sum() / (np.sqrt(3.0) * np.linalg.norm(gains)))
    return gains, similarity


def laplacian_variance(gray: np.ndarray) -> float:
    """Sharpness index: variance of the 4-neighbor Laplacian response.

    The 3x3 kernel ((0,1,0),(1,-4,1),(0,1,0)) is applied over the valid
    interior only (no padding), so border effects do not bias the
    variance. Frames smaller than the kernel are rejected.
    """
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"expected (H, W) grayscale frame, got shape {g.shape}")
    if g.shape[0] < 3 or g.shape[1] < 3:
        raise ValueError(f"frame {g.shape} smaller than the 3x3 Laplacian kernel")
    response = (
        g[:-2, 1:-1] + g[2:, 1:-1] + g[1:-1, :-2] + g[1:-1, 2:] - 4.0 * g[1:-1, 1:-1]
    )
    return float(response.var())


def ppmcc(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson product-moment correlation over flattened pixel values.

    Raises UndefinedCorrelationError when either buffer is constant (zero
    variance); callers record the CC flag as unset in that case.
    """
    af = np.asarray(a, dtype=np.float64).ravel()
    bf = np.asarray(b, dtype=np.float64).ravel()
    if af.shape != bf.shape:
        raise ValueError(f"buffer shapes differ: {a.shape} vs {b.shape}")
    ac = af - af.mean()
    bc = bf - bf.mean()
    va = float(np.mean(ac * ac))
    vb = float(np.mean(bc * bc))
    if va == 0.0 or vb == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant buffer")
    return float(np.mean(ac * bc) / np.sqrt(va * vb))


def box_scale(b: BoundingBox) -> float:
    """Instance size sqrt(w * h), in pixels."""
    return float(np.sqrt(b.w * b.h))


def box_ratio(b: BoundingBox) -> float:
    """Instance aspect ratio h / w."""
    return b.h / b.w


def motion_index(prev: BoundingBox, cur: BoundingBox) -> float:
    """Center displacement divided by the geometric mean of the two scales.

    Dimensionless by construction: invariant under uniform rescaling of
    both boxes and the displacement.
    """
    cp, cc = center(prev), center(cur)
    displacement = float(np.hypot(cc.x - cp.x, cc.y - cp.y))
    return displacement / np.sqrt(box_scale(prev) * box_scale(cur))


def evaluate_flags(vector: AttributeVector, config: ThresholdConfig) -> AttributeVector:
    """Recompute the nine derived flags from the vector's indices.

    IA/SC/IO pass through unchanged (they are manual). This is the single
    place the threshold predicates live; property tests recompute flags
    through it to check flag/threshold consistency.
    """
    i, di, v, dv = vector.i, vector.di, vector.v, vector.dv
    s, ds, r, dr = vector.s, vector.ds, vector.r, vector.dr
    d, p = vector.d, vector.p
    return replace(
        vector,
        IE=i is not None and i < config.illum_special,
        IV=di is not None and di > config.illum_delta,
        BV=dv is not None and dv > config.blur_delta,
        SS=s is not None and not (config.scale_low <= s <= config.scale_high),
        SV=ds is not None and ds > config.scale_delta,
        SR=r is not None and not (config.ratio_low <= r <= config.ratio_high),
        RV=dr is not None and dr > config.ratio_delta,
        FM=d is not None and d > config.motion_fast,
        CC=p is not None and p > config.corr_strong,
    )


def frame_attributes(
    prev: tuple[np.ndarray, BoundingBox | None, AttributeVector] | None,
    cur_frame: np.ndarray,
    cur_box: BoundingBox | None,
    flags: tuple[bool, bool, bool],
    config: ThresholdConfig = ThresholdConfig(),
) -> AttributeVector:
    """Attribute vector for one frame given its (optional) predecessor.

    ``prev`` is (frame, box, vector) of the preceding frame, or None at
    the start of a sequence. ``flags`` is the manual (absent, shotcut,
    occluded) triple; ``cur_box`` must be present exactly when the frame
    is not absent.

    Frame-only indices (i, v) are computed for every frame, absent ones
    included. Box indices (s, r) need a present box. Pairwise indices
    (di, dv, ds, dr, d, p) need a predecessor, require that neither frame
    is absent, and are suppressed on shot-cut starts so deltas never
    compare across an editing boundary.
    """
    absent, shotcut, occluded = flags
    if absent and cur_box is not None:
        raise ValueError("absent frame must not carry a box")
    if not absent and cur_box is None:
        raise ValueError("present frame must carry a box")

    gains, i = illumination_estimate(cur_frame, config)
    gray = to_grayscale(cur_frame)
    v = laplacian_variance(gray)
    s = box_scale(cur_box) if cur_box is not None else None
    r = box_ratio(cur_box) if cur_box is not None else None

    di = dv = ds = dr = d = p = None
    if prev is not None and not absent and not shotcut:
        prev_frame, prev_box, prev_vec = prev
        if not prev_vec.IA:
            di = abs(i - prev_vec.i)
            dv = abs(v - prev_vec.v)
            try:
                p = ppmcc(to_grayscale(prev_frame), gray)
            except UndefinedCorrelationError:
                p = None
            ds = abs(s - prev_vec.s)
            dr = abs(r - prev_vec.r)
            d = motion_index(prev_box, cur_box)

    vector = AttributeVector(
        IA=absent,
        SC=shotcut,
        IO=occluded,
        i=i,
        di=di,
        v=v,
        dv=dv,
        s=s,
        ds=ds,
        r=r,
        dr=dr,
        d=d,
        p=p,
        correction=tuple(float(g) for g in gains),
    )
    return evaluate_flags(vector, config)


def sequence_attributes(
    frames: Iterable[np.ndarray],
    record,
    config: ThresholdConfig = ThresholdConfig(),
) -> list[AttributeVector]:
    """One AttributeVector per frame of a sequence, streaming.

    ``frames`` yields decoded frames in order (see
    ``dataset.iter_frames``); ``record`` supplies per-frame boxes and
    manual flags. At most two decoded frames are held at once. A decode
    failure surfaces as an error naming the 1-based frame index.
    """
    n = len(record)
    vectors: list[AttributeVector] = []
    prev: tuple[np.ndarray, BoundingBox | None, AttributeVector] | None = None
    count = 0
    frame_iter: Iterator[np.ndarray] = iter(frames)
    for idx0 in range(n):
        try:
            frame = next(frame_iter)
        except StopIteration:
            raise ValueError(f"frame source exhausted at frame {idx0 + 1} of {n}") from None
        except Exception as exc:
            raise ValueError(f"failed to decode frame {idx0 + 1}: {exc}") from exc
        count += 1
        box = record.gt[idx0]
        manual = (record.absent[idx0], record.shotcut[idx0], record.occluded[idx0])
        vector = frame_attributes(prev, frame, box, manual, config)
        vectors.append(vector)
        prev = (frame, box, vector)
    remaining = sum(1 for _ in frame_iter)
    if remaining:
        raise ValueError(f"frame source has {count + remaining} frames, annotations have {n}")
    return vectors


def _format_index(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def attribute_csv_lines(vectors: list[AttributeVector]) -> list[str]:
    """Render attribute vectors as CSV lines (header included, frames 1-based).

    Flags are 0/1; missing indices are empty fields; floats use full
    round-trip precision.
    """
    lines = [CSV_HEADER]
    for idx, vec in enumerate(vectors, start=1):
        cells = [str(idx)]
        cells += ["1" if vec.flag(name) else "0" for name in FLAG_NAMES]
        cells += [_format_index(getattr(vec, name)) for name in INDEX_NAMES]
        lines.append(",".join(cells))
    return lines


def parse_attribute_csv(text: str) -> list[AttributeVector]:
    """Parse the CSV produced by attribute_csv_lines back into vectors.

    The correction gains are not part of the CSV and come back as None.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unrecognized attribute CSV header")
    vectors = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 1 + len(FLAG_NAMES) + len(INDEX_NAMES):
            raise ValueError(f"line {lineno}: expected {1 + len(FLAG_NAMES) + len(INDEX_NAMES)} fields")
        try:
            expected = int(cells[0])
            flag_values = [cell == "1" for cell in cells[1 : 1 + len(FLAG_NAMES)]]
            index_values = [
                float(cell) if cell != "" else None
                for cell in cells[1 + len(FLAG_NAMES) :]
            ]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if expected != lineno - 1:
            raise ValueError(f"line {lineno}: frame index {expected} out of order")
        vectors.append(
            AttributeVector(
                **dict(zip(FLAG_NAMES, flag_values)),
                **dict(zip(INDEX_NAMES, index_values)),
            )
        )
    return vectors
