"""Axis-aligned box algebra and overlap/distance scores.

Boxes are stored as (left, top, width, height) in continuous pixel
coordinates; file formats that use corner pairs are converted at parse
time. Every function here is a pure function of its arguments and safe
to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class FrameSize:
    """Frame dimensions in whole pixels."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"frame size must be at least 1x1, got {self.width}x{self.height}"
            )


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle: left edge, top edge, width, height (pixels).

    Coordinates may be fractional and negative (predictions can leave the
    frame); width and height must be strictly positive and all fields
    finite.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"box field {name!r} must be finite, got {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def center(b: BoundingBox) -> Point:
    """Center point of a box."""
    return Point(b.x + b.w / 2.0, b.y + b.h / 2.0)


def intersect(a: BoundingBox, b: BoundingBox) -> BoundingBox | None:
    """Overlap rectangle of two boxes, or None when interiors do not overlap.

    Touching edges have zero area and count as empty, so any returned box
    satisfies the positive-extent invariant.
    """
    x1 = max(a.x, b.x)
    y1 = max(a.y, b.y)
    x2 = min(a.right, b.right)
    y2 = min(a.bottom, b.bottom)
    if x2 - x1 <= 0 or y2 - y1 <= 0:
        return None
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def enclose(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Smallest axis-aligned rectangle containing both boxes."""
    x1 = min(a.x, b.x)
    y1 = min(a.y, b.y)
    x2 = max(a.right, b.right)
    y2 = max(a.bottom, b.bottom)
    return BoundingBox(x1, y1, x2 - x1, y2 - y1)


def _overlap_terms(a: BoundingBox, b: BoundingBox) -> tuple[float, float]:
    # all areas derive from the same corner differences, so that
    # iou(a, a) == 1.0 holds exactly despite (y + h) - y wobble
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    inter = iw * ih if (iw > 0 and ih > 0) else 0.0
    area_a = (a.right - a.x) * (a.bottom - a.y)
    area_b = (b.right - b.x) * (b.bottom - b.y)
    return inter, area_a + area_b - inter


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union, in [0, 1]."""
    inter, union = _overlap_terms(a, b)
    return inter / union


def giou(a: BoundingBox, b: BoundingBox) -> float:
    """Generalized IoU: IoU minus the enclosing-box area not covered by the
    union, normalized by the enclosing area. Range (-1, 1]; stays
    informative for disjoint boxes."""
    inter, union = _overlap_terms(a, b)
    cw = max(a.right, b.right) - min(a.x, b.x)
    ch = max(a.bottom, b.bottom) - min(a.y, b.y)
    c_area = cw * ch
    return inter / union - (c_area - union) / c_area


def diou(a: BoundingBox, b: BoundingBox) -> float:
    """Distance IoU: IoU minus the squared center distance normalized by the
    squared diagonal of the enclosing box. Range (-1, 1]."""
    cw = max(a.right, b.right) - min(a.x, b.x)
    ch = max(a.bottom, b.bottom) - min(a.y, b.y)
    ca, cb = center(a), center(b)
    d2 = (ca.x - cb.x) ** 2 + (ca.y - cb.y) ** 2
    return iou(a, b) - d2 / (cw**2 + ch**2)


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, in pixels."""
    ca, cb = center(a), center(b)
    return math.hypot(ca.x - cb.x, ca.y - cb.y)


def contains(outer: BoundingBox, inner: BoundingBox) -> bool:
    """True iff inner lies entirely within outer (boundary contact allowed)."""
    return (
        outer.x <= inner.x
        and outer.y <= inner.y
        and inner.right <= outer.right
        and inner.bottom <= outer.bottom
    )


def contains_point(b: BoundingBox, p: Point) -> bool:
    """True iff p lies inside or on the boundary of b."""
    return b.x <= p.x <= b.right and b.y <= p.y <= b.bottom


def point_to_box_distance(p: Point, b: BoundingBox) -> float:
    """Shortest distance from a point to a box as a point set.

    Zero when the point is inside or on the box; otherwise the distance to
    the nearest boundary point (clamp-to-box).
    """
    dx = max(b.x - p.x, 0.0, p.x - b.right)
    dy = max(b.y - p.y, 0.0, p.y - b.bottom)
    return math.hypot(dx, dy)


def average_box(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Element-wise mean of (x, y, w, h); equivalently the box with the mean
    center and mean size."""
    return BoundingBox(
        (a.x + b.x) / 2.0,
        (a.y + b.y) / 2.0,
        (a.w + b.w) / 2.0,
        (a.h + b.h) / 2.0,
    )


def _raw_precision(q: Point, gt: BoundingBox) -> float:
    o = center(gt)
    return math.hypot(q.x - o.x, q.y - o.y) + point_to_box_distance(q, gt)


def npre_value(pred: BoundingBox, gt: BoundingBox, frame: FrameSize) -> float:
    """Normalized precision score of a prediction against the ground truth.

    The raw score at a point q is the distance from q to the ground-truth
    center plus the shortest distance from q to the ground-truth box (zero
    when q falls inside it). The score is normalized by the maximum raw
    value over the whole frame rectangle [0, W] x [0, H]. Both raw-score
    summands are convex in q, so that maximum is attained at one of the
    four frame corners and is computed in closed form.

    Returns a value in [0, 1]: 0 means the predicted center coincides with
    the ground-truth center, 1 means it is at (or beyond) the worst point
    of the frame. Centers outside the frame clamp at 1.
    """
    corners = (
        Point(0.0, 0.0),
        Point(float(frame.width), 0.0),
        Point(0.0, float(frame.height)),
        Point(float(frame.width), float(frame.height)),
    )
    worst = max(_raw_precision(c, gt) for c in corners)
    if worst <= 0.0:
        raise ValueError("degenerate normalizer: ground truth covers a zero-size frame")
    raw = _raw_precision(center(pred), gt)
    return min(raw / worst, 1.0)
