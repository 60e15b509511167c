"""Baseline tracking strategies.

Each strategy implements the two-callback tracker interface: initialize
with a ground-truth box, then map (frame index, frame path) to a box.
Real trackers plug into the client loop by implementing the same pair.
"""

from __future__ import annotations

import random

CORNER_BOX = [0.0, 0.0, 1.0, 1.0]


class StaticTracker:
    """Always returns the box it was last initialized with."""

    def __init__(self):
        self.box = None

    def initialize(self, box, path, sequence=None):
        self.box = list(box)

    def track(self, index, path):
        return list(self.box)


class AdversarialTracker:
    """Always returns a fixed tiny box in the frame corner."""

    def initialize(self, box, path, sequence=None):
        pass

    def track(self, index, path):
        return list(CORNER_BOX)


class OracleTracker:
    """Echoes a ground-truth file, optionally with Gaussian center jitter.

    The file uses the track grammar: one x,y,w,h line per frame, blank or
    NaN lines marking absent frames (the last known box is repeated
    there). Jitter is seeded for reproducible runs.
    """

    def __init__(self, gt_path, sigma=0.0, seed=0):
        self.boxes = _load_track(gt_path)
        self.sigma = float(sigma)
        self.rng = random.Random(seed)
        self.last = None

    def initialize(self, box, path, sequence=None):
        self.last = list(box)

    def track(self, index, path):
        if not 1 <= index <= len(self.boxes):
            return list(self.last)
        box = self.boxes[index - 1]
        if box is None:
            return list(self.last)
        self.last = list(box)
        if self.sigma > 0.0:
            dx = self.rng.gauss(0.0, self.sigma)
            dy = self.rng.gauss(0.0, self.sigma)
            return [box[0] + dx, box[1] + dy, box[2], box[3]]
        return list(box)


def _load_track(path):
    boxes = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            stripped = line.strip()
            if not stripped or stripped.lower().startswith("nan"):
                boxes.append(None)
            else:
                fields = [float(v) for v in stripped.split(",")[:4]]
                boxes.append(fields)
    return boxes


def build_tracker(strategy, gt=None, sigma=0.0, seed=0):
    if strategy == "static":
        return StaticTracker()
    if strategy == "adversarial":
        return AdversarialTracker()
    if strategy == "oracle":
        if gt is None:
            raise ValueError("the oracle strategy needs --gt FILE")
        return OracleTracker(gt, sigma=sigma, seed=seed)
    raise ValueError(f"unknown strategy {strategy!r}")
