"""Computing the twelve per-frame challenge attributes on synthetic frames.

Run with: python3 demos/02_frame_attributes.py
"""

import numpy as np

from giteval import BoundingBox, ThresholdConfig
from giteval.attributes import (
    attribute_csv_lines,
    frame_attributes,
    illumination_estimate,
    laplacian_variance,
    to_grayscale,
)

rng = np.random.default_rng(0)
cfg = ThresholdConfig()

# --- the building blocks ----------------------------------------------------

# Illumination: the Shade of Gray estimator recovers per-channel gains;
# their cosine similarity to neutral light (1,1,1) is the index i.
neutral = np.full((32, 32, 3), 128, dtype=np.uint8)
reddish = np.tile(np.array([200, 100, 100], dtype=np.uint8), (32, 32, 1))
for name, frame in (("neutral gray", neutral), ("red cast", reddish)):
    gains, i = illumination_estimate(frame, cfg)
    special = "IE" if i < cfg.illum_special else "ok"
    print(f"{name:13s} gains={np.round(gains, 3)}  i={i:.4f}  [{special}]")
print()

# Blur: variance of the Laplacian response. Noise is sharp, a constant
# frame is maximally blurry.
noise = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
flat = np.full((32, 32, 3), 99, dtype=np.uint8)
for name, frame in (("noise", noise), ("flat", flat)):
    v = laplacian_variance(to_grayscale(frame))
    print(f"{name:6s} sharpness v={v:10.1f}  ({'sharp' if v >= cfg.blur_low else 'blurry'})")
print()

# --- a tiny sequence -----------------------------------------------------------

# Three frames: static, then a large jump of the target box, then a frame
# flagged as a shot cut (pairwise indices are suppressed across cuts).
frames = [noise, noise, rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)]
boxes = [BoundingBox(2, 2, 8, 8), BoundingBox(18, 14, 8, 8), BoundingBox(5, 5, 8, 8)]
flags = [(False, False, False), (False, False, False), (False, True, False)]

vectors = []
prev = None
for frame, box, manual in zip(frames, boxes, flags):
    vec = frame_attributes(prev, frame, box, manual, cfg)
    vectors.append(vec)
    prev = (frame, box, vec)

print("frame 2 moved far relative to its size:")
print(f"  motion index d = {vectors[1].d:.3f}  -> FM = {vectors[1].FM}")
print(f"  identical pixels -> p = {vectors[1].p:.3f} -> CC = {vectors[1].CC}")
print("frame 3 is a shot-cut start: pairwise indices are withheld")
print(f"  d = {vectors[2].d}  p = {vectors[2].p}  SC = {vectors[2].SC}")
print()

print("the CSV rows written by the attributes command:")
for line in attribute_csv_lines(vectors):
    print(" ", line[:100] + ("..." if len(line) > 100 else ""))
