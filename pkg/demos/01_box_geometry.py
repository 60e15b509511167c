"""Box algebra and overlap scores, step by step.

Run with: python3 demos/01_box_geometry.py
"""

from giteval import (
    BoundingBox,
    FrameSize,
    average_box,
    center,
    center_distance,
    diou,
    enclose,
    giou,
    intersect,
    iou,
    npre_value,
)

# Two overlapping boxes: a 10x10 ground truth and a prediction shifted
# by (5, 5). Their overlap is the classic 25/175 case.
gt = BoundingBox(0, 0, 10, 10)
pred = BoundingBox(5, 5, 10, 10)

print("ground truth:", gt.as_tuple(), "center", center(gt))
print("prediction:  ", pred.as_tuple(), "center", center(pred))
print()
print("intersection:", intersect(gt, pred))
print("enclosure:   ", enclose(gt, pred))
print("average:     ", average_box(gt, pred))
print()

# IoU only sees the overlap; GIoU additionally penalizes the slack in the
# enclosing box, and DIoU penalizes the center offset. All three agree at
# 1.0 for a perfect prediction and diverge as the boxes separate.
print(f"IoU  = {iou(gt, pred):+.6f}")
print(f"GIoU = {giou(gt, pred):+.6f}   (can go negative)")
print(f"DIoU = {diou(gt, pred):+.6f}")
print(f"center distance = {center_distance(gt, pred):.3f} px")
print()

# Once the boxes are disjoint, IoU flatlines at zero but GIoU/DIoU keep
# ordering predictions by how far away they drifted.
for shift in (0, 10, 30, 80):
    drifted = BoundingBox(gt.x + shift, gt.y, gt.w, gt.h)
    print(
        f"shift {shift:3d}px:  IoU {iou(gt, drifted):.3f}"
        f"  GIoU {giou(gt, drifted):+.3f}  DIoU {diou(gt, drifted):+.3f}"
    )
print()

# The normalized precision score combines the center distance with the
# shortest distance to the ground-truth box, normalized by the worst
# value any point of the frame could achieve. It is 0 at the ground-truth
# center and 1 at the worst frame corner, independent of resolution.
frame = FrameSize(100, 100)
gt = BoundingBox(40, 40, 20, 20)
for cx, cy in ((50, 50), (65, 50), (90, 90), (0, 0)):
    probe = BoundingBox(cx - 5, cy - 5, 10, 10)
    print(f"pred center ({cx:3d},{cy:3d}) -> normalized precision {npre_value(probe, gt, frame):.4f}")
