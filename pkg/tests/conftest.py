import json

import numpy as np
import pytest
from PIL import Image

from giteval.dataset import serialize_track
from giteval.geometry import BoundingBox


def moving_track(n, start=(5.0, 5.0), step=(2.0, 1.0), size=(12.0, 10.0)):
    return [
        BoundingBox(start[0] + step[0] * k, start[1] + step[1] * k, size[0], size[1])
        for k in range(n)
    ]


def write_noise_frame(path, seed, size):
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(pixels, "RGB").save(path)


@pytest.fixture
def make_sequence(tmp_path):
    """Write a synthetic sequence directory and return its path.

    Frames are small seeded-noise PNGs by default; `frames="stub"` writes
    empty placeholder files for box-only workflows that never decode.
    """

    def build(
        seq_id="seq01",
        n=10,
        size=(64, 48),
        gt=None,
        absent=(),
        shotcut=(),
        occlusion=(),
        restart=(),
        write_meta=True,
        frames="noise",
        frame_seed=0,
    ):
        root = tmp_path / seq_id
        frames_dir = root / "frames"
        frames_dir.mkdir(parents=True)
        boxes = list(gt) if gt is not None else moving_track(n)
        for idx in absent:
            boxes[idx - 1] = None
        for k in range(n):
            path = frames_dir / f"{k + 1:06d}.png"
            if frames == "stub":
                path.touch()
            elif frames == "static":
                write_noise_frame(path, frame_seed, size)  # identical frames
            else:
                write_noise_frame(path, frame_seed + k, size)
        (root / "groundtruth.txt").write_text(serialize_track(boxes), encoding="utf-8")
        for name, indices in (("absent", absent), ("shotcut", shotcut), ("occlusion", occlusion)):
            if indices:
                (root / f"{name}.txt").write_text(
                    "".join(f"{i}\n" for i in sorted(indices)), encoding="utf-8"
                )
        if restart:
            (root / "restart.txt").write_text(
                "".join(f"{i}\n" for i in restart), encoding="utf-8"
            )
        if write_meta:
            (root / "meta.json").write_text(
                json.dumps({"width": size[0], "height": size[1]}) + "\n",
                encoding="utf-8",
            )
        return root

    return build
