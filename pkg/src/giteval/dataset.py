"""On-disk formats: ground-truth tracks, flag files, restart schedules,
tracker result files, sequence directories.

All files are UTF-8 with \\n line endings (optional \\r accepted), fields
comma-separated, no header lines in track files. Frame indices in files
are 1-based; 0-based indexing happens only inside internal arrays.

A sequence directory holds::

    frames/            image files (png/jpg/jpeg/ppm), zero-padded
                       numeric filename order
    groundtruth.txt    one line per frame: x,y,w,h (blank or NaNs = absent)
    absent.txt         optional flag file
    shotcut.txt        optional flag file
    occlusion.txt      optional flag file
    restart.txt        optional restart schedule, 1-based indices
    meta.json          optional {"width": W, "height": H}; when missing the
                       first frame is decoded for its size
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import BoundingBox, FrameSize

FRAME_SUFFIXES = {".png", ".jpg", ".jpeg", ".ppm"}


class DatasetError(Exception):
    """Structured parse/validation failure; message carries line numbers."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass
class ValidationReport:
    """Aggregated validation outcome: (frame index or None, message) pairs."""

    errors: list[tuple[int | None, str]] = field(default_factory=list)
    warnings: list[tuple[int | None, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, frame: int | None, message: str) -> None:
        self.errors.append((frame, message))

    def warn(self, frame: int | None, message: str) -> None:
        self.warnings.append((frame, message))

    def summary(self) -> str:
        parts = [f"frame {f}: {m}" if f is not None else m for f, m in self.errors]
        return "; ".join(parts) if parts else "ok"


@dataclass(frozen=True)
class SequenceRecord:
    """One video's annotations: frame paths, per-frame ground truth and
    manual flags, restart schedule (1-based), frame size."""

    id: str
    frame_paths: tuple[Path, ...]
    gt: tuple[BoundingBox | None, ...]
    absent: tuple[bool, ...]
    shotcut: tuple[bool, ...]
    occluded: tuple[bool, ...]
    restart_schedule: tuple[int, ...]
    frame_size: FrameSize

    def __len__(self) -> int:
        return len(self.gt)


@dataclass(frozen=True)
class ResultTrack:
    """A tracker's output for one sequence: per-frame optional boxes plus
    optional confidences."""

    sequence_id: str
    boxes: tuple[BoundingBox | None, ...]
    scores: tuple[float | None, ...]

    def __len__(self) -> int:
        return len(self.boxes)


def _split_lines(text: str) -> list[str]:
    if not isinstance(text, str):
        raise DatasetError(f"expected text, got {type(text).__name__}")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line.rstrip("\r") for line in lines]


def _is_absent_line(line: str) -> bool:
    if line.strip() == "":
        return True
    cells = [c.strip().lower() for c in line.split(",")]
    return len(cells) == 4 and all(c == "nan" for c in cells)


def _parse_box_line(line: str, lineno: int, allow_score: bool):
    cells = line.split(",")
    if allow_score and len(cells) == 5:
        score_cell = cells.pop()
    elif len(cells) == 4:
        score_cell = None
    else:
        expected = "4 or 5" if allow_score else "4"
        raise DatasetError(f"line {lineno}: expected {expected} fields, got {len(cells)}")
    try:
        x, y, w, h = (float(c) for c in cells)
    except ValueError:
        raise DatasetError(f"line {lineno}: non-numeric box field in {line!r}") from None
    if not all(math.isfinite(v) for v in (x, y, w, h)):
        raise DatasetError(f"line {lineno}: non-finite box field in {line!r}")
    if w <= 0 or h <= 0:
        raise DatasetError(f"line {lineno}: box extents must be positive, got w={w}, h={h}")
    score = None
    if score_cell is not None:
        try:
            score = float(score_cell)
        except ValueError:
            raise DatasetError(f"line {lineno}: non-numeric confidence {score_cell!r}") from None
        if not math.isfinite(score):
            raise DatasetError(f"line {lineno}: non-finite confidence")
        if not 0.0 <= score <= 1.0:
            warnings.warn(
                f"line {lineno}: confidence {score} outside [0, 1], clamping",
                RuntimeWarning,
                stacklevel=3,
            )
            score = min(max(score, 0.0), 1.0)
    return BoundingBox(x, y, w, h), score


def parse_groundtruth(text: str) -> list[BoundingBox | None]:
    """Parse a track file: one `x,y,w,h` line per frame, blank line or
    `NaN,NaN,NaN,NaN` marking an absent frame."""
    boxes: list[BoundingBox | None] = []
    for lineno, line in enumerate(_split_lines(text), start=1):
        if _is_absent_line(line):
            boxes.append(None)
        else:
            box, _ = _parse_box_line(line, lineno, allow_score=False)
            boxes.append(box)
    return boxes


def parse_results(text: str, sequence_id: str = "") -> ResultTrack:
    """Parse a tracker result file: the ground-truth grammar plus an
    optional 5th confidence field (clamped into [0, 1] with a warning)."""
    boxes: list[BoundingBox | None] = []
    scores: list[float | None] = []
    for lineno, line in enumerate(_split_lines(text), start=1):
        if _is_absent_line(line):
            boxes.append(None)
            scores.append(None)
        else:
            box, score = _parse_box_line(line, lineno, allow_score=True)
            boxes.append(box)
            scores.append(score)
    return ResultTrack(sequence_id, tuple(boxes), tuple(scores))


def parse_flags(text: str, frame_count: int) -> list[bool]:
    """Parse a flag file into a per-frame boolean list.

    Two grammars are accepted: one 0/1 per line with exactly frame_count
    lines, or a list of 1-based frame indices. A file whose line count
    equals frame_count and whose values are all 0/1 is read as the
    bitmask form (the only case where the grammars can disagree is a
    duplicated index, which the bitmask reading wins).
    """
    lines = _split_lines(text)
    values = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped == "":
            raise DatasetError(f"line {lineno}: blank line in flag file")
        try:
            values.append(int(stripped))
        except ValueError:
            raise DatasetError(f"line {lineno}: expected an integer, got {stripped!r}") from None
    if len(values) == frame_count and all(v in (0, 1) for v in values):
        return [bool(v) for v in values]
    flags = [False] * frame_count
    for lineno, idx in enumerate(values, start=1):
        if not 1 <= idx <= frame_count:
            raise DatasetError(
                f"line {lineno}: frame index {idx} out of range 1..{frame_count}"
            )
        flags[idx - 1] = True
    return flags


def parse_restart_schedule(text: str, record: SequenceRecord) -> list[int]:
    """Parse a restart schedule: 1-based indices, one per line, returned
    deduplicated and ascending. Every restart frame must carry ground
    truth (re-initialization needs a box)."""
    indices = set()
    for lineno, line in enumerate(_split_lines(text), start=1):
        stripped = line.strip()
        try:
            idx = int(stripped)
        except ValueError:
            raise DatasetError(f"line {lineno}: expected an integer, got {stripped!r}") from None
        if not 1 <= idx <= len(record):
            raise DatasetError(f"line {lineno}: restart frame {idx} out of range 1..{len(record)}")
        if record.gt[idx - 1] is None:
            raise DatasetError(
                f"line {lineno}: restart frame {idx} has no ground truth (absent frame)"
            )
        indices.add(idx)
    return sorted(indices)


def _format_float(value: float) -> str:
    # repr round-trips exactly, keeping write-then-parse lossless
    return repr(float(value))


def serialize_track(
    boxes: list[BoundingBox | None] | tuple[BoundingBox | None, ...],
    scores: list[float | None] | None = None,
) -> str:
    """Render a track as text, inverse of parse_groundtruth/parse_results."""
    lines = []
    for idx, box in enumerate(boxes):
        if box is None:
            lines.append("")
            continue
        cells = [_format_float(v) for v in box.as_tuple()]
        if scores is not None and scores[idx] is not None:
            cells.append(_format_float(scores[idx]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _read_text(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not valid UTF-8 ({exc})") from None


def _frame_sort_key(path: Path):
    stem = path.stem
    return (0, int(stem), stem) if stem.isdigit() else (1, 0, stem)


def discover_frames(frames_dir: Path) -> list[Path]:
    """Image files under a frames directory in zero-padded numeric order."""
    if not frames_dir.is_dir():
        raise DatasetError(f"missing frames directory: {frames_dir}")
    paths = [
        p
        for p in frames_dir.iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES
    ]
    return sorted(paths, key=_frame_sort_key)


def load_frame(path: Path) -> np.ndarray:
    """Decode one image file to an (H, W, 3) uint8 RGB array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def iter_frames(record: SequenceRecord):
    """Stream decoded frames of a sequence in order."""
    for path in record.frame_paths:
        yield load_frame(path)


def _read_meta(path: Path) -> FrameSize:
    try:
        meta = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(meta, dict) or "width" not in meta or "height" not in meta:
        raise DatasetError(f"{path}: expected an object with width and height")
    try:
        return FrameSize(int(meta["width"]), int(meta["height"]))
    except (TypeError, ValueError) as exc:
        raise DatasetError(f"{path}: bad frame size ({exc})") from None


def validate_sequence(record: SequenceRecord) -> ValidationReport:
    """Check every SequenceRecord invariant; box-outside-frame is a warning."""
    report = ValidationReport()
    n = len(record.gt)
    if n < 1:
        report.error(None, "sequence has no frames")
        return report
    for name in ("frame_paths", "absent", "shotcut", "occluded"):
        length = len(getattr(record, name))
        if length != n:
            report.error(None, f"{name} has {length} entries, ground truth has {n}")
    if len(record.absent) == n:
        for idx0, (box, absent) in enumerate(zip(record.gt, record.absent)):
            if absent and box is not None:
                report.error(idx0 + 1, "ground truth present on an absent frame")
            if not absent and box is None:
                report.error(idx0 + 1, "ground truth missing on a present frame")
    if record.gt[0] is None:
        report.error(1, "frame 1 must carry ground truth (initialization frame)")
    previous = 0
    for idx in record.restart_schedule:
        if idx <= previous:
            report.error(idx, "restart schedule not strictly increasing")
        previous = idx
        if not 1 <= idx <= n:
            report.error(idx, f"restart frame out of range 1..{n}")
        elif record.gt[idx - 1] is None:
            report.error(idx, "restart frame has no ground truth")
    size = record.frame_size
    for idx0, box in enumerate(record.gt):
        if box is None:
            continue
        if box.x < 0 or box.y < 0 or box.right > size.width or box.bottom > size.height:
            report.warn(idx0 + 1, "box extends past the frame bounds")
    return report


def load_sequence(directory: Path | str) -> SequenceRecord:
    """Assemble and validate a SequenceRecord from a sequence directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"not a directory: {directory}")
    gt_path = directory / "groundtruth.txt"
    if not gt_path.is_file():
        raise DatasetError(f"missing ground truth file: {gt_path}")
    gt = parse_groundtruth(_read_text(gt_path))
    n = len(gt)

    frame_paths = discover_frames(directory / "frames")
    if len(frame_paths) != n:
        raise DatasetError(
            f"{directory.name}: {len(frame_paths)} frames but {n} ground-truth lines"
        )

    flags = {}
    for name in ("absent", "shotcut", "occlusion"):
        path = directory / f"{name}.txt"
        flags[name] = parse_flags(_read_text(path), n) if path.is_file() else [False] * n

    meta_path = directory / "meta.json"
    if meta_path.is_file():
        frame_size = _read_meta(meta_path)
    else:
        try:
            first = load_frame(frame_paths[0])
        except Exception as exc:
            raise DatasetError(
                f"{directory.name}: no meta.json and first frame undecodable ({exc})"
            ) from None
        frame_size = FrameSize(first.shape[1], first.shape[0])

    record = SequenceRecord(
        id=directory.name,
        frame_paths=tuple(frame_paths),
        gt=tuple(gt),
        absent=tuple(flags["absent"]),
        shotcut=tuple(flags["shotcut"]),
        occluded=tuple(flags["occlusion"]),
        restart_schedule=(),
        frame_size=frame_size,
    )

    restart_path = directory / "restart.txt"
    if restart_path.is_file():
        schedule = parse_restart_schedule(_read_text(restart_path), record)
        record = replace(record, restart_schedule=tuple(schedule))

    report = validate_sequence(record)
    if not report.ok:
        raise DatasetError(f"{directory.name}: {report.summary()}", report)
    return record
