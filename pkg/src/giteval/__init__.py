"""Evaluation engine for long-term global instance tracking.

Submodules:
  geometry    box algebra and overlap/distance scores
  attributes  the twelve per-frame challenge attributes
  dataset     on-disk formats and sequence loading
  densify     sparse-to-dense annotation completion
  metrics     precision / success curves, aggregation, robustness
  protocol    evaluator/tracker wire protocol and transports
  session     the restart-driven (R-OPE) evaluation loop
  cli         command-line entry points
"""

from .attributes import AttributeVector, ThresholdConfig
from .dataset import (
    DatasetError,
    ResultTrack,
    SequenceRecord,
    ValidationReport,
    load_sequence,
    parse_groundtruth,
    parse_results,
)
from .densify import DenseTrack, DensifyContext, Provenance, densify_frame, densify_sequence
from .geometry import (
    BoundingBox,
    FrameSize,
    Point,
    average_box,
    center,
    center_distance,
    contains,
    diou,
    enclose,
    giou,
    intersect,
    iou,
    npre_value,
    point_to_box_distance,
)
from .metrics import (
    EvaluationCurve,
    RobustnessReport,
    aggregate,
    attribute_breakdown,
    evaluate_ope,
    filter_frames,
    npre_curve,
    precision_curve,
    robustness,
    success_curve,
)
from .protocol import ProtocolMessage, decode_message, encode_message
from .session import SessionAborted, SessionConfig, SessionResult, run_session

__version__ = "0.1.0"

__all__ = [
    "AttributeVector",
    "BoundingBox",
    "DatasetError",
    "DenseTrack",
    "DensifyContext",
    "EvaluationCurve",
    "FrameSize",
    "Point",
    "Provenance",
    "ProtocolMessage",
    "ResultTrack",
    "RobustnessReport",
    "SequenceRecord",
    "SessionAborted",
    "SessionConfig",
    "SessionResult",
    "ThresholdConfig",
    "ValidationReport",
    "aggregate",
    "attribute_breakdown",
    "average_box",
    "center",
    "center_distance",
    "contains",
    "decode_message",
    "densify_frame",
    "densify_sequence",
    "diou",
    "enclose",
    "encode_message",
    "evaluate_ope",
    "filter_frames",
    "giou",
    "intersect",
    "iou",
    "load_sequence",
    "npre_curve",
    "npre_value",
    "parse_groundtruth",
    "parse_results",
    "point_to_box_distance",
    "precision_curve",
    "robustness",
    "run_session",
    "success_curve",
]
