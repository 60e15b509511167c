"""Wire grammar of the evaluator/tracker protocol, client side.

One JSON object per line. The evaluator sends init/frame/restart/end;
the client answers ready/prediction/error. This is a deliberately
independent implementation of the grammar (messages are plain dicts);
conformance against the engine's codec is pinned by golden lines shared
with its test suite.
"""

from __future__ import annotations

import json

EVALUATOR_TYPES = frozenset({"init", "frame", "restart", "end"})
CLIENT_TYPES = frozenset({"ready", "prediction", "error"})

_REQUIRED = {
    "init": ("index", "box", "path"),
    "frame": ("index", "path"),
    "restart": ("index", "box", "path"),
    "end": (),
    "ready": (),
    "prediction": ("index", "box"),
    "error": ("message",),
}

# canonical key order, matching the engine's encoder byte for byte
_FIELD_ORDER = ("index", "box", "path", "sequence", "message")


class WireError(Exception):
    """A line that does not parse as a valid protocol message."""


def _check_box(value):
    if (
        not isinstance(value, list)
        or len(value) != 4
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise WireError(f"box must be four numbers, got {value!r}")
    return [float(v) for v in value]


def decode_line(line: str) -> dict:
    """Parse one line into a validated message dict; unknown keys are dropped."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(f"not JSON: {line!r} ({exc})") from None
    if not isinstance(raw, dict) or "type" not in raw:
        raise WireError(f"expected an object with a type field: {line!r}")
    kind = raw["type"]
    if kind not in _REQUIRED:
        raise WireError(f"unknown message type {kind!r}")
    msg = {"type": kind}
    for key in _FIELD_ORDER:
        if raw.get(key) is None:
            continue
        value = raw[key]
        if key == "index":
            if isinstance(value, bool) or not isinstance(value, int):
                raise WireError(f"index must be an integer, got {value!r}")
        elif key == "box":
            value = _check_box(value)
        elif not isinstance(value, str):
            raise WireError(f"{key} must be a string, got {value!r}")
        msg[key] = value
    for key in _REQUIRED[kind]:
        if key not in msg:
            raise WireError(f"{kind} message missing {key!r}")
    return msg


def encode_line(msg: dict) -> str:
    """Render a message dict as one canonical JSON line (no newline)."""
    kind = msg.get("type")
    if kind not in _REQUIRED:
        raise WireError(f"unknown message type {kind!r}")
    for key in _REQUIRED[kind]:
        if msg.get(key) is None:
            raise WireError(f"{kind} message requires {key!r}")
    ordered = {"type": kind}
    for key in _FIELD_ORDER:
        if msg.get(key) is not None:
            ordered[key] = _check_box(list(msg[key])) if key == "box" else msg[key]
    return json.dumps(ordered, separators=(",", ":"))
