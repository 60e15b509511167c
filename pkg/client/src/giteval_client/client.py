"""The client-side protocol loop.

`serve` answers every evaluator message before reading the next one:
init/restart get a ready, frame gets a prediction echoing the frame
index, end terminates the session. A protocol violation (a message the
evaluator should never send) produces an error message and a nonzero
exit, per the grammar.
"""

from __future__ import annotations

from .protocol import CLIENT_TYPES, WireError, decode_line, encode_line


def serve(tracker, reader, writer) -> int:
    """Run one session over text streams; returns the process exit status."""

    def reply(msg):
        writer.write(encode_line(msg) + "\n")
        writer.flush()

    for line in reader:
        if line.strip() == "":
            continue
        try:
            msg = decode_line(line)
        except WireError as exc:
            reply({"type": "error", "message": str(exc)})
            return 1
        kind = msg["type"]
        if kind in CLIENT_TYPES:
            reply({"type": "error", "message": f"unexpected {kind} from evaluator"})
            return 1
        if kind == "end":
            return 0
        if kind == "init":
            tracker.initialize(msg["box"], msg["path"], msg.get("sequence"))
            reply({"type": "ready"})
        elif kind == "restart":
            tracker.initialize(msg["box"], msg["path"])
            reply({"type": "ready"})
        else:  # frame
            box = tracker.track(msg["index"], msg["path"])
            reply({"type": "prediction", "index": msg["index"], "box": box})
    return 0  # evaluator closed the stream
