"""Line-delimited message protocol between the evaluator and a tracker.

One JSON object per line, UTF-8. The evaluator sends {init, frame,
restart, end}; the client answers {ready, prediction, error}. Frame
payloads are file paths (shared filesystem contract); pixels never cross
the wire. Unknown fields are ignored on decode for forward
compatibility.

Transports carry encoded lines over a child process's stdin/stdout, a
TCP connection, or an in-process callable (for tests); the grammar is
identical on all of them.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable

EVALUATOR_TYPES = ("init", "frame", "restart", "end")
CLIENT_TYPES = ("ready", "prediction", "error")

_REQUIRED_FIELDS = {
    "init": ("index", "box", "path"),
    "frame": ("index", "path"),
    "restart": ("index", "box", "path"),
    "end": (),
    "ready": (),
    "prediction": ("index", "box"),
    "error": ("message",),
}


class ProtocolError(Exception):
    """Malformed message, unexpected message type, or broken transport."""


class TransportTimeout(ProtocolError):
    """The peer did not answer within the configured timeout."""


@dataclass(frozen=True)
class ProtocolMessage:
    type: str
    index: int | None = None
    box: tuple[float, float, float, float] | None = None
    path: str | None = None
    sequence: str | None = None
    message: str | None = None


def encode_message(m: ProtocolMessage) -> str:
    """Render a message as one line of JSON (no trailing newline)."""
    if m.type not in _REQUIRED_FIELDS:
        raise ProtocolError(f"unknown message type {m.type!r}")
    for name in _REQUIRED_FIELDS[m.type]:
        if getattr(m, name) is None:
            raise ProtocolError(f"{m.type} message requires field {name!r}")
    obj: dict = {"type": m.type}
    if m.index is not None:
        obj["index"] = int(m.index)
    if m.box is not None:
        obj["box"] = [float(v) for v in m.box]
    if m.path is not None:
        obj["path"] = m.path
    if m.sequence is not None:
        obj["sequence"] = m.sequence
    if m.message is not None:
        obj["message"] = m.message
    return json.dumps(obj, separators=(",", ":"))


def decode_message(line: str) -> ProtocolMessage:
    """Parse one line into a message; unknown fields are ignored."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {line!r} ({exc})") from None
    if not isinstance(obj, dict):
        raise ProtocolError(f"expected a JSON object, got {type(obj).__name__}")
    mtype = obj.get("type")
    if mtype not in _REQUIRED_FIELDS:
        raise ProtocolError(f"unknown message type {mtype!r}")
    for name in _REQUIRED_FIELDS[mtype]:
        if obj.get(name) is None:
            raise ProtocolError(f"{mtype} message missing field {name!r}")

    index = obj.get("index")
    if index is not None:
        if not isinstance(index, int) or isinstance(index, bool):
            raise ProtocolError(f"index must be an integer, got {index!r}")
    box = obj.get("box")
    if box is not None:
        if (
            not isinstance(box, list)
            or len(box) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in box)
            or not all(math.isfinite(float(v)) for v in box)
        ):
            raise ProtocolError(f"box must be a list of 4 finite numbers, got {box!r}")
        box = tuple(float(v) for v in box)
    text_fields = {}
    for name in ("path", "sequence", "message"):
        value = obj.get(name)
        if value is not None and not isinstance(value, str):
            raise ProtocolError(f"{name} must be a string, got {value!r}")
        text_fields[name] = value
    return ProtocolMessage(type=mtype, index=index, box=box, **text_fields)


class Transport:
    """Bidirectional message stream. Subclasses move encoded lines."""

    def send(self, m: ProtocolMessage) -> None:
        self.send_line(encode_message(m))

    def recv(self, timeout: float) -> ProtocolMessage:
        return decode_message(self.recv_line(timeout))

    def send_line(self, line: str) -> None:
        raise NotImplementedError

    def recv_line(self, timeout: float) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class InProcessTransport(Transport):
    """Drives an in-process client callable, exercising the real codec.

    The callable receives each decoded evaluator message and returns the
    client's reply (or None for end). Replies queue up and come back
    through recv, so the request/response pattern matches the wire.
    """

    def __init__(self, client: Callable[[ProtocolMessage], ProtocolMessage | None]):
        self._client = client
        self._pending: list[str] = []

    def send_line(self, line: str) -> None:
        reply = self._client(decode_message(line))
        if reply is not None:
            self._pending.append(encode_message(reply))

    def recv_line(self, timeout: float) -> str:
        if not self._pending:
            raise TransportTimeout("in-process client produced no reply")
        return self._pending.pop(0)


class PipeTransport(Transport):
    """Speaks to a child process over its stdin/stdout.

    A reader thread pumps stdout lines into a queue so receives can time
    out without blocking on the pipe.
    """

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._queue: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        try:
            for line in self._proc.stdout:
                self._queue.put(line)
        finally:
            self._queue.put(None)  # EOF sentinel

    def send_line(self, line: str) -> None:
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise ProtocolError(f"client pipe closed: {exc}") from None

    def recv_line(self, timeout: float) -> str:
        try:
            line = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise TransportTimeout(f"no reply from client within {timeout} s") from None
        if line is None:
            raise ProtocolError("client closed its output stream")
        return line.rstrip("\r\n")

    def close(self) -> None:
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                if stream:
                    stream.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()


class TcpTransport(Transport):
    """Speaks the same grammar over an accepted TCP connection."""

    def __init__(self, conn: socket.socket):
        self._conn = conn
        self._reader = conn.makefile("r", encoding="utf-8", newline="\n")
        self._writer = conn.makefile("w", encoding="utf-8", newline="\n")

    def send_line(self, line: str) -> None:
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
        except OSError as exc:
            raise ProtocolError(f"connection closed: {exc}") from None

    def recv_line(self, timeout: float) -> str:
        self._conn.settimeout(timeout)
        try:
            line = self._reader.readline()
        except socket.timeout:
            raise TransportTimeout(f"no reply from client within {timeout} s") from None
        except OSError as exc:
            raise ProtocolError(f"connection error: {exc}") from None
        if line == "":
            raise ProtocolError("client closed the connection")
        return line.rstrip("\r\n")

    def close(self) -> None:
        for handle in (self._reader, self._writer):
            try:
                handle.close()
            except OSError:
                pass
        try:
            self._conn.close()
        except OSError:
            pass


class TcpListener:
    """Accepts one client connection per session on a fixed address."""

    def __init__(self, host: str, port: int):
        self._sock = socket.create_server((host, port))

    @property
    def address(self) -> tuple[str, int]:
        return self._sock.getsockname()[:2]

    def accept(self, timeout: float = 60.0) -> TcpTransport:
        self._sock.settimeout(timeout)
        try:
            conn, _ = self._sock.accept()
        except socket.timeout:
            raise TransportTimeout(f"no client connected within {timeout} s") from None
        return TcpTransport(conn)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def spawn_client(command: str | list[str]) -> PipeTransport:
    """Launch a tracker client as a child process speaking over pipes."""
    return PipeTransport(command)
