"""Reference client for the giteval tracker-evaluation wire protocol."""

from .client import serve
from .protocol import WireError, decode_line, encode_line
from .strategies import AdversarialTracker, OracleTracker, StaticTracker, build_tracker

__version__ = "0.1.0"

__all__ = [
    "AdversarialTracker",
    "OracleTracker",
    "StaticTracker",
    "WireError",
    "build_tracker",
    "decode_line",
    "encode_line",
    "serve",
]
