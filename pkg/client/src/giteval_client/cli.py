"""Command-line entry point: speak the protocol over stdio or TCP."""

from __future__ import annotations

import argparse
import socket
import sys

from .client import serve
from .strategies import build_tracker


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="giteval-client",
        description="Reference tracker client for the R-OPE wire protocol.",
    )
    parser.add_argument(
        "--strategy",
        choices=("static", "oracle", "adversarial"),
        default="static",
        help="baseline tracking strategy",
    )
    parser.add_argument("--gt", help="ground-truth track file (oracle strategy)")
    parser.add_argument("--sigma", type=float, default=0.0, help="oracle center jitter, px")
    parser.add_argument("--seed", type=int, default=0, help="jitter RNG seed")
    parser.add_argument("--connect", help="host:port of a listening evaluator (default: stdio)")
    args = parser.parse_args(argv)

    try:
        tracker = build_tracker(args.strategy, gt=args.gt, sigma=args.sigma, seed=args.seed)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.connect:
        host, _, port = args.connect.rpartition(":")
        if not host:
            print("error: --connect expects host:port", file=sys.stderr)
            return 2
        with socket.create_connection((host, int(port))) as conn:
            reader = conn.makefile("r", encoding="utf-8", newline="\n")
            writer = conn.makefile("w", encoding="utf-8", newline="\n")
            return serve(tracker, reader, writer)
    return serve(tracker, sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
