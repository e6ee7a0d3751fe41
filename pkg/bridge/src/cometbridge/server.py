"""Wire-protocol server loop.

Speaks line-delimited JSON over stdin/stdout (default) or a TCP socket:
requests {"id": int, "src": str, "hyp": str}, replies {"id": int,
"score": number}, with a {"ready": true, "name": str} handshake before any
scoring. Requests are micro-batched: the loop collects up to batch_size
requests, waiting briefly for stragglers, so model inference can amortize
without deadlocking clients that pipeline fewer requests than a batch.
"""
from __future__ import annotations

import argparse
import json
import math
import queue
import socket
import sys
import threading
from dataclasses import dataclass
from typing import IO

from .models import ChunkModel, load_model

LINGER_SECONDS = 0.02


@dataclass
class BridgeConfig:
    model: str = "stub"
    device: str = "cpu"
    batch_size: int = 8
    max_inflight: int = 64

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


class _Malformed(Exception):
    pass


_EOF = object()


def _reader(stream: IO[str], inbox: "queue.Queue") -> None:
    try:
        for line in stream:
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
                req_id = msg["id"]
                if not isinstance(req_id, int):
                    raise TypeError("id must be an integer")
                item = (req_id, str(msg["src"]), str(msg["hyp"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                inbox.put(_Malformed(f"bad request line: {exc}"))
                return
            inbox.put(item)
    except (OSError, ValueError):
        pass
    finally:
        inbox.put(_EOF)


def serve(config: BridgeConfig, stdin: IO[str], stdout: IO[str]) -> int:
    """Run the protocol loop until input closes. Returns the exit status."""
    model: ChunkModel = load_model(
        config.model, device=config.device, batch_size=config.batch_size
    )

    def reply(msg: dict) -> None:
        stdout.write(json.dumps(msg) + "\n")
        stdout.flush()

    reply({"ready": True, "name": model.name})

    inbox: "queue.Queue" = queue.Queue()
    thread = threading.Thread(target=_reader, args=(stdin, inbox), daemon=True)
    thread.start()

    done = False
    while not done:
        batch = []
        item = inbox.get()
        while True:
            if item is _EOF:
                done = True
                break
            if isinstance(item, _Malformed):
                reply({"id": -1, "error": str(item)})
                return 1
            batch.append(item)
            if len(batch) >= config.batch_size:
                break
            try:
                item = inbox.get(timeout=LINGER_SECONDS)
            except queue.Empty:
                break
        if not batch:
            continue
        try:
            scores = model.score_batch([(src, hyp) for _, src, hyp in batch])
        except Exception as exc:  # inference failure fails the session
            reply({"id": batch[0][0], "error": f"inference failed: {exc}"})
            return 1
        for (req_id, _, _), score in zip(batch, scores):
            if not math.isfinite(score):
                reply({"id": req_id, "error": "non-finite score"})
                return 1
            reply({"id": req_id, "score": score})
    return 0


def _serve_tcp(config: BridgeConfig, port: int) -> int:
    with socket.create_server(("127.0.0.1", port)) as server:
        print(f"listening on 127.0.0.1:{port}", file=sys.stderr)
        conn, _ = server.accept()
        with conn:
            stdin = conn.makefile("r", encoding="utf-8")
            stdout = conn.makefile("w", encoding="utf-8")
            return serve(config, stdin, stdout)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="comet-bridge",
        description="Serve a QE model over the chunk-scoring wire protocol.",
    )
    parser.add_argument(
        "--model",
        default="stub",
        help="model identifier (a COMET checkpoint id, or 'stub')",
    )
    parser.add_argument("--device", default="cpu", choices=["cpu", "cuda"])
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument(
        "--max-inflight", type=int, default=64,
        help="advisory in-flight window for clients",
    )
    parser.add_argument(
        "--tcp", type=int, metavar="PORT",
        help="listen on a local TCP port instead of stdin/stdout",
    )
    args = parser.parse_args(argv)
    try:
        config = BridgeConfig(
            model=args.model,
            device=args.device,
            batch_size=args.batch_size,
            max_inflight=args.max_inflight,
        )
    except ValueError as exc:
        parser.error(str(exc))
    if args.tcp is not None:
        return _serve_tcp(config, args.tcp)
    return serve(config, sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
