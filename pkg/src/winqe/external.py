"""Client for external scorer processes speaking the line-delimited JSON protocol.

Requests are single-line JSON objects {"id": int, "src": str, "hyp": str};
replies are {"id": int, "score": number}. The scorer announces itself with
{"ready": true, "name": str} before any scoring happens. Replies may arrive
out of order; the client matches them by id and presents results in request
order. Any error reply, malformed line, or timeout fails the whole session:
partial results are never surfaced.
"""
from __future__ import annotations

import json
import math
import shlex
import socket
import subprocess
import threading
from typing import IO, Sequence

from .scoring import (
    ScoreRequest,
    ScoreResponse,
    ScorerError,
    ScorerSession,
    ScorerSpec,
    _check_ids,
)


class ExternalSession(ScorerSession):
    """One live connection to an external scorer (subprocess or TCP endpoint)."""

    def __init__(self, spec: ScorerSpec, timeout: float = 60.0, window: int = 32):
        if window < 1:
            raise ScorerError("in-flight window must be >= 1")
        self._timeout = timeout
        self._window = window
        self._proc: subprocess.Popen[str] | None = None
        self._sock: socket.socket | None = None
        self._failed: str | None = None
        self._closed = False
        self._eof = False
        self._handshake: dict | None = None
        self._cond = threading.Condition()
        self._replies: dict[int, float] = {}

        params = spec.parameters
        if "command" in params:
            command = params["command"]
            argv = shlex.split(command) if isinstance(command, str) else list(command)
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
            self._writer: IO[str] = self._proc.stdin  # type: ignore[assignment]
            reader: IO[str] = self._proc.stdout  # type: ignore[assignment]
        else:
            host, _, port = str(params["endpoint"]).rpartition(":")
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._writer = self._sock.makefile("w", encoding="utf-8")
            reader = self._sock.makefile("r", encoding="utf-8")

        self._reader_thread = threading.Thread(
            target=self._read_loop, args=(reader,), daemon=True
        )
        self._reader_thread.start()
        self.name = self._await_handshake()

    # -- reader side -------------------------------------------------------

    def _read_loop(self, reader: IO[str]) -> None:
        try:
            for line in reader:
                line = line.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    self._fail(f"malformed reply line: {line!r}")
                    return
                if msg.get("ready"):
                    with self._cond:
                        self._handshake = msg
                        self._cond.notify_all()
                    continue
                if "error" in msg:
                    self._fail(f"scorer error for id {msg.get('id')}: {msg['error']}")
                    return
                score = msg.get("score")
                if (
                    not isinstance(msg.get("id"), int)
                    or not isinstance(score, (int, float))
                    or not math.isfinite(score)
                ):
                    self._fail(f"invalid reply: {line!r}")
                    return
                with self._cond:
                    self._replies[msg["id"]] = float(score)
                    self._cond.notify_all()
        except (OSError, ValueError):
            pass
        finally:
            with self._cond:
                self._eof = True
                self._cond.notify_all()

    def _fail(self, reason: str) -> None:
        with self._cond:
            if self._failed is None:
                self._failed = reason
            self._cond.notify_all()

    def _await_handshake(self) -> str:
        with self._cond:
            ok = self._cond.wait_for(
                lambda: self._handshake is not None
                or self._failed is not None
                or self._eof,
                timeout=self._timeout,
            )
        if self._failed or not ok or self._handshake is None:
            self._shutdown()
            raise ScorerError(
                f"scorer session failed: {self._failed or 'no ready handshake'}"
            )
        return str(self._handshake.get("name", ""))

    # -- request side ------------------------------------------------------

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        _check_ids(reqs)
        if self._failed:
            raise ScorerError(f"scorer session failed: {self._failed}")
        if self._closed:
            raise ScorerError("scorer session is closed")
        sent: list[int] = []
        try:
            for req in reqs:
                self._wait(lambda: self._unanswered(sent) < self._window)
                payload = {
                    "id": req.request_id,
                    "src": req.src_text,
                    "hyp": req.hyp_text,
                }
                self._writer.write(json.dumps(payload, ensure_ascii=False) + "\n")
                self._writer.flush()
                sent.append(req.request_id)
            self._wait(lambda: self._unanswered(sent) == 0)
        except ScorerError:
            self._shutdown()
            raise
        except (BrokenPipeError, OSError) as exc:
            self._fail(f"transport error: {exc}")
            self._shutdown()
            raise ScorerError(f"scorer session failed: {self._failed}")
        with self._cond:
            return [
                ScoreResponse(r.request_id, self._replies.pop(r.request_id))
                for r in reqs
            ]

    def _unanswered(self, sent: Sequence[int]) -> int:
        # caller holds self._cond
        return sum(1 for i in sent if i not in self._replies)

    def _wait(self, done) -> None:
        with self._cond:
            ok = self._cond.wait_for(
                lambda: done() or self._failed is not None or self._eof,
                timeout=self._timeout,
            )
            if done():
                return
            if self._failed is None:
                self._failed = (
                    "timeout waiting for scorer reply"
                    if not ok
                    else "scorer closed the stream before answering all requests"
                )
        raise ScorerError(f"scorer session failed: {self._failed}")

    # -- shutdown ----------------------------------------------------------

    def close(self) -> None:
        """Close the write end; the scorer flushes remaining replies and exits."""
        if self._closed:
            return
        self._closed = True
        self._shutdown()
        if (
            self._proc is not None
            and self._failed is None
            and self._proc.returncode != 0
        ):
            raise ScorerError(f"scorer exited with status {self._proc.returncode}")

    def _shutdown(self) -> None:
        try:
            self._writer.close()
        except OSError:
            pass
        if self._sock is not None:
            # Closing the writer file object alone does not half-close the
            # socket; signal EOF explicitly so the scorer can drain and exit.
            try:
                self._sock.shutdown(socket.SHUT_WR)
            except OSError:
                pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=self._timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._reader_thread.join(timeout=self._timeout)
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
