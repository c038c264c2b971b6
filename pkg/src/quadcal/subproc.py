"""Client for external models speaking line-delimited JSON over pipes.

Protocol (one JSON object per line):
  -> {"hello": {"dimension": d}}        <- {"ok": {"output_dim": n}}
  -> {"eval": {"id": k, "points": [[...], ...]}}
                                        <- {"result": {"id": k, "values": [[...], ...]}}
  -> {"bye": {}}
"""

from __future__ import annotations

import json
import select
import subprocess

import numpy as np


class ProtocolError(RuntimeError):
    pass


class SubprocessModel:
    """Batch model evaluator backed by a worker subprocess."""

    def __init__(self, command, dimension: int, timeout: float = 300.0, name: str | None = None):
        self.command = list(command)
        self.dimension = dimension
        self.timeout = timeout
        self.name = name or self.command[0]
        self._next_id = 0
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        reply = self._roundtrip({"hello": {"dimension": dimension}})
        try:
            self.output_dim = int(reply["ok"]["output_dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"bad handshake reply: {reply!r}") from exc

    def _send(self, message: dict):
        if self._proc.poll() is not None:
            raise ProtocolError(
                f"worker exited with status {self._proc.returncode}"
            )
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError("worker pipe closed") from exc

    def _read_line(self) -> str:
        fd = self._proc.stdout
        ready, _, _ = select.select([fd], [], [], self.timeout)
        if not ready:
            raise ProtocolError(f"worker timed out after {self.timeout} s")
        line = fd.readline()
        if not line:
            status = self._proc.poll()
            raise ProtocolError(f"worker closed its output (exit status {status})")
        return line

    def _roundtrip(self, message: dict) -> dict:
        self._send(message)
        line = self._read_line()
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed worker reply: {line!r}") from exc

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[0] == 0:
            return np.empty((0, self.output_dim))
        if points.shape[1] != self.dimension:
            raise ProtocolError("point dimension mismatch")
        request_id = self._next_id
        self._next_id += 1
        reply = self._roundtrip(
            {"eval": {"id": request_id, "points": points.tolist()}}
        )
        try:
            result = reply["result"]
            if int(result["id"]) != request_id:
                raise ProtocolError(
                    f"reply id {result['id']} does not match request {request_id}"
                )
            values = np.asarray(result["values"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed eval reply: {reply!r}") from exc
        if values.shape != (points.shape[0], self.output_dim):
            raise ProtocolError(
                f"worker returned shape {values.shape}, expected "
                f"({points.shape[0]}, {self.output_dim})"
            )
        bad = ~np.all(np.isfinite(values), axis=1)
        if np.any(bad):
            idx = int(np.flatnonzero(bad)[0])
            raise ProtocolError(
                f"worker returned non-finite values at point index {idx}: "
                f"{points[idx].tolist()}"
            )
        return values

    def close(self):
        if self._proc.poll() is None:
            try:
                self._send({"bye": {}})
                self._proc.stdin.close()
            except ProtocolError:
                pass
            try:
                self._proc.wait(timeout=10.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
