"""Socket transport for remote workers.

Wire format, little-endian throughout: each frame is a 1-byte opcode, a 4-byte
unsigned payload length, then the payload. Parameter vectors travel as raw
float64 bytes; shards travel as CSV text (see losses.shard_to_csv), which
round-trips float64 exactly.
"""

from __future__ import annotations

import socket
import struct
import threading

import numpy as np

from .errors import CslError, WorkerError
from .losses import DataShard, LossModel, loss_gradient, shard_from_csv, shard_to_csv
from .solvers import SolverSettings, minimize_shard_loss

__all__ = [
    "OP_LOAD_SHARD", "OP_EVAL_GRAD", "OP_GRAD_REPLY", "OP_LOCAL_MIN_REQ",
    "OP_LOCAL_MIN_REPLY", "OP_SHUTDOWN", "OP_ERROR",
    "pack_frame", "read_frame", "WorkerServer", "WorkerClient",
]

OP_LOAD_SHARD = 0x01
OP_EVAL_GRAD = 0x02
OP_GRAD_REPLY = 0x03
OP_LOCAL_MIN_REQ = 0x04
OP_LOCAL_MIN_REPLY = 0x05
OP_SHUTDOWN = 0x06
OP_ERROR = 0x7F

_HEADER = struct.Struct("<BI")
_MAX_PAYLOAD = 1 << 31  # sanity bound, far above anything this package sends


def pack_frame(opcode: int, payload: bytes = b"") -> bytes:
    if len(payload) >= _MAX_PAYLOAD:
        raise WorkerError(f"payload too large: {len(payload)} bytes")
    return _HEADER.pack(opcode, len(payload)) + payload


def _recv_exact(sock: socket.socket, nbytes: int) -> bytes:
    chunks = []
    remaining = nbytes
    while remaining > 0:
        chunk = sock.recv(min(remaining, 1 << 20))
        if not chunk:
            raise ConnectionError("peer closed the connection mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """Read one complete frame; raises ConnectionError on a truncated stream."""
    header = _recv_exact(sock, _HEADER.size)
    opcode, length = _HEADER.unpack(header)
    if length >= _MAX_PAYLOAD:
        raise ConnectionError(f"declared payload length {length} exceeds bound")
    payload = _recv_exact(sock, length) if length else b""
    return opcode, payload


def _encode_vector(vec: np.ndarray) -> bytes:
    return np.ascontiguousarray(vec, dtype="<f8").tobytes()


def _decode_vector(payload: bytes) -> np.ndarray:
    if len(payload) % 8 != 0 or len(payload) == 0:
        raise WorkerError(f"vector payload of {len(payload)} bytes is not a "
                          "nonempty multiple of 8")
    return np.frombuffer(payload, dtype="<f8").copy()


class WorkerServer:
    """One remote worker: holds a shard, serves gradient and local-fit requests.

    Connections are handled one at a time. A SHUTDOWN frame stops the server;
    a request that fails (no shard loaded, solver failure, unknown opcode) gets
    an error frame back and the connection is dropped, but the server keeps
    accepting.
    """

    def __init__(self, model: LossModel, host: str = "127.0.0.1", port: int = 0):
        self.model = model
        self._shard: DataShard | None = None
        self._listener = socket.create_server((host, port))
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._listener.getsockname()[:2]
        return host, port

    def start(self) -> "WorkerServer":
        """Serve on a daemon thread; returns self for chaining."""
        self._thread = threading.Thread(target=self.serve, daemon=True)
        self._thread.start()
        return self

    def serve(self) -> None:
        self._listener.settimeout(0.2)
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with conn:
                self._serve_connection(conn)
        self._listener.close()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None and self._thread.is_alive():
            self._thread.join(timeout=5.0)

    def _serve_connection(self, conn: socket.socket) -> None:
        while not self._stop.is_set():
            try:
                opcode, payload = read_frame(conn)
            except (ConnectionError, OSError):
                return
            try:
                reply = self._handle(opcode, payload)
            except Exception as exc:  # any failure becomes an error frame
                try:
                    conn.sendall(pack_frame(OP_ERROR, str(exc).encode("utf-8")))
                except OSError:
                    pass
                return
            if reply is not None:
                conn.sendall(reply)
            if opcode == OP_SHUTDOWN:
                self._stop.set()
                return

    def _handle(self, opcode: int, payload: bytes) -> bytes | None:
        if opcode not in (OP_LOAD_SHARD, OP_SHUTDOWN, OP_EVAL_GRAD, OP_LOCAL_MIN_REQ):
            raise CslError(f"unknown opcode 0x{opcode:02x}")
        if opcode == OP_LOAD_SHARD:
            self._shard = shard_from_csv(payload.decode("utf-8"))
            return None
        if opcode == OP_SHUTDOWN:
            return None
        if self._shard is None:
            raise CslError("no shard loaded")
        if opcode == OP_EVAL_GRAD:
            theta = _decode_vector(payload)
            grad = loss_gradient(self.model, theta, self._shard)
            return pack_frame(OP_GRAD_REPLY, _encode_vector(grad))
        if opcode == OP_LOCAL_MIN_REQ:
            if len(payload) != 8:
                raise CslError("local-min request payload must be one float64")
            (grad_tol,) = struct.unpack("<d", payload)
            settings = SolverSettings(grad_tol=grad_tol)
            theta = minimize_shard_loss(self.model, self._shard, settings)
            return pack_frame(OP_LOCAL_MIN_REPLY, _encode_vector(theta))
        raise AssertionError("unreachable")


class WorkerClient:
    """Client side of the worker protocol, used by the cluster coordinator."""

    def __init__(self, address: tuple[str, int], worker_index: int,
                 timeout: float = 60.0):
        self.worker_index = worker_index
        try:
            self._sock = socket.create_connection(address, timeout=timeout)
        except OSError as exc:
            raise WorkerError(f"worker {worker_index}: cannot connect to "
                              f"{address}: {exc}", worker=worker_index)

    def _send(self, opcode: int, payload: bytes = b"") -> None:
        try:
            self._sock.sendall(pack_frame(opcode, payload))
        except OSError as exc:
            raise WorkerError(f"worker {self.worker_index}: send failed: {exc}",
                              worker=self.worker_index)

    def _expect(self, opcode: int) -> bytes:
        try:
            got, payload = read_frame(self._sock)
        except (ConnectionError, OSError) as exc:
            raise WorkerError(f"worker {self.worker_index}: {exc}",
                              worker=self.worker_index)
        if got == OP_ERROR:
            raise WorkerError(
                f"worker {self.worker_index}: remote error: "
                f"{payload.decode('utf-8', 'replace')}", worker=self.worker_index)
        if got != opcode:
            raise WorkerError(f"worker {self.worker_index}: expected opcode "
                              f"0x{opcode:02x}, got 0x{got:02x}",
                              worker=self.worker_index)
        return payload

    def load_shard(self, shard: DataShard) -> None:
        self._send(OP_LOAD_SHARD, shard_to_csv(shard).encode("utf-8"))

    def send_gradient_request(self, theta: np.ndarray) -> None:
        self._send(OP_EVAL_GRAD, _encode_vector(theta))

    def recv_gradient(self) -> np.ndarray:
        return _decode_vector(self._expect(OP_GRAD_REPLY))

    def send_local_min_request(self, grad_tol: float) -> None:
        self._send(OP_LOCAL_MIN_REQ, struct.pack("<d", grad_tol))

    def recv_local_min(self) -> np.ndarray:
        return _decode_vector(self._expect(OP_LOCAL_MIN_REPLY))

    def shutdown(self) -> None:
        try:
            self._sock.sendall(pack_frame(OP_SHUTDOWN))
        except OSError:
            pass
        self.close()

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass
