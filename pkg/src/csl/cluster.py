"""A coordinator plus k equal-size data shards, with exact communication accounting.

Worker 1 is the coordinator's own shard and never pays for communication.
The ledger counts d-dimensional vector payloads crossing machine boundaries:

* gradient round: broadcast theta to workers 2..k and collect their replies,
  2*(k-1) vectors;
* local-minimizer round: requests carry only a scalar tolerance, so just the
  k-1 reply vectors count;
* at k=1 nothing crosses a boundary and the ledger does not move.

Raw-sample movement (pooling all data on one machine for baselines) is metered
separately in ``samples_moved`` rather than being converted into vectors.

Transport is "in_process" (default) or "tcp", in which case workers 2..k are
:class:`~csl.transport.WorkerServer` processes reached through the frame
protocol. Shard contents are retained locally in both modes so that
surrogate construction can evaluate local losses at the coordinator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .losses import DataShard, LossModel, loss_gradient, loss_value
from .solvers import SolverSettings, minimize_shard_loss
from .transport import WorkerClient, WorkerServer

__all__ = ["CommLedger", "Cluster", "split_rows"]


@dataclass
class CommLedger:
    """Running communication totals for one cluster."""

    vectors_sent: int = 0
    rounds: int = 0
    samples_moved: int = 0

    def copy(self) -> "CommLedger":
        return CommLedger(self.vectors_sent, self.rounds, self.samples_moved)

    def bits_sent(self, d: int) -> int:
        """Vector traffic in bits, at 64 bits per float64 coordinate."""
        return 64 * d * self.vectors_sent


def split_rows(x: np.ndarray, y: np.ndarray, k: int) -> list[DataShard]:
    """Split pooled rows into k equal consecutive blocks, one shard each."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if k < 1:
        raise DataError("k must be >= 1")
    n_total = x.shape[0]
    if n_total % k != 0:
        raise DataError(f"cannot split {n_total} samples into {k} equal shards")
    n = n_total // k
    return [DataShard(x=x[j * n:(j + 1) * n], y=y[j * n:(j + 1) * n])
            for j in range(k)]


class Cluster:
    """k machines holding equal shards of one dataset, with a shared ledger."""

    def __init__(self, model: LossModel, shards: list[DataShard],
                 transport: str = "in_process",
                 addresses: list[tuple[str, int]] | None = None):
        if len(shards) < 1:
            raise DataError("a cluster needs at least one shard")
        n = shards[0].n_samples
        d = shards[0].n_features
        for j, shard in enumerate(shards):
            if shard.n_samples != n:
                raise DataError(f"shard {j + 1} has {shard.n_samples} samples, "
                                f"expected {n} (shards must be equal size)")
            if shard.n_features != d:
                raise DataError(f"shard {j + 1} has {shard.n_features} features, "
                                f"expected {d}")
            model.validate_response(shard.y)
        self.model = model
        self.shards = tuple(shards)
        self.ledger = CommLedger()
        self._clients: list[WorkerClient] = []
        self._owned_servers: list[WorkerServer] = []
        if transport == "in_process":
            pass
        elif transport == "tcp":
            self._connect_workers(addresses)
        else:
            raise ConfigError(f"unknown transport {transport!r}; "
                              "use 'in_process' or 'tcp'")
        self.transport = transport

    def _connect_workers(self, addresses) -> None:
        k = len(self.shards)
        if addresses is None:
            # Self-hosted loopback workers, one daemon thread each.
            for _ in range(k - 1):
                self._owned_servers.append(WorkerServer(self.model).start())
            addresses = [srv.address for srv in self._owned_servers]
        if len(addresses) != k - 1:
            raise ConfigError(f"need {k - 1} worker addresses for k={k}, "
                              f"got {len(addresses)}")
        for j, addr in enumerate(addresses):
            client = WorkerClient(addr, worker_index=j + 2)
            client.load_shard(self.shards[j + 1])
            self._clients.append(client)

    @classmethod
    def from_pooled(cls, model: LossModel, x: np.ndarray, y: np.ndarray, k: int,
                    transport: str = "in_process",
                    addresses: list[tuple[str, int]] | None = None) -> "Cluster":
        return cls(model, split_rows(x, y, k), transport, addresses)

    @property
    def k(self) -> int:
        return len(self.shards)

    @property
    def d(self) -> int:
        return self.shards[0].n_features

    @property
    def n_per_shard(self) -> int:
        return self.shards[0].n_samples

    @property
    def n_total(self) -> int:
        return self.n_per_shard * self.k

    def _gather_gradients(self, theta: np.ndarray) -> list[np.ndarray]:
        """Local gradients in worker order; no ledger activity here."""
        theta = np.asarray(theta, dtype=np.float64)
        if not np.all(np.isfinite(theta)):
            raise DataError("theta contains non-finite entries")
        for client in self._clients:
            client.send_gradient_request(theta)
        grads = [loss_gradient(self.model, theta, self.shards[0])]
        if self._clients:
            grads.extend(client.recv_gradient() for client in self._clients)
        else:
            grads.extend(loss_gradient(self.model, theta, shard)
                         for shard in self.shards[1:])
        return grads

    def _meter(self, vectors: int) -> None:
        if self.k > 1:
            self.ledger.vectors_sent += vectors
            self.ledger.rounds += 1

    def gradient_round(self, theta: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Broadcast theta, gather the k local gradients, average in worker order.

        Returns (global gradient, local gradients). Costs 2*(k-1) vectors.
        """
        locals_ = self._gather_gradients(theta)
        self._meter(2 * (self.k - 1))
        acc = np.zeros(self.d)
        for g in locals_:
            acc += g
        return acc / self.k, locals_

    def gradient_vectors_at(self, theta: np.ndarray) -> list[np.ndarray]:
        """The k local gradients at theta, unaveraged; ledgered as one
        gradient round (2*(k-1) vectors)."""
        locals_ = self._gather_gradients(theta)
        self._meter(2 * (self.k - 1))
        return locals_

    def local_minimizer_round(self, settings: SolverSettings = SolverSettings()
                              ) -> list[np.ndarray]:
        """Each worker minimizes its own shard loss from zero; k-1 reply vectors.

        Over tcp only the gradient tolerance travels in the request, so remote
        fits run with default budgets at that tolerance.
        """
        for client in self._clients:
            client.send_local_min_request(settings.grad_tol)
        fits = [minimize_shard_loss(self.model, self.shards[0], settings)]
        if self._clients:
            fits.extend(client.recv_local_min() for client in self._clients)
        else:
            fits.extend(minimize_shard_loss(self.model, shard, settings)
                        for shard in self.shards[1:])
        self._meter(self.k - 1)
        return fits

    def local_loss_values(self, theta: np.ndarray) -> list[float]:
        """Per-shard loss values from the retained local copies (no ledger);
        a diagnostic, not a protocol message."""
        return [loss_value(self.model, theta, shard) for shard in self.shards]

    def pooled_shard(self, meter: bool = True) -> DataShard:
        """All samples on one machine, in worker order. Moves (k-1)*n raw
        samples when metered; vector counts are unaffected."""
        if meter and self.k > 1:
            self.ledger.samples_moved += (self.k - 1) * self.n_per_shard
        x = np.concatenate([s.x for s in self.shards], axis=0)
        y = np.concatenate([s.y for s in self.shards], axis=0)
        return DataShard(x=x, y=y)

    def comm_report(self) -> dict:
        """Ledger snapshot plus derived traffic in bits."""
        return {
            "k": self.k,
            "d": self.d,
            "n_per_shard": self.n_per_shard,
            "vectors_sent": self.ledger.vectors_sent,
            "rounds": self.ledger.rounds,
            "samples_moved": self.ledger.samples_moved,
            "bits_sent": self.ledger.bits_sent(self.d),
        }

    def close(self) -> None:
        for client in self._clients:
            client.shutdown()
        self._clients = []
        for server in self._owned_servers:
            server.stop()
        self._owned_servers = []

    def __enter__(self) -> "Cluster":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
