"""Loss families evaluated on data shards.

Every loss is an empirical mean over one shard: logistic log-loss, unhalved
squared error, and canonical generalized linear models written as
``mean(-y*u + phi(u))`` with ``u = x @ theta``. All evaluations are plain
numpy; nothing here talks to the cluster or the ledger.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DataError

__all__ = [
    "DataShard",
    "Link",
    "LossModel",
    "LOGIT_LINK",
    "POISSON_LINK",
    "loss_value",
    "loss_gradient",
    "loss_value_gradient",
    "loss_hessian",
    "per_sample_gradients",
    "shard_to_csv",
    "shard_from_csv",
    "sigmoid",
    "softplus",
]


def softplus(u: np.ndarray) -> np.ndarray:
    """log(1 + exp(u)) without overflow; equals u + log1p(exp(-u)) for large u."""
    return np.logaddexp(0.0, u)


def sigmoid(u: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(-u)) evaluated on the non-overflowing branch for each sign."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


@dataclass(frozen=True)
class Link:
    """Canonical cumulant of a GLM family with its first two derivatives."""

    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    phi_prime: Callable[[np.ndarray], np.ndarray]
    phi_double: Callable[[np.ndarray], np.ndarray]
    binary_response: bool = False
    nonnegative_response: bool = False


LOGIT_LINK = Link(
    name="logit",
    phi=softplus,
    phi_prime=sigmoid,
    # sigmoid(u) * sigmoid(-u), each factor on its stable branch
    phi_double=lambda u: sigmoid(u) * sigmoid(-u),
    binary_response=True,
)

POISSON_LINK = Link(
    name="log",
    phi=np.exp,
    phi_prime=np.exp,
    phi_double=np.exp,
    nonnegative_response=True,
)

_LINKS = {"logit": LOGIT_LINK, "log": POISSON_LINK}


@dataclass(frozen=True)
class LossModel:
    """A loss family. Construct via :meth:`logistic`, :meth:`linear` or :meth:`glm`.

    ``logistic()`` is the GLM with the logit link; ``linear()`` is the unhalved
    squared error ``mean((y - u)**2)`` whose gradient therefore carries a
    factor 2.
    """

    family: str
    link: Link | None = field(default=None)

    @classmethod
    def logistic(cls) -> "LossModel":
        return cls(family="logistic", link=LOGIT_LINK)

    @classmethod
    def linear(cls) -> "LossModel":
        return cls(family="linear", link=None)

    @classmethod
    def glm(cls, link: Link | str) -> "LossModel":
        if isinstance(link, str):
            try:
                link = _LINKS[link]
            except KeyError:
                raise DataError(f"unknown link {link!r}; known: {sorted(_LINKS)}")
        return cls(family=f"glm-{link.name}", link=link)

    def validate_response(self, y: np.ndarray) -> None:
        if self.link is not None and self.link.binary_response:
            if not np.all((y == 0.0) | (y == 1.0)):
                raise DataError("binary-response loss requires labels in {0, 1}")
        if self.link is not None and self.link.nonnegative_response:
            if np.any(y < 0.0):
                raise DataError("count-response loss requires nonnegative labels")


@dataclass(frozen=True)
class DataShard:
    """An immutable (x, y) block of samples; one machine's local data.

    Arrays are cast to float64 and frozen. Rows are samples.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DataError(f"x must be (n, d) with n, d >= 1; got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise DataError(f"y must have shape ({x.shape[0]},); got {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("shard contains non-finite entries")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]


def _check_inputs(model: LossModel, theta: np.ndarray, shard: DataShard) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (shard.n_features,):
        raise DataError(
            f"theta has shape {theta.shape}; shard has {shard.n_features} features")
    if not np.all(np.isfinite(theta)):
        raise DataError("theta contains non-finite entries")
    model.validate_response(shard.y)
    return theta


def loss_value(model: LossModel, theta: np.ndarray, shard: DataShard) -> float:
    """Mean loss over the shard."""
    theta = _check_inputs(model, theta, shard)
    u = shard.x @ theta
    if model.family == "linear":
        r = shard.y - u
        return float(np.mean(r * r))
    link = model.link
    with np.errstate(over="ignore"):
        vals = -shard.y * u + link.phi(u)
    return float(np.mean(vals))


def loss_gradient(model: LossModel, theta: np.ndarray, shard: DataShard) -> np.ndarray:
    """Gradient of the mean loss; linear loss is unhalved so it carries a factor 2."""
    theta = _check_inputs(model, theta, shard)
    u = shard.x @ theta
    if model.family == "linear":
        resid = u - shard.y
        return (2.0 / shard.n_samples) * (shard.x.T @ resid)
    with np.errstate(over="ignore"):
        resid = model.link.phi_prime(u) - shard.y
    return (shard.x.T @ resid) / shard.n_samples


def loss_value_gradient(model: LossModel, theta: np.ndarray,
                        shard: DataShard) -> tuple[float, np.ndarray]:
    """Value and gradient in one pass over the data."""
    theta = _check_inputs(model, theta, shard)
    u = shard.x @ theta
    n = shard.n_samples
    if model.family == "linear":
        r = shard.y - u
        return float(np.mean(r * r)), (2.0 / n) * (shard.x.T @ (-r))
    link = model.link
    with np.errstate(over="ignore"):
        value = float(np.mean(-shard.y * u + link.phi(u)))
        resid = link.phi_prime(u) - shard.y
    return value, (shard.x.T @ resid) / n


def loss_hessian(model: LossModel, theta: np.ndarray, shard: DataShard) -> np.ndarray:
    """Hessian of the mean loss, a (d, d) symmetric matrix."""
    theta = _check_inputs(model, theta, shard)
    n = shard.n_samples
    if model.family == "linear":
        return (2.0 / n) * (shard.x.T @ shard.x)
    u = shard.x @ theta
    with np.errstate(over="ignore"):
        w = model.link.phi_double(u)
    return (shard.x * w[:, None]).T @ shard.x / n


def per_sample_gradients(model: LossModel, theta: np.ndarray,
                         shard: DataShard) -> np.ndarray:
    """(n, d) matrix whose i-th row is the gradient of sample i's loss term.

    The row mean equals :func:`loss_gradient` up to floating-point reduction
    order.
    """
    theta = _check_inputs(model, theta, shard)
    u = shard.x @ theta
    if model.family == "linear":
        resid = 2.0 * (u - shard.y)
    else:
        with np.errstate(over="ignore"):
            resid = model.link.phi_prime(u) - shard.y
    return shard.x * resid[:, None]


def shard_to_csv(shard: DataShard) -> str:
    """Serialize a shard as CSV text: header ``y,x_1..x_d``, shortest
    round-trip decimal literals, one sample per row."""
    d = shard.n_features
    buf = io.StringIO()
    buf.write("y," + ",".join(f"x_{j + 1}" for j in range(d)) + "\n")
    for i in range(shard.n_samples):
        row = [repr(float(shard.y[i]))]
        row.extend(repr(float(v)) for v in shard.x[i])
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def shard_from_csv(text: str) -> DataShard:
    """Parse :func:`shard_to_csv` output; exact inverse for finite float64 data."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    if len(lines) < 2:
        raise DataError("shard CSV needs a header and at least one data row")
    header = lines[0].split(",")
    if header[0] != "y" or len(header) < 2:
        raise DataError(f"unexpected shard CSV header: {lines[0]!r}")
    d = len(header) - 1
    n = len(lines) - 1
    y = np.empty(n)
    x = np.empty((n, d))
    for i, ln in enumerate(lines[1:]):
        parts = ln.split(",")
        if len(parts) != d + 1:
            raise DataError(f"row {i + 1} has {len(parts)} fields, expected {d + 1}")
        y[i] = float(parts[0])
        x[i] = [float(p) for p in parts[1:]]
    return DataShard(x=x, y=y)
