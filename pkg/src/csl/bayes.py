"""Surrogate-posterior sampling.

The surrogate posterior scores a parameter with the tilted local loss in
place of the pooled loss: log density = -N * surrogate(theta) + log prior.
Building it costs the usual single gradient round; afterwards a random-walk
Metropolis chain runs entirely on the coordinator. The pooled-loss posterior
is kept available as the oracle the surrogate chain is compared against.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cluster import CommLedger, Cluster
from .errors import CslError, DataError
from .estimators import ONE_STEP, ilea, subsample_estimator
from .losses import loss_hessian
from .solvers import SolverSettings
from .surrogate import SurrogateLoss, build_surrogate, surrogate_value

__all__ = [
    "Prior", "Chain", "McmcSettings", "metropolis",
    "surrogate_log_posterior", "full_log_posterior",
    "run_csl_bayes", "CslBayesResult", "marginal_l1",
    "chain_to_csv",
]


@dataclass(frozen=True)
class Prior:
    """Log prior density. Use the constructors; ``kind`` is one of
    "flat", "gaussian", "uniform_box"."""

    kind: str
    mean: np.ndarray | None = None
    sd: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @classmethod
    def flat(cls) -> "Prior":
        """Improper constant prior; log density 0 everywhere."""
        return cls(kind="flat")

    @classmethod
    def gaussian(cls, mean, sd) -> "Prior":
        mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        sd = np.atleast_1d(np.asarray(sd, dtype=np.float64))
        if sd.shape != mean.shape or np.any(sd <= 0.0):
            raise DataError("gaussian prior needs positive sd matching mean's shape")
        return cls(kind="gaussian", mean=mean, sd=sd)

    @classmethod
    def uniform_box(cls, lower, upper) -> "Prior":
        lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        if upper.shape != lower.shape or np.any(upper <= lower):
            raise DataError("uniform box needs upper > lower elementwise")
        return cls(kind="uniform_box", lower=lower, upper=upper)

    def log_density(self, theta: np.ndarray) -> float:
        """Exact log density (normalized for the proper priors); -inf outside
        the box prior's support."""
        theta = np.asarray(theta, dtype=np.float64)
        if self.kind == "flat":
            return 0.0
        if self.kind == "gaussian":
            z = (theta - self.mean) / self.sd
            return float(-0.5 * z @ z - np.log(self.sd).sum()
                         - 0.5 * theta.size * math.log(2.0 * math.pi))
        if self.kind == "uniform_box":
            if np.all((self.lower <= theta) & (theta <= self.upper)):
                return float(-np.log(self.upper - self.lower).sum())
            return -math.inf
        raise DataError(f"unknown prior kind {self.kind!r}")


@dataclass
class Chain:
    """Metropolis output: the state after each iteration (the start point is
    not a row), one acceptance flag per iteration, and the sampling knobs."""

    samples: np.ndarray
    accepted: np.ndarray
    proposal_scale: float
    burn_in: int
    seed: int

    @property
    def post_burn_in(self) -> np.ndarray:
        return self.samples[self.burn_in:]

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))


@dataclass(frozen=True)
class McmcSettings:
    iters: int = 20000
    proposal_scale: float | None = None
    seed: int = 0
    burn_in: int | None = None

    def __post_init__(self):
        if self.iters < 2:
            raise DataError("iters must be >= 2")
        if self.proposal_scale is not None and not (self.proposal_scale > 0.0):
            raise DataError("proposal_scale must be positive")
        if self.burn_in is not None and not (0 <= self.burn_in < self.iters):
            raise DataError("burn_in must be in [0, iters)")


def metropolis(log_target: Callable[[np.ndarray], float], theta0: np.ndarray,
               proposal_scale: float, iters: int, seed: int = 0,
               burn_in: int | None = None) -> Chain:
    """Random-walk Metropolis with an isotropic Gaussian proposal.

    Each iteration draws the proposal noise and the acceptance uniform in
    that fixed order regardless of the outcome, so a seed pins the whole
    trajectory. Acceptance is decided in log space; a log-density gain is
    accepted outright. burn_in defaults to half the iterations.
    """
    theta = np.array(theta0, dtype=np.float64)
    d = theta.shape[0]
    current = float(log_target(theta))
    if not math.isfinite(current):
        raise DataError("theta0 has non-finite log target")
    if burn_in is None:
        burn_in = iters // 2
    rng = np.random.default_rng(seed)
    samples = np.empty((iters, d))
    accepted = np.zeros(iters, dtype=bool)
    for t in range(iters):
        noise = rng.standard_normal(d) * proposal_scale
        unif = rng.uniform()
        proposal = theta + noise
        cand = float(log_target(proposal))
        if math.isnan(cand):
            raise CslError(f"log target returned NaN at iteration {t}")
        delta = cand - current
        if delta >= 0.0 or (unif > 0.0 and math.log(unif) < delta):
            theta = proposal
            current = cand
            accepted[t] = True
        samples[t] = theta
    return Chain(samples=samples, accepted=accepted,
                 proposal_scale=float(proposal_scale), burn_in=burn_in, seed=seed)


def surrogate_log_posterior(s: SurrogateLoss, prior: Prior, theta: np.ndarray,
                            n_total: int) -> float:
    """log density (up to a constant): -n_total * surrogate(theta) + log prior."""
    logp = prior.log_density(theta)
    if logp == -math.inf:
        return -math.inf
    return -float(n_total) * surrogate_value(s, theta) + logp


def full_log_posterior(cluster: Cluster, prior: Prior, theta: np.ndarray,
                       n_total: int | None = None) -> float:
    """Pooled-loss posterior, the oracle: -N * mean shard loss + log prior.

    Reads every retained shard, so it is exact but not communication-honest;
    use it for validation, not inside the protocol.
    """
    if n_total is None:
        n_total = cluster.n_total
    logp = prior.log_density(theta)
    if logp == -math.inf:
        return -math.inf
    values = cluster.local_loss_values(theta)
    acc = 0.0
    for v in values:
        acc += v
    return -float(n_total) * (acc / cluster.k) + logp


@dataclass
class CslBayesResult:
    chain: Chain
    anchor: np.ndarray
    surrogate: SurrogateLoss
    ledger_start: CommLedger
    ledger_end: CommLedger

    @property
    def vectors_spent(self) -> int:
        return self.ledger_end.vectors_sent - self.ledger_start.vectors_sent


def run_csl_bayes(cluster: Cluster, prior: Prior,
                  mcmc: McmcSettings = McmcSettings(), init_rounds: int = 3,
                  solver: SolverSettings = SolverSettings()) -> CslBayesResult:
    """End-to-end surrogate-posterior sampling.

    The anchor is produced communication-free on the coordinator's shard and
    sharpened by init_rounds one-step refits; the final surrogate build adds
    one more gradient round, for 2*(init_rounds + 1)*(k-1) vectors total.
    The default proposal scale is 2.4 / sqrt(d * N * hbar) with hbar the mean
    diagonal curvature at the anchor, a normal-approximation step size.
    """
    ledger_start = cluster.ledger.copy()
    start = subsample_estimator(cluster, solver)
    anchor = ilea(cluster, start, rounds=init_rounds, mode=ONE_STEP,
                  settings=solver).final
    surr = build_surrogate(cluster, anchor)
    n_total = cluster.n_total
    scale = mcmc.proposal_scale
    if scale is None:
        hbar = float(np.mean(np.diag(
            loss_hessian(cluster.model, anchor, surr.shard))))
        if hbar <= 0.0:
            raise DataError("cannot autoscale proposals: nonpositive curvature")
        scale = 2.4 / math.sqrt(cluster.d * n_total * hbar)

    def log_target(theta):
        return surrogate_log_posterior(surr, prior, theta, n_total)

    chain = metropolis(log_target, anchor, scale, mcmc.iters, seed=mcmc.seed,
                       burn_in=mcmc.burn_in)
    return CslBayesResult(chain=chain, anchor=anchor, surrogate=surr,
                          ledger_start=ledger_start, ledger_end=cluster.ledger.copy())


def _coordinate_samples(chain, coordinate: int) -> np.ndarray:
    if isinstance(chain, Chain):
        data = chain.post_burn_in
    else:
        data = np.asarray(chain, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if not (0 <= coordinate < data.shape[1]):
        raise DataError(f"coordinate {coordinate} out of range for d={data.shape[1]}")
    return data[:, coordinate]


def marginal_l1(chain_a, chain_b, coordinate: int = 0, bins: int = 60) -> float:
    """L1 distance in [0, 2] between two sampled marginals.

    Both samples are binned on the shared range spanned by the pooled 0.5 and
    99.5 percentiles; each histogram is normalized over that range. Chains are
    compared post burn-in; raw arrays are used as given.
    """
    if bins < 2:
        raise DataError("bins must be >= 2")
    xa = _coordinate_samples(chain_a, coordinate)
    xb = _coordinate_samples(chain_b, coordinate)
    if xa.size == 0 or xb.size == 0:
        raise DataError("cannot compare empty sample sets")
    pooled = np.concatenate([xa, xb])
    lo, hi = np.percentile(pooled, [0.5, 99.5])
    if not hi > lo:
        # Degenerate spread; any common width puts equal constants in one bin.
        lo, hi = lo - 0.5, hi + 0.5
    counts_a, _ = np.histogram(xa, bins=bins, range=(lo, hi))
    counts_b, _ = np.histogram(xb, bins=bins, range=(lo, hi))
    total_a, total_b = counts_a.sum(), counts_b.sum()
    if total_a == 0 or total_b == 0:
        return 2.0
    return float(np.abs(counts_a / total_a - counts_b / total_b).sum())


def chain_to_csv(chain: Chain) -> str:
    """Serialize a chain: header ``iter,accepted,theta_1..theta_d``, one row
    per iteration, shortest round-trip decimals."""
    d = chain.samples.shape[1]
    buf = io.StringIO()
    buf.write("iter,accepted," + ",".join(f"theta_{j + 1}" for j in range(d)) + "\n")
    for t in range(chain.samples.shape[0]):
        row = [str(t + 1), "1" if chain.accepted[t] else "0"]
        row.extend(repr(float(v)) for v in chain.samples[t])
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
