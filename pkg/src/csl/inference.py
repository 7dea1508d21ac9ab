"""Plug-in covariance estimates and normal confidence intervals.

All three covariance estimates are sandwiches ``H^-1 V H^-1`` differing in
what data they may touch:

* sigma_global: pooled curvature and pooled per-sample score outer products
  (an oracle; it moves raw samples and is metered as such);
* sigma_local: host-shard curvature and host-shard surrogate scores, no
  communication at all;
* sigma_cross: host-shard curvature with the across-machine spread of shard
  gradients as the middle term, one gradient round.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cluster import Cluster
from .errors import DataError, SingularHessianError
from .losses import loss_hessian, per_sample_gradients
from .surrogate import SurrogateLoss

__all__ = [
    "normal_quantile", "sandwich",
    "sigma_global", "sigma_local", "sigma_cross",
    "ConfidenceIntervals", "confidence_intervals",
]

# Rational-approximation coefficients for the standard normal quantile
# (relative error below 1.2e-9 before refinement; one Halley step against
# erfc pushes the result to near machine precision).
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF on (0, 1), accurate to ~1e-15."""
    if not (0.0 < p < 1.0):
        raise DataError(f"quantile level must be in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Halley refinement against the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def sandwich(curvature: np.ndarray, middle: np.ndarray) -> np.ndarray:
    """curvature^-1 @ middle @ curvature^-1, symmetrized, via two solves."""
    curvature = np.asarray(curvature, dtype=np.float64)
    try:
        half = np.linalg.solve(curvature, middle)
        full = np.linalg.solve(curvature, half.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularHessianError(f"sandwich curvature is singular: {exc}")
    return 0.5 * (full + full.T)


def sigma_global(cluster: Cluster, theta: np.ndarray) -> np.ndarray:
    """Pooled-data sandwich at theta. Moves all raw samples to the
    coordinator (metered in samples_moved); intended as the reference the
    communication-free estimates are judged against."""
    pooled = cluster.pooled_shard(meter=True)
    theta = np.asarray(theta, dtype=np.float64)
    curvature = loss_hessian(cluster.model, theta, pooled)
    scores = per_sample_gradients(cluster.model, theta, pooled)
    middle = scores.T @ scores / pooled.n_samples
    return sandwich(curvature, middle)


def sigma_local(s: SurrogateLoss, theta: np.ndarray) -> np.ndarray:
    """Sandwich built entirely on the surrogate's host shard.

    Scores are per-sample surrogate gradients: each sample's loss gradient
    minus the stored correction vector. No ledger activity.
    """
    theta = np.asarray(theta, dtype=np.float64)
    curvature = loss_hessian(s.model, theta, s.shard)
    scores = per_sample_gradients(s.model, theta, s.shard) - s.correction
    middle = scores.T @ scores / s.shard.n_samples
    return sandwich(curvature, middle)


def sigma_cross(cluster: Cluster, theta: np.ndarray, host: int = 1) -> np.ndarray:
    """Sandwich whose middle term is the spread of whole-shard gradients:
    (n/k) * sum_j g_j g_j^T from one gradient round at theta.

    Consistent as k grows; with few machines the middle term is a k-sample
    covariance estimate, hence the warning below 10.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if cluster.k < 10:
        warnings.warn(f"sigma_cross with k={cluster.k} machines averages only "
                      f"{cluster.k} gradient outer products; estimates will be "
                      "noisy below k=10", UserWarning, stacklevel=2)
    local_grads = cluster.gradient_vectors_at(theta)
    n, k = cluster.n_per_shard, cluster.k
    middle = np.zeros((cluster.d, cluster.d))
    for g in local_grads:
        middle += np.outer(g, g)
    middle *= n / k
    curvature = loss_hessian(cluster.model, theta, cluster.shards[host - 1])
    return sandwich(curvature, middle)


@dataclass(frozen=True)
class ConfidenceIntervals:
    """Per-coordinate normal intervals ``center_i +- z * sqrt(cov_ii / n_total)``."""

    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    n_total: int

    @property
    def halfwidths(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def covers(self, truth: np.ndarray) -> np.ndarray:
        """Elementwise: does each interval contain the given coordinate?"""
        truth = np.asarray(truth, dtype=np.float64)
        return (self.lower <= truth) & (truth <= self.upper)


def confidence_intervals(center: np.ndarray, covariance: np.ndarray, n_total: int,
                         level: float = 0.95) -> ConfidenceIntervals:
    """Plug-in intervals from an asymptotic covariance of sqrt(n_total)-scaled
    estimates; the variance of the estimate itself is cov_ii / n_total."""
    center = np.asarray(center, dtype=np.float64)
    covariance = np.asarray(covariance, dtype=np.float64)
    if not (0.0 < level < 1.0):
        raise DataError(f"level must be in (0, 1), got {level}")
    if n_total < 1:
        raise DataError("n_total must be >= 1")
    diag = np.diag(covariance)
    if np.any(diag < 0.0):
        raise DataError("covariance has negative diagonal entries")
    z = normal_quantile(0.5 * (1.0 + level))
    half = z * np.sqrt(diag / n_total)
    return ConfidenceIntervals(center=center, lower=center - half,
                               upper=center + half, level=level, n_total=n_total)
