"""Experiment orchestration: synthetic sweeps, results CSV, summaries.

Each experiment loops over sweep points and trials, generates fresh data per
trial from a derived RNG stream, runs a fixed estimator set, and appends tidy
rows ``experiment,d,n,k,trial,estimator,metric,value``. Trials run
sequentially and flush as they finish, so a config plus a seed pins the
output bytes; wall-clock rows are advisory and excluded from the results
hash. Estimator failures inside a trial become ``error_flag`` rows and the
run continues.
"""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bayes import McmcSettings, Prior, full_log_posterior, marginal_l1, metropolis, run_csl_bayes
from .cluster import Cluster
from .datagen import derive_rng, gen_logistic, gen_sparse_linear
from .errors import ConfigError, CslError, DataError
from .estimators import ONE_STEP, SolverSettings, averaging_estimator, ilea, subsample_estimator
from .inference import confidence_intervals, sigma_cross, sigma_local
from .losses import LossModel
from .solvers import minimize_shard_loss
from .sparse import L1Settings, averaging_lasso, csl_lasso, lambda_heuristic, local_lasso
from .surrogate import build_surrogate

__all__ = [
    "EXPERIMENTS", "RESULTS_HEADER", "RUNTIME_METRICS", "ExperimentConfig",
    "config_from_mapping", "parse_config_text", "run_experiment", "RunResult",
    "results_hash", "report", "desk_presets", "paper_presets",
]

EXPERIMENTS = ("MestSweepN", "MestSweepK", "Coverage", "LassoFixedN",
               "LassoFixedn", "Bayes")
# The two lasso names differ only in the final letter's case, so aliasing is
# exact-match plus these unambiguous longhands.
_ALIASES = {
    "mestsweepn": "MestSweepN",
    "mestsweepk": "MestSweepK",
    "coverage": "Coverage",
    "bayes": "Bayes",
    "lasso_fixed_total": "LassoFixedN",
    "lasso_fixed_shard": "LassoFixedn",
}

RESULTS_HEADER = ("experiment", "d", "n", "k", "trial", "estimator", "metric", "value")
RUNTIME_METRICS = frozenset({"runtime_s"})


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int
    n_values: tuple[int, ...]
    k_values: tuple[int, ...] = (16,)
    n_total: int | None = None
    trials: int = 10
    seed: int = 0
    out: str | None = None
    level: float = 0.95
    rounds: int = 3
    mcmc_iters: int = 20000
    # Sturges' rule at the default chain length (1e4 kept draws); a finer
    # histogram only raises the floor of the two-chain distance estimate.
    bins: int = 15
    s: int = 10
    sigma: float = 1.0
    lam_scale: float = 2.0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            canonical = _ALIASES.get(self.experiment.lower())
            if canonical is None:
                raise ConfigError(f"unknown experiment {self.experiment!r}; "
                                  f"valid: {', '.join(EXPERIMENTS)}")
            object.__setattr__(self, "experiment", canonical)
        if self.d < 1 or self.trials < 1 or self.rounds < 1:
            raise ConfigError("d, trials and rounds must be >= 1")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n must be a nonempty list of positive ints")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ConfigError("k must be a nonempty list of positive ints")
        if self.n_total is not None and self.n_total < 1:
            raise ConfigError("n_total must be positive")
        if not (0.0 < self.level < 1.0):
            raise ConfigError("level must be in (0, 1)")
        if self.mcmc_iters < 2 or self.bins < 2:
            raise ConfigError("mcmc_iters and bins must be >= 2")
        if self.experiment.startswith("Lasso") and not (0 <= self.s <= self.d):
            raise ConfigError("s must be in [0, d]")
        if self.sigma < 0.0:
            raise ConfigError("sigma must be >= 0")
        if self.lam_scale <= 0.0:
            raise ConfigError("lam_scale must be positive")

    @property
    def out_path(self) -> Path:
        if self.out is not None:
            return Path(self.out)
        return Path(f"results_{self.experiment}.csv")


_INT_KEYS = {"d", "n_total", "trials", "seed", "rounds", "mcmc_iters", "bins", "s"}
_INT_LIST_KEYS = {"n", "k"}
_FLOAT_KEYS = {"level", "sigma", "lam_scale"}
_STR_KEYS = {"experiment", "out"}
_ALL_KEYS = _INT_KEYS | _INT_LIST_KEYS | _FLOAT_KEYS | _STR_KEYS


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; later keys win."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip().lower()] = value.strip()
    return mapping


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    """Build a validated config from string key/values (file or CLI flags)."""
    unknown = set(mapping) - _ALL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}; "
                          f"valid: {', '.join(sorted(_ALL_KEYS))}")
    if "experiment" not in mapping:
        raise ConfigError("config must set 'experiment'")
    kwargs: dict = {"experiment": mapping["experiment"]}
    try:
        for key in _INT_KEYS & set(mapping):
            kwargs[key] = int(mapping[key])
        for key in _FLOAT_KEYS & set(mapping):
            kwargs[key] = float(mapping[key])
        if "n" in mapping:
            kwargs["n_values"] = tuple(int(v) for v in mapping["n"].split(",") if v.strip())
        if "k" in mapping:
            kwargs["k_values"] = tuple(int(v) for v in mapping["k"].split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}")
    if "out" in mapping:
        kwargs["out"] = mapping["out"]
    if "n_values" not in kwargs:
        canonical = _ALIASES.get(kwargs["experiment"].lower(), kwargs["experiment"])
        n_total = kwargs.get("n_total")
        if canonical == "LassoFixedN" and n_total:
            # per-shard sizes are fully determined by the fixed total
            ks = kwargs.get("k_values", (16,))
            kwargs["n_values"] = tuple(dict.fromkeys(n_total // k for k in ks))
        else:
            raise ConfigError("config must set 'n' (one value or a comma list)")
    return ExperimentConfig(**kwargs)


@dataclass
class RunResult:
    path: Path
    rows_written: int
    error_flags: int


class _Emitter:
    """Serialized row appender: validates, writes, flushes per trial."""

    def __init__(self, path: Path, config: ExperimentConfig):
        self.config = config
        self.path = path
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(RESULTS_HEADER)
        self.rows_written = 0
        self.error_flags = 0

    def emit(self, n: int, k: int, trial: int, estimator: str, metric: str, value) -> None:
        value = float(value)
        if not math.isfinite(value):
            raise CslError(f"non-finite value for metric {metric!r}")
        self._writer.writerow([self.config.experiment, self.config.d, n, k,
                               trial, estimator, metric, repr(value)])
        self.rows_written += 1
        if metric == "error_flag":
            self.error_flags += 1

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _sq_error(theta: np.ndarray, theta_star: np.ndarray) -> float:
    diff = np.asarray(theta) - theta_star
    return float(diff @ diff)


def _chain_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 63 - 1))


def _mest_trial(config: ExperimentConfig, emitter: _Emitter, n: int, k: int,
                trial: int) -> None:
    rng = derive_rng(config.seed, config.experiment, n, k, trial, "data")
    pooled, theta_star = gen_logistic(config.d, n * k, rng)
    cluster = Cluster.from_pooled(LossModel.logistic(), pooled.x, pooled.y, k)
    solver = SolverSettings()
    start = time.perf_counter()

    ledger0 = cluster.ledger.copy()
    theta_global = minimize_shard_loss(cluster.model, cluster.pooled_shard(meter=True), solver)
    emitter.emit(n, k, trial, "global", "sq_error", _sq_error(theta_global, theta_star))
    emitter.emit(n, k, trial, "global", "samples_moved",
                 cluster.ledger.samples_moved - ledger0.samples_moved)
    emitter.emit(n, k, trial, "global", "vectors_sent", 0)

    theta_sub = subsample_estimator(cluster, solver)
    emitter.emit(n, k, trial, "subsample", "sq_error", _sq_error(theta_sub, theta_star))
    emitter.emit(n, k, trial, "subsample", "vectors_sent", 0)

    ledger0 = cluster.ledger.copy()
    theta_avg = averaging_estimator(cluster, solver)
    averaging_cost = cluster.ledger.vectors_sent - ledger0.vectors_sent
    emitter.emit(n, k, trial, "averaging", "sq_error", _sq_error(theta_avg, theta_star))
    emitter.emit(n, k, trial, "averaging", "vectors_sent", averaging_cost)

    trajectory = ilea(cluster, theta_avg, rounds=config.rounds, mode=ONE_STEP,
                      settings=solver)
    per_round = trajectory.vectors_spent // max(1, trajectory.rounds)
    for t in range(1, trajectory.rounds + 1):
        emitter.emit(n, k, trial, f"csl_{t}", "sq_error",
                     _sq_error(trajectory.iterates[t], theta_star))
        emitter.emit(n, k, trial, f"csl_{t}", "vectors_sent",
                     averaging_cost + per_round * t)

    emitter.emit(n, k, trial, "trial", "runtime_s", time.perf_counter() - start)


def _coverage_trial(config: ExperimentConfig, emitter: _Emitter, n: int, k: int,
                    trial: int) -> None:
    rng = derive_rng(config.seed, config.experiment, n, k, trial, "data")
    pooled, theta_star = gen_logistic(config.d, n * k, rng)
    cluster = Cluster.from_pooled(LossModel.logistic(), pooled.x, pooled.y, k)
    solver = SolverSettings()
    start = time.perf_counter()

    theta_avg = averaging_estimator(cluster, solver)
    center = ilea(cluster, theta_avg, rounds=config.rounds, mode=ONE_STEP,
                  settings=solver).final
    emitter.emit(n, k, trial, "csl", "sq_error", _sq_error(center, theta_star))

    surr = build_surrogate(cluster, center)
    n_total = cluster.n_total
    ci_local = confidence_intervals(center, sigma_local(surr, center), n_total,
                                    level=config.level)
    emitter.emit(n, k, trial, "csl", "covered_local",
                 float(ci_local.covers(theta_star)[0]))
    emitter.emit(n, k, trial, "csl", "halfwidth_local", ci_local.halfwidths[0])

    ci_cross = confidence_intervals(center, sigma_cross(cluster, center), n_total,
                                    level=config.level)
    emitter.emit(n, k, trial, "csl", "covered_cross",
                 float(ci_cross.covers(theta_star)[0]))
    emitter.emit(n, k, trial, "csl", "halfwidth_cross", ci_cross.halfwidths[0])

    emitter.emit(n, k, trial, "csl", "vectors_sent", cluster.ledger.vectors_sent)
    emitter.emit(n, k, trial, "trial", "runtime_s", time.perf_counter() - start)


def _refit_on_support(shard, theta: np.ndarray) -> np.ndarray:
    """Least-squares refit of ``theta`` on its nonzero coordinates.

    A penalized anchor carries shrinkage bias, and that bias leaks straight
    into the surrogate's linear correction where no amount of pooled data can
    wash it out. The refit removes most of it using only the host shard, so it
    costs nothing on the wire. Falls back to ``theta`` when the support is
    empty or wider than the shard can identify.
    """
    support = np.flatnonzero(theta)
    if support.size == 0 or support.size >= shard.x.shape[0]:
        return theta
    coef, *_ = np.linalg.lstsq(shard.x[:, support], shard.y, rcond=None)
    refit = np.zeros_like(theta)
    refit[support] = coef
    return refit


def _lasso_trial(config: ExperimentConfig, emitter: _Emitter, n: int, k: int,
                 trial: int) -> None:
    rng = derive_rng(config.seed, config.experiment, n, k, trial, "data")
    shards, theta_star = gen_sparse_linear(config.d, n, k, config.s, config.sigma, rng)
    cluster = Cluster(LossModel.linear(), shards)
    settings = L1Settings()
    start = time.perf_counter()
    # The generator's noise level is known here, so the penalty levels use it
    # directly, as the estimators' documented defaults would estimate it.
    sigma = config.sigma if config.sigma > 0.0 else 1e-3
    lam_local = lambda_heuristic(sigma, config.d, n)
    # The surrogate's penalty must stay above the anchor-driven contamination
    # of its gradient, which does not shrink with k; lam_scale is the knob that
    # keeps it there (the sweep presets pin a measured value).
    lam_global = lambda_heuristic(sigma, config.d, n * k, scale=config.lam_scale)

    def emit_fit(label: str, fit, vectors: int) -> None:
        emitter.emit(n, k, trial, label, "sq_error", _sq_error(fit.theta, theta_star))
        emitter.emit(n, k, trial, label, "support_size", fit.sparsity)
        emitter.emit(n, k, trial, label, "converged", float(fit.converged))
        emitter.emit(n, k, trial, label, "vectors_sent", vectors)

    pooled = cluster.pooled_shard(meter=True)
    emit_fit("global_lasso", local_lasso(cluster.model, pooled, lam=lam_global,
                                         settings=settings), 0)

    anchor_fit = local_lasso(cluster.model, cluster.shards[0], lam=lam_local,
                             settings=settings)
    emit_fit("subsample_lasso", anchor_fit, 0)

    anchor = _refit_on_support(cluster.shards[0], anchor_fit.theta)
    ledger0 = cluster.ledger.copy()
    csl_fit = csl_lasso(cluster, anchor=anchor, lam=lam_global,
                        settings=settings)
    emit_fit("csl_lasso", csl_fit, cluster.ledger.vectors_sent - ledger0.vectors_sent)

    ledger0 = cluster.ledger.copy()
    avg_fit = averaging_lasso(cluster, lam=lam_local, settings=settings)
    emit_fit("averaging_lasso", avg_fit,
             cluster.ledger.vectors_sent - ledger0.vectors_sent)

    emitter.emit(n, k, trial, "trial", "runtime_s", time.perf_counter() - start)


def _bayes_trial(config: ExperimentConfig, emitter: _Emitter, n: int, k: int,
                 trial: int) -> None:
    rng = derive_rng(config.seed, config.experiment, n, k, trial, "data")
    pooled, _ = gen_logistic(config.d, n * k, rng)
    cluster = Cluster.from_pooled(LossModel.logistic(), pooled.x, pooled.y, k)
    # Chain randomness is keyed on the trial but not on n, so the sweep reads
    # the same proposal streams at every n (a paired design): the Monte Carlo
    # noise of the distance estimate then cancels in across-n comparisons
    # instead of masking the trend. Data stays independent across cells.
    seeds = derive_rng(config.seed, config.experiment, k, trial, "chains")
    chain_seed = _chain_seed(seeds)
    start = time.perf_counter()

    result = run_csl_bayes(cluster, Prior.flat(),
                           McmcSettings(iters=config.mcmc_iters,
                                        seed=chain_seed))
    emitter.emit(n, k, trial, "csl_bayes", "vectors_sent", result.vectors_spent)
    emitter.emit(n, k, trial, "csl_bayes", "accept_rate",
                 result.chain.acceptance_rate)

    # Oracle chain on the pooled posterior: same start, step size and proposal
    # stream as the surrogate chain (common random numbers). Coupled chains
    # only drift apart where the two targets genuinely disagree, so the
    # histogram distance reads the posterior gap instead of the two chains'
    # independent sampling noise, which at this chain length would swamp it.
    # Pooled evaluation is the fast equivalent of the mean-of-shards oracle;
    # it is diagnostic, not protocol traffic.
    pooled_for_oracle = cluster.pooled_shard(meter=False)
    prior = Prior.flat()
    n_total = cluster.n_total
    oracle_cluster = Cluster(cluster.model, [pooled_for_oracle])

    def oracle_target(theta):
        return full_log_posterior(oracle_cluster, prior, theta, n_total)

    full_chain = metropolis(oracle_target, result.anchor,
                            result.chain.proposal_scale, config.mcmc_iters,
                            seed=chain_seed)
    emitter.emit(n, k, trial, "full_bayes", "accept_rate",
                 full_chain.acceptance_rate)
    for coord in range(config.d):
        emitter.emit(n, k, trial, "csl_bayes", f"marginal_l1_{coord + 1}",
                     marginal_l1(result.chain, full_chain, coordinate=coord,
                                 bins=config.bins))
    emitter.emit(n, k, trial, "trial", "runtime_s", time.perf_counter() - start)


def _sweep_points(config: ExperimentConfig) -> list[tuple[int, int]]:
    """(n, k) grid for the experiment, honoring the fixed-total variants."""
    if config.experiment == "MestSweepN":
        if config.n_total is None:
            raise ConfigError("MestSweepN needs n_total")
        points = []
        for n in config.n_values:
            if config.n_total % n != 0:
                raise ConfigError(f"n_total={config.n_total} not divisible by n={n}")
            points.append((n, config.n_total // n))
        return points
    if config.experiment == "LassoFixedN":
        if config.n_total is None:
            raise ConfigError("LassoFixedN needs n_total")
        points = []
        for k in config.k_values:
            if config.n_total % k != 0:
                raise ConfigError(f"n_total={config.n_total} not divisible by k={k}")
            points.append((config.n_total // k, k))
        return points
    if config.experiment in ("LassoFixedn", "Bayes", "Coverage", "MestSweepK"):
        return [(n, k) for n in config.n_values for k in config.k_values]
    raise ConfigError(f"unhandled experiment {config.experiment!r}")


_TRIAL_RUNNERS = {
    "MestSweepN": _mest_trial,
    "MestSweepK": _mest_trial,
    "Coverage": _coverage_trial,
    "LassoFixedN": _lasso_trial,
    "LassoFixedn": _lasso_trial,
    "Bayes": _bayes_trial,
}


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Run every (sweep point, trial) cell and write the results CSV.

    A failing trial leaves an ``error_flag`` row instead of aborting the run;
    the returned RunResult counts those flags so callers can report partial
    failure.
    """
    runner = _TRIAL_RUNNERS[config.experiment]
    points = _sweep_points(config)
    path = config.out_path
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    emitter = _Emitter(path, config)
    try:
        for n, k in points:
            for trial in range(1, config.trials + 1):
                try:
                    runner(config, emitter, n, k, trial)
                except CslError:
                    emitter.emit(n, k, trial, "trial", "error_flag", 1.0)
                emitter.flush()
    finally:
        emitter.close()
    return RunResult(path=path, rows_written=emitter.rows_written,
                     error_flags=emitter.error_flags)


def _read_rows(path) -> list[dict[str, str]]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read results file: {exc}")
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(RESULTS_HEADER):
            raise ConfigError(f"{path}: unexpected header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RESULTS_HEADER):
                raise ConfigError(f"{path} line {lineno}: expected "
                                  f"{len(RESULTS_HEADER)} fields, got {len(row)}")
            record = dict(zip(RESULTS_HEADER, row))
            try:
                value = float(record["value"])
            except ValueError:
                raise ConfigError(f"{path} line {lineno}: bad value {record['value']!r}")
            if not math.isfinite(value):
                raise ConfigError(f"{path} line {lineno}: non-finite value")
            rows.append(record)
        return rows


def results_hash(path) -> str:
    """sha256 over the results rows with runtime metrics dropped; row order
    and float formatting are part of the hash."""
    digest = hashlib.sha256()
    digest.update(",".join(RESULTS_HEADER).encode())
    for record in _read_rows(path):
        if record["metric"] in RUNTIME_METRICS:
            continue
        digest.update(b"\n")
        digest.update(",".join(record[col] for col in RESULTS_HEADER).encode())
    return digest.hexdigest()


def report(results_path, out_dir=None) -> tuple[list[dict], list[Path]]:
    """Summarize a results CSV: median and MAD per (sweep point, estimator,
    metric), written to summary.csv plus one tidy file per experiment/metric
    pair for plotting.
    """
    results_path = Path(results_path)
    out_dir = Path(out_dir) if out_dir is not None else results_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _read_rows(results_path)
    groups: dict[tuple, list[float]] = {}
    for record in rows:
        key = (record["experiment"], record["d"], record["n"], record["k"],
               record["estimator"], record["metric"])
        groups.setdefault(key, []).append(float(record["value"]))
    summary = []
    for key in groups:
        values = groups[key]
        med = statistics.median(values)
        mad = statistics.median([abs(v - med) for v in values])
        summary.append({
            "experiment": key[0], "d": key[1], "n": key[2], "k": key[3],
            "estimator": key[4], "metric": key[5], "count": len(values),
            "median": med, "mad": mad,
        })
    summary.sort(key=lambda r: (r["experiment"], r["metric"], r["estimator"],
                                int(r["d"]), int(r["n"]), int(r["k"])))
    written: list[Path] = []
    summary_path = out_dir / "summary.csv"
    cols = ["experiment", "d", "n", "k", "estimator", "metric", "count",
            "median", "mad"]
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in summary:
            writer.writerow([row[c] for c in cols])
    written.append(summary_path)
    pairs = sorted({(r["experiment"], r["metric"]) for r in summary})
    for experiment, metric in pairs:
        tidy_path = out_dir / f"{experiment}_{metric}.csv"
        with open(tidy_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "n", "k", "estimator", "count", "median", "mad"])
            for row in summary:
                if row["experiment"] == experiment and row["metric"] == metric:
                    writer.writerow([row["d"], row["n"], row["k"], row["estimator"],
                                     row["count"], row["median"], row["mad"]])
        written.append(tidy_path)
    return summary, written


def desk_presets() -> dict[str, ExperimentConfig]:
    """Desk-scale sweeps: minutes, not hours; the acceptance suite's shapes."""
    return {
        "sweep_n_desk": ExperimentConfig(
            experiment="MestSweepN", d=10, n_total=2 ** 16,
            n_values=(2 ** 8, 2 ** 9, 2 ** 10, 2 ** 11, 2 ** 12), trials=20),
        "sweep_k_desk": ExperimentConfig(
            experiment="MestSweepK", d=10, n_values=(256,), k_values=(16, 64, 256),
            trials=20),
        "coverage_desk": ExperimentConfig(
            experiment="Coverage", d=5, n_values=(2 ** 11,), k_values=(16, 64),
            trials=200),
        "lasso_total_desk": ExperimentConfig(
            experiment="LassoFixedN", d=1000, n_total=6400, n_values=(400,),
            k_values=(1, 2, 4, 8, 16), trials=10, lam_scale=3.0),
        "lasso_shard_desk": ExperimentConfig(
            experiment="LassoFixedn", d=1000, n_values=(400,),
            k_values=(1, 2, 4, 8, 16), trials=10, lam_scale=3.0),
        "bayes_desk": ExperimentConfig(
            experiment="Bayes", d=2, n_values=(2 ** 6, 2 ** 8, 2 ** 10),
            k_values=(16,), trials=10),
    }


def paper_presets() -> dict[str, ExperimentConfig]:
    """Full-scale analogs of the published sweeps; hours of compute."""
    return {
        "sweep_n_paper": ExperimentConfig(
            experiment="MestSweepN", d=10, n_total=2 ** 19,
            n_values=tuple(2 ** p for p in range(8, 14)), trials=100),
        "sweep_k_paper": ExperimentConfig(
            experiment="MestSweepK", d=10, n_values=(512,),
            k_values=(16, 64, 256, 1024), trials=100),
        "coverage_paper": ExperimentConfig(
            experiment="Coverage", d=5, n_values=(2 ** 13,), k_values=(16, 64, 128),
            trials=1000),
        "lasso_total_paper": ExperimentConfig(
            experiment="LassoFixedN", d=5000, n_total=25600, n_values=(800,),
            k_values=(1, 2, 4, 8, 16, 32), trials=50, lam_scale=3.0),
        "lasso_shard_paper": ExperimentConfig(
            experiment="LassoFixedn", d=5000, n_values=(800,),
            k_values=(1, 2, 4, 8, 16, 32, 64), trials=50, lam_scale=3.0),
        "bayes_paper": ExperimentConfig(
            experiment="Bayes", d=2, n_values=tuple(2 ** p for p in range(6, 12)),
            k_values=(16,), trials=50),
    }
