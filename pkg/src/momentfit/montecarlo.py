"""Monte Carlo harness: metric sweeps and empirical sampling covariances.

The engine draws one sample per replicate — replicate ``r`` always uses
substream ``r`` of the master seed — and evaluates every requested
estimator on that shared sample, so estimator comparisons ride on common
random numbers and the output is a pure function of the configuration.
Replicates are processed in fixed-size chunks whose shape depends only on
``(n, k)``; an optional process pool distributes the chunks and the
results are reduced in replicate order, which keeps parallel runs
bit-identical to serial ones.

``run_metric_sweep`` reports bias, variance and RMSE per parameter
coordinate for every (sweep value, n, estimator) cell, counting the
replicates where the estimate does not exist instead of silently dropping
them.  ``empirical_sampling_covariance`` returns the sample covariance of
``sqrt(n) (theta_hat - theta)``, the quantity the analytic sandwich
matrices approximate.  ``run_avar_sweep`` evaluates those matrices over a
grid without any sampling.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .avar import avar_matrix
from .estimators import (
    ESTIMATOR_TAGS,
    dirichlet_based_from_moments,
    dirichlet_me_from_moments,
    dirichlet_mle_from_moments,
    dirichlet_same_from_moments,
    dirichlet_stats,
    mgamma_me_from_moments,
    mgamma_mle_from_moments,
    mgamma_same_from_moments,
    mgamma_stats,
)
from .model import (
    DirichletParams,
    MGammaParams,
    RngSpec,
    sample_dirichlet,
    sample_mgamma,
)

__all__ = [
    "AvarRow",
    "InsufficientDataError",
    "MetricsRow",
    "SweepConfig",
    "empirical_sampling_covariance",
    "run_avar_sweep",
    "run_metric_sweep",
]

# Target float count of one (replicates, n, k) sampling buffer.  The chunk
# shape must be a function of (n, k) only, never of m or the worker count,
# so that chunked reductions are reproducible across runs.
_CHUNK_TARGET = 4_000_000

_RMSE_IDENTITY_RTOL = 1e-10


class InsufficientDataError(RuntimeError):
    """Too few replicates produced an existing estimate."""


def _as_int(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}")
    return value


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: vary a single parameter coordinate over a grid.

    ``params`` supplies the fixed coordinates; the entry at
    ``param_index`` is a placeholder replaced by each grid value
    (``param_index == k`` addresses the mgamma scale).
    """

    family: str
    params: object
    param_index: int
    grid: tuple
    n_values: tuple
    m: int
    estimators: tuple
    seed: int

    def __post_init__(self):
        if self.family not in ESTIMATOR_TAGS:
            raise ValueError(f"family must be one of {sorted(ESTIMATOR_TAGS)}")
        want = DirichletParams if self.family == "dirichlet" else MGammaParams
        if not isinstance(self.params, want):
            raise ValueError(f"params must be a {want.__name__}")
        k = self.params.k
        top = k - 1 if self.family == "dirichlet" else k
        idx = _as_int(self.param_index, "param_index", 0)
        if idx > top:
            raise ValueError(f"param_index must be <= {top} for this family")
        grid = tuple(float(v) for v in np.asarray(self.grid, dtype=float).ravel())
        if not grid:
            raise ValueError("grid must be non-empty")
        if not all(math.isfinite(v) and v > 0.0 for v in grid):
            raise ValueError("grid values must be positive and finite")
        n_values = tuple(_as_int(n, "n", 2) for n in self.n_values)
        if not n_values:
            raise ValueError("n_values must be non-empty")
        m = _as_int(self.m, "m", 100)
        estimators = tuple(self.estimators)
        if not estimators:
            raise ValueError("estimators must be non-empty")
        if len(set(estimators)) != len(estimators):
            raise ValueError("estimator tags must be unique")
        for tag in estimators:
            if tag not in ESTIMATOR_TAGS[self.family]:
                raise ValueError(
                    f"estimator {tag!r} is not valid for family {self.family!r}"
                )
            if tag.startswith("dir_") and k < 2:
                raise ValueError(f"estimator {tag!r} needs k >= 2")
        RngSpec(self.seed)
        object.__setattr__(self, "param_index", idx)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "n_values", n_values)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "estimators", estimators)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def k(self) -> int:
        return self.params.k


@dataclass(frozen=True)
class MetricsRow:
    """Metrics of one estimator coordinate at one (sweep value, n) cell."""

    family: str
    estimator: str
    param_index: int
    sweep_value: float
    n: int
    m_effective: int
    failures: int
    bias: float
    variance: float
    rmse: float

    def __post_init__(self):
        if self.m_effective < 0 or self.failures < 0:
            raise ValueError("replicate counts must be non-negative")
        if self.m_effective == 0:
            if not (
                math.isnan(self.bias)
                and math.isnan(self.variance)
                and math.isnan(self.rmse)
            ):
                raise ValueError("metrics with no surviving replicates must be NaN")
            return
        if not all(
            math.isfinite(v) for v in (self.bias, self.variance, self.rmse)
        ):
            raise ValueError("metrics must be finite when replicates survive")
        if self.variance < 0.0 or self.rmse < 0.0:
            raise ValueError("variance and rmse must be non-negative")
        lhs = self.rmse**2
        rhs = self.bias**2 + self.variance
        if abs(lhs - rhs) > _RMSE_IDENTITY_RTOL * max(lhs, rhs, 1e-300):
            raise ValueError("rmse^2 must equal bias^2 + variance")

    @property
    def m(self) -> int:
        return self.m_effective + self.failures


@dataclass(frozen=True)
class AvarRow:
    """Analytic asymptotic variance of one estimator coordinate."""

    family: str
    estimator: str
    param_index: int
    sweep_value: float
    avar: float

    def __post_init__(self):
        if self.param_index < 0:
            raise ValueError("param_index must be non-negative")
        if not math.isfinite(self.avar) or self.avar <= 0.0:
            raise ValueError("asymptotic variances must be positive")


# ---------------------------------------------------------------------------
# Replicate statistics
# ---------------------------------------------------------------------------

_DIR_KEYS = ("mean_x", "mean_x2", "mean_log", "mean_xlog")
_MG_KEYS = (
    "mean_z",
    "mean_z2",
    "mean_logz",
    "mean_zlogz",
    "mean_xk",
    "mean_w",
    "mean_w2",
    "mean_logw",
    "mean_wlogw",
)


def _stat_keys(family: str, k: int):
    if family == "dirichlet":
        return _DIR_KEYS
    return _MG_KEYS if k >= 2 else _MG_KEYS[:5]


def _key_width(key: str, k: int) -> int:
    return 1 if key == "mean_xk" else k


def _stats_chunk(family, params, n, seed, start, stop):
    """Per-replicate moment means for replicates [start, stop)."""
    sampler = sample_dirichlet if family == "dirichlet" else sample_mgamma
    data = np.empty((stop - start, n, params.k))
    for i, r in enumerate(range(start, stop)):
        data[i] = sampler(params, n, RngSpec(seed, stream=r)).data
    stats = dirichlet_stats(data) if family == "dirichlet" else mgamma_stats(data)
    columns = []
    for key in _stat_keys(family, params.k):
        arr = np.asarray(stats[key])
        columns.append(arr[:, None] if arr.ndim == 1 else arr)
    return np.concatenate(columns, axis=1)


def _collect_stats(family, params, n, seed, m, workers):
    """Moment means for all m replicates, reduced in replicate order."""
    k = params.k
    width = sum(_key_width(key, k) for key in _stat_keys(family, k))
    step = max(1, _CHUNK_TARGET // max(1, n * k))
    ranges = [(s, min(s + step, m)) for s in range(0, m, step)]
    flat = np.empty((m, width))
    if workers <= 1 or len(ranges) == 1:
        for s, e in ranges:
            flat[s:e] = _stats_chunk(family, params, n, seed, s, e)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_stats_chunk, family, params, n, seed, s, e)
                for s, e in ranges
            ]
            for (s, e), future in zip(ranges, futures):
                flat[s:e] = future.result()
    stats = {}
    offset = 0
    for key in _stat_keys(family, k):
        width = _key_width(key, k)
        block = flat[:, offset : offset + width]
        stats[key] = block[:, 0] if key == "mean_xk" else block
        offset += width
    return stats


# ---------------------------------------------------------------------------
# Batched estimator evaluation on shared replicate statistics
# ---------------------------------------------------------------------------


def _evaluate_estimator(family, stats, tag, n):
    """Estimates (m, d) and existence mask (m,) for one estimator tag."""
    if family == "dirichlet":
        if tag == "me":
            y = np.concatenate([stats["mean_x"], stats["mean_x2"]], axis=1)
            theta, ok = dirichlet_me_from_moments(y)
        elif tag == "same":
            y = np.concatenate(
                [stats["mean_x"], stats["mean_log"], stats["mean_xlog"]], axis=1
            )
            theta, ok = dirichlet_same_from_moments(y)
        elif tag == "mle":
            init, _ = dirichlet_same_from_moments(
                np.concatenate(
                    [stats["mean_x"], stats["mean_log"], stats["mean_xlog"]], axis=1
                )
            )
            theta, ok, _, _, _ = dirichlet_mle_from_moments(
                stats["mean_log"], init=init
            )
        else:
            raise ValueError(f"unknown dirichlet estimator {tag!r}")
    elif tag == "me":
        y = np.concatenate([stats["mean_z"], stats["mean_z2"]], axis=1)
        theta, ok = mgamma_me_from_moments(y)
    elif tag in ("same", "same_unbiased"):
        y = np.concatenate(
            [stats["mean_z"], stats["mean_logz"], stats["mean_zlogz"]], axis=1
        )
        theta, ok = mgamma_same_from_moments(
            y, n=n, unbiased=tag == "same_unbiased"
        )
    elif tag == "mle":
        same_theta, _ = mgamma_same_from_moments(
            np.concatenate(
                [stats["mean_z"], stats["mean_logz"], stats["mean_zlogz"]], axis=1
            )
        )
        theta, ok, _, _, _ = mgamma_mle_from_moments(
            stats["mean_logz"], stats["mean_xk"], init=same_theta[:, :-1]
        )
    elif tag in ("dir_me", "dir_same"):
        base = tag.removeprefix("dir_")
        if base == "me":
            head = [stats["mean_w"], stats["mean_w2"]]
        else:
            head = [stats["mean_w"], stats["mean_logw"], stats["mean_wlogw"]]
        y = np.concatenate(head + [stats["mean_xk"][:, None]], axis=1)
        theta, ok = dirichlet_based_from_moments(y, base)
    else:
        raise ValueError(f"unknown mgamma estimator {tag!r}")
    theta = np.array(theta, dtype=float)
    ok = np.asarray(ok, dtype=bool)
    theta[~ok] = np.nan
    return theta, ok


def _swept_params(config: SweepConfig, value: float):
    alpha = np.array(config.params.alpha)
    if config.family == "dirichlet":
        alpha[config.param_index] = value
        return DirichletParams(alpha)
    if config.param_index < config.k:
        alpha[config.param_index] = value
        return MGammaParams(alpha, config.params.beta)
    return MGammaParams(alpha, value)


def _true_vector(family: str, params) -> np.ndarray:
    if family == "dirichlet":
        return np.array(params.alpha)
    return np.concatenate([params.alpha, [params.beta]])


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def run_metric_sweep(config: SweepConfig, workers: int = 1) -> list:
    """Bias/variance/RMSE per parameter coordinate over the sweep grid.

    Returns one :class:`MetricsRow` per (sweep value, n, estimator,
    parameter index).  Replicates whose estimate does not exist are
    excluded from the metrics and counted in ``failures``.
    """
    rows = []
    for value in config.grid:
        params = _swept_params(config, value)
        truth = _true_vector(config.family, params)
        for n in config.n_values:
            stats = _collect_stats(
                config.family, params, n, config.seed, config.m, workers
            )
            for tag in config.estimators:
                theta, ok = _evaluate_estimator(config.family, stats, tag, n)
                kept = theta[ok]
                m_effective = int(ok.sum())
                failures = config.m - m_effective
                for j in range(truth.size):
                    if m_effective:
                        err = kept[:, j] - truth[j]
                        bias = float(err.mean())
                        variance = float(err.var())
                        rmse = math.sqrt(bias * bias + variance)
                    else:
                        bias = variance = rmse = math.nan
                    rows.append(
                        MetricsRow(
                            family=config.family,
                            estimator=tag,
                            param_index=j,
                            sweep_value=float(value),
                            n=int(n),
                            m_effective=m_effective,
                            failures=failures,
                            bias=bias,
                            variance=variance,
                            rmse=rmse,
                        )
                    )
    return rows


def empirical_sampling_covariance(
    family: str,
    params,
    estimator: str,
    n: int,
    m: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Sample covariance of sqrt(n) (theta_hat - theta) over m replicates.

    Replicates with non-existing estimates are dropped; fewer than 10
    survivors raise :class:`InsufficientDataError`.
    """
    if family not in ESTIMATOR_TAGS:
        raise ValueError(f"family must be one of {sorted(ESTIMATOR_TAGS)}")
    want = DirichletParams if family == "dirichlet" else MGammaParams
    if not isinstance(params, want):
        raise ValueError(f"params must be a {want.__name__}")
    if estimator not in ESTIMATOR_TAGS[family]:
        raise ValueError(f"estimator {estimator!r} is not valid for {family!r}")
    if estimator.startswith("dir_") and params.k < 2:
        raise ValueError(f"estimator {estimator!r} needs k >= 2")
    n = _as_int(n, "n", 2)
    m = _as_int(m, "m", 10)
    RngSpec(seed)
    stats = _collect_stats(family, params, n, seed, m, workers)
    theta, ok = _evaluate_estimator(family, stats, estimator, n)
    kept = theta[ok]
    if kept.shape[0] < 10:
        raise InsufficientDataError(
            f"only {kept.shape[0]} of {m} replicates produced an estimate"
        )
    dev = math.sqrt(n) * (kept - _true_vector(family, params))
    return np.cov(dev, rowvar=False, ddof=1)


def run_avar_sweep(config: SweepConfig) -> list:
    """Analytic asymptotic variances over the sweep grid (no sampling)."""
    rows = []
    for value in config.grid:
        params = _swept_params(config, value)
        for tag in config.estimators:
            diag = np.diag(avar_matrix(config.family, tag, params).matrix)
            for j, var in enumerate(diag):
                rows.append(
                    AvarRow(
                        family=config.family,
                        estimator=tag,
                        param_index=j,
                        sweep_value=float(value),
                        avar=float(var),
                    )
                )
    return rows
