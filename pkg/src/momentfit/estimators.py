"""Point estimators for both families: ME, SAME, MLE, and the
Dirichlet-based moment-type estimators for the multivariate Gamma.

Every estimator is a moment map ``theta = g(mean h(X))`` evaluated at
divide-by-N sample moments.  The pure maps (``*_map``) operate on
stacked moment vectors with documented layouts and broadcast over
leading axes, so a Monte Carlo harness can evaluate thousands of
replicates in one call and variance calculations can differentiate the
very same ``g`` the estimators use.  Existence failures (empty
variance, nonpositive denominators, solver non-convergence) are
reported as ``exists=False`` with a reason code, never as exceptions.

Moment-vector layouts (k = dimension):

- Dirichlet ME:    ``y = [mean x_1..x_k, mean x_1^2..x_k^2]``           (2k)
- Dirichlet SAME:  ``y = [mean x, mean log x, mean x log x]``           (3k)
- MGamma ME:       ``y = [mean z, mean z^2]``                           (2k)
- MGamma SAME:     ``y = [mean z, mean log z, mean z log z]``           (3k)
- Dirichlet-based: ``y = [dirichlet layout of w = z/x_k..., mean x_k]``
- MLE inputs:      ``mean log x`` (Dirichlet), ``(mean log z, mean x_k)``
                   (MGamma)

MGamma estimates are stacked ``[alpha_1..alpha_k, beta]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SampleMatrix, delta_transform
from .specialfn import digamma, digamma_diff, polygamma

__all__ = [
    "ESTIMATOR_TAGS",
    "EstimateReport",
    "SolverConfig",
    "estimate",
    "dirichlet_stats",
    "mgamma_stats",
    "dirichlet_me_map",
    "dirichlet_same_map",
    "mgamma_me_map",
    "mgamma_same_map",
    "dirichlet_based_map",
    "dirichlet_me_from_moments",
    "dirichlet_same_from_moments",
    "dirichlet_mle_from_moments",
    "mgamma_me_from_moments",
    "mgamma_same_from_moments",
    "mgamma_mle_from_moments",
    "dirichlet_based_from_moments",
    "dirichlet_me",
    "dirichlet_same",
    "dirichlet_mle",
    "mgamma_me",
    "mgamma_same",
    "mgamma_mle",
    "mgamma_dirichlet_based",
]


# Canonical estimator tags per family; used for config validation and
# dispatch across the whole package.
ESTIMATOR_TAGS = {
    "dirichlet": ("me", "same", "mle"),
    "mgamma": ("me", "same", "same_unbiased", "mle", "dir_me", "dir_same"),
}


@dataclass(frozen=True)
class SolverConfig:
    """Damped-Newton settings for the likelihood equation systems."""

    tol: float = 1e-10
    max_iterations: int = 100
    min_step: float = 2.0**-30

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.min_step <= 1:
            raise ValueError("min_step must lie in (0, 1]")


@dataclass(frozen=True)
class EstimateReport:
    """Outcome of one estimation: value or a reason it does not exist."""

    method: str  # me | same | same_unbiased | mle | dir_me | dir_same
    family: str
    estimate: np.ndarray | None
    exists: bool
    n: int
    reason: str | None = None
    iterations: int | None = None
    score_norm: float | None = None

    def __post_init__(self):
        if self.exists:
            if self.estimate is None or np.any(np.asarray(self.estimate) <= 0):
                raise ValueError("existing estimates must be strictly positive")
            est = np.asarray(self.estimate, dtype=float).copy()
            est.setflags(write=False)
            object.__setattr__(self, "estimate", est)
        else:
            if self.estimate is not None:
                raise ValueError("non-existing estimates must omit the value")
            if not self.reason:
                raise ValueError("non-existing estimates must carry a reason")


# ---------------------------------------------------------------------------
# Sample statistics (divide-by-N moments)
# ---------------------------------------------------------------------------


def dirichlet_stats(x: np.ndarray) -> dict:
    """Divide-by-N moment means of a simplex array of shape (..., n, k)."""
    logx = np.log(x)
    return {
        "mean_x": x.mean(axis=-2),
        "mean_x2": (x * x).mean(axis=-2),
        "mean_log": logx.mean(axis=-2),
        "mean_xlog": (x * logx).mean(axis=-2),
    }


def mgamma_stats(x: np.ndarray) -> dict:
    """Moment means of increasing-row arrays of shape (..., n, k).

    Includes the moments of the increments ``z``, of the total ``x_k``,
    and of the projection ``w = z / x_k`` that the Dirichlet-based
    estimators consume.
    """
    z = np.diff(x, axis=-1, prepend=0.0)
    logz = np.log(z)
    xk = x[..., -1:]
    out = {
        "mean_z": z.mean(axis=-2),
        "mean_z2": (z * z).mean(axis=-2),
        "mean_logz": logz.mean(axis=-2),
        "mean_zlogz": (z * logz).mean(axis=-2),
        "mean_xk": xk[..., 0].mean(axis=-1),
    }
    if x.shape[-1] >= 2:
        w = z / xk
        logw = np.log(w)
        out.update(
            {
                "mean_w": w.mean(axis=-2),
                "mean_w2": (w * w).mean(axis=-2),
                "mean_logw": logw.mean(axis=-2),
                "mean_wlogw": (w * logw).mean(axis=-2),
            }
        )
    return out


# ---------------------------------------------------------------------------
# Pure moment maps (broadcast over leading axes)
# ---------------------------------------------------------------------------


def _split(y, blocks):
    y = np.asarray(y, dtype=float)
    k, rem = divmod(y.shape[-1], blocks)
    if rem or k < 1:
        raise ValueError(f"moment vector length must be a multiple of {blocks}")
    return [y[..., b * k : (b + 1) * k] for b in range(blocks)]


def dirichlet_me_map(y):
    """alpha_i = y_i (y_i - y_{k+i}) / (y_{k+i} - y_i^2) on [mean x, mean x^2]."""
    mean_x, mean_x2 = _split(y, 2)
    return mean_x * (mean_x - mean_x2) / (mean_x2 - mean_x * mean_x)


def dirichlet_same_map(y):
    """alpha_i = (k-1) y_i / sum_j (mean x_j log x_j - mean x_j mean log x_j)."""
    mean_x, mean_log, mean_xlog = _split(y, 3)
    k = mean_x.shape[-1]
    denom = (mean_xlog - mean_x * mean_log).sum(axis=-1, keepdims=True)
    return (k - 1) * mean_x / denom


def mgamma_me_map(y):
    """[alpha, beta] with beta = (1/k) sum_j (mean z_j^2 - mean z_j^2)/mean z_j."""
    mean_z, mean_z2 = _split(y, 2)
    k = mean_z.shape[-1]
    beta = ((mean_z2 - mean_z * mean_z) / mean_z).sum(axis=-1, keepdims=True) / k
    return np.concatenate([mean_z / beta, beta], axis=-1)


def mgamma_same_map(y):
    """[alpha, beta] with beta = (1/k) sum_j (mean z_j log z_j - mean z_j mean log z_j)."""
    mean_z, mean_log, mean_zlog = _split(y, 3)
    k = mean_z.shape[-1]
    beta = (mean_zlog - mean_z * mean_log).sum(axis=-1, keepdims=True) / k
    return np.concatenate([mean_z / beta, beta], axis=-1)


def dirichlet_based_map(y, base: str):
    """[alpha, beta]: a Dirichlet map on the projected moments, then
    beta = mean x_k / alpha0."""
    y = np.asarray(y, dtype=float)
    w_y, mean_xk = y[..., :-1], y[..., -1:]
    if base == "me":
        alpha = dirichlet_me_map(w_y)
    elif base == "same":
        alpha = dirichlet_same_map(w_y)
    else:
        raise ValueError("base must be 'me' or 'same'")
    beta = mean_xk / alpha.sum(axis=-1, keepdims=True)
    return np.concatenate([alpha, beta], axis=-1)


# ---------------------------------------------------------------------------
# Moment-level estimation with existence masks
# ---------------------------------------------------------------------------

_REASON_VARIANCE = "zero_variance"
_REASON_ESTIMATE = "nonpositive_estimate"
_REASON_DENOM = "nonpositive_denominator"
_REASON_SCALE = "nonpositive_scale"
_REASON_STALL = "no_convergence"
_REASON_DIVERGED = "diverged"


def dirichlet_me_from_moments(y):
    """Estimates plus existence mask; fails on zero variance or alpha <= 0."""
    mean_x, mean_x2 = _split(y, 2)
    variance = mean_x2 - mean_x * mean_x
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = dirichlet_me_map(y)
    exists = np.all(variance > 0, axis=-1) & np.all(alpha > 0, axis=-1)
    return alpha, exists


def dirichlet_same_from_moments(y):
    """Estimates plus existence mask; fails on a nonpositive denominator."""
    mean_x, mean_log, mean_xlog = _split(y, 3)
    denom = (mean_xlog - mean_x * mean_log).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = dirichlet_same_map(y)
    return alpha, denom > 0


def mgamma_me_from_moments(y):
    """Estimates plus existence mask; fails when the scale is <= 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = mgamma_me_map(y)
    return theta, theta[..., -1] > 0


def mgamma_same_from_moments(y, n=None, unbiased=False):
    """SAME estimates; with ``unbiased`` the small-sample factors n/(n-1)
    on beta (exactly unbiased) and (n-1)/n on alpha (the reciprocal
    correction, exact for k = 1; for k >= 2 the shared denominator pools
    coordinates and an O(1/n) cross-coordinate residual remains)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = mgamma_same_map(y)
    exists = theta[..., -1] > 0
    if unbiased:
        if n is None or n < 2:
            raise ValueError("the unbiased correction needs the sample size n >= 2")
        theta = theta.copy()
        theta[..., :-1] *= (n - 1) / n
        theta[..., -1] *= n / (n - 1)
    return theta, exists


def _solve_diag_rank_one(d, c, rhs):
    """Solve (diag(d) + c 11^T) x = rhs rowwise, O(k) per row."""
    u = rhs / d
    denom = 1.0 + c * (1.0 / d).sum(axis=-1)
    scale = c * u.sum(axis=-1) / denom
    return u - scale[..., None] / d


def _damped_newton(t_init, score, jac_parts, config):
    """Damped Newton with positivity step-halving, batched over rows.

    ``score(theta) -> (m, k)``; ``jac_parts(theta) -> (d, c)`` with the
    Jacobian ``diag(d) + c 11^T``.  Returns (theta, converged, diverged,
    iterations, score_norm).
    """
    theta = np.array(t_init, dtype=float)
    m = theta.shape[0]
    converged = np.zeros(m, dtype=bool)
    diverged = np.zeros(m, dtype=bool)
    iterations = np.zeros(m, dtype=int)
    score_norm = np.full(m, np.inf)
    active = np.ones(m, dtype=bool)
    for it in range(config.max_iterations + 1):
        with np.errstate(all="ignore"):
            s = score(theta)
        resid = np.abs(s).max(axis=-1)
        bad = active & ~np.isfinite(resid)
        diverged |= bad
        done = active & ~bad & (resid <= config.tol)
        converged |= done
        iterations[done] = it
        score_norm[active & ~bad] = resid[active & ~bad]
        active &= ~done & ~bad
        if it == config.max_iterations or not active.any():
            break
        d, c = jac_parts(theta)
        with np.errstate(all="ignore"):
            step = _solve_diag_rank_one(d, c, -s)
        step = np.where(active[:, None], step, 0.0)
        t = np.ones(m)
        trial = theta + step
        while True:
            violates = active & (
                ~np.isfinite(trial).all(axis=-1) | (trial <= 0).any(axis=-1)
            )
            if not violates.any():
                break
            t[violates] *= 0.5
            floored = violates & (t < config.min_step)
            if floored.any():
                diverged |= floored
                active &= ~floored
                violates &= ~floored
                if not violates.any():
                    break
            trial = theta + t[:, None] * step
        theta = np.where(active[:, None], theta + t[:, None] * step, theta)
    return theta, converged, diverged, iterations, score_norm


def _ones_like_rows(a):
    return np.ones_like(a)


def dirichlet_mle_from_moments(mean_log, config=None, init=None):
    """Solve mean log x_i = Psi(alpha_i, alpha0) by damped Newton.

    Returns (alpha, exists, reason mask info, iterations, score_norm);
    rows that fail carry exists=False.
    """
    config = config or SolverConfig()
    t = np.atleast_2d(np.asarray(mean_log, dtype=float))
    squeeze = np.ndim(mean_log) == 1
    theta0 = np.atleast_2d(init) if init is not None else _ones_like_rows(t)
    theta0 = np.broadcast_to(theta0, t.shape).copy()
    theta0[~np.all(np.isfinite(theta0) & (theta0 > 0), axis=-1)] = 1.0

    def score(alpha):
        a0 = alpha.sum(axis=-1, keepdims=True)
        return t - digamma_diff(alpha, a0)

    def jac_parts(alpha):
        a0 = alpha.sum(axis=-1)
        return -polygamma(1, alpha), polygamma(1, a0)

    alpha, conv, div, iters, norm = _damped_newton(theta0, score, jac_parts, config)
    exists = conv
    if squeeze:
        return alpha[0], bool(exists[0]), bool(div[0]), int(iters[0]), float(norm[0])
    return alpha, exists, div, iters, norm


def mgamma_mle_from_moments(mean_logz, mean_xk, config=None, init=None):
    """Solve the profiled system: beta = mean x_k / alpha0 and
    mean log z_i = psi(alpha_i) + log beta, by damped Newton."""
    config = config or SolverConfig()
    t = np.atleast_2d(np.asarray(mean_logz, dtype=float))
    xk = np.atleast_1d(np.asarray(mean_xk, dtype=float))
    squeeze = np.ndim(mean_logz) == 1
    log_xk = np.log(xk)[:, None]
    theta0 = np.atleast_2d(init) if init is not None else _ones_like_rows(t)
    theta0 = np.broadcast_to(theta0, t.shape).copy()
    theta0[~np.all(np.isfinite(theta0) & (theta0 > 0), axis=-1)] = 1.0

    def score(alpha):
        a0 = alpha.sum(axis=-1, keepdims=True)
        return t - digamma(alpha) - log_xk + np.log(a0)

    def jac_parts(alpha):
        a0 = alpha.sum(axis=-1)
        return -polygamma(1, alpha), 1.0 / a0

    alpha, conv, div, iters, norm = _damped_newton(theta0, score, jac_parts, config)
    a0 = alpha.sum(axis=-1)
    beta = xk / a0
    theta = np.concatenate([alpha, beta[:, None]], axis=-1)
    # Residual of both original equations at the reported solution.
    with np.errstate(all="ignore"):
        eq_beta = np.abs(a0 * beta - xk)
        eq_logz = np.abs(t - digamma(alpha) - np.log(beta)[:, None]).max(axis=-1)
    norm = np.where(conv, np.maximum(eq_beta, eq_logz), norm)
    if squeeze:
        return theta[0], bool(conv[0]), bool(div[0]), int(iters[0]), float(norm[0])
    return theta, conv, div, iters, norm


def dirichlet_based_from_moments(y, base: str):
    """Dirichlet-based MGamma estimates from [w-moments..., mean x_k]."""
    y = np.asarray(y, dtype=float)
    w_y = y[..., :-1]
    if base == "me":
        alpha, exists = dirichlet_me_from_moments(w_y)
    elif base == "same":
        alpha, exists = dirichlet_same_from_moments(w_y)
    else:
        raise ValueError("base must be 'me' or 'same'")
    beta = y[..., -1:] / alpha.sum(axis=-1, keepdims=True)
    return np.concatenate([alpha, beta], axis=-1), exists


# ---------------------------------------------------------------------------
# Sample-level estimators
# ---------------------------------------------------------------------------


def _require(sample: SampleMatrix, family: str):
    if not isinstance(sample, SampleMatrix):
        raise TypeError("expected a SampleMatrix")
    if sample.family != family:
        raise ValueError(f"expected a {family} sample, got {sample.family}")
    if sample.n < 2:
        raise ValueError("estimators need at least 2 observations")


def _report(method, family, theta, exists, n, reason, iterations=None, score_norm=None):
    if exists:
        return EstimateReport(
            method=method,
            family=family,
            estimate=np.asarray(theta, dtype=float),
            exists=True,
            n=n,
            iterations=iterations,
            score_norm=score_norm,
        )
    return EstimateReport(
        method=method,
        family=family,
        estimate=None,
        exists=False,
        n=n,
        reason=reason,
        iterations=iterations,
        score_norm=score_norm,
    )


def dirichlet_me(sample: SampleMatrix) -> EstimateReport:
    """Moment estimator from first and second simplex moments."""
    _require(sample, "dirichlet")
    stats = dirichlet_stats(sample.data)
    y = np.concatenate([stats["mean_x"], stats["mean_x2"]])
    alpha, exists = dirichlet_me_from_moments(y)
    variance = stats["mean_x2"] - stats["mean_x"] ** 2
    reason = None
    if not exists:
        reason = _REASON_VARIANCE if np.any(variance <= 0) else _REASON_ESTIMATE
    return _report("me", "dirichlet", alpha, bool(exists), sample.n, reason)


def dirichlet_same(sample: SampleMatrix) -> EstimateReport:
    """Score-adjusted moment estimator (shared x-log-x denominator)."""
    _require(sample, "dirichlet")
    stats = dirichlet_stats(sample.data)
    y = np.concatenate([stats["mean_x"], stats["mean_log"], stats["mean_xlog"]])
    alpha, exists = dirichlet_same_from_moments(y)
    return _report(
        "same", "dirichlet", alpha, bool(exists), sample.n, _REASON_DENOM
    )


def dirichlet_mle(sample: SampleMatrix, config: SolverConfig | None = None) -> EstimateReport:
    """Maximum likelihood: solves mean log x_i = Psi(alpha_i, alpha0)."""
    _require(sample, "dirichlet")
    stats = dirichlet_stats(sample.data)
    init = _dirichlet_init(stats)
    alpha, exists, diverged, iters, norm = dirichlet_mle_from_moments(
        stats["mean_log"], config=config, init=init
    )
    reason = None if exists else (_REASON_DIVERGED if diverged else _REASON_STALL)
    return _report(
        "mle", "dirichlet", alpha, exists, sample.n, reason,
        iterations=iters, score_norm=norm,
    )


def _dirichlet_init(stats):
    y = np.concatenate([stats["mean_x"], stats["mean_log"], stats["mean_xlog"]])
    alpha, ok = dirichlet_same_from_moments(y)
    if ok and np.all(alpha > 0):
        return alpha
    y = np.concatenate([stats["mean_x"], stats["mean_x2"]])
    alpha, ok = dirichlet_me_from_moments(y)
    if ok:
        return alpha
    return None


def mgamma_me(sample: SampleMatrix) -> EstimateReport:
    """Moment estimator on the Gamma increments."""
    _require(sample, "mgamma")
    stats = mgamma_stats(sample.data)
    y = np.concatenate([stats["mean_z"], stats["mean_z2"]])
    theta, exists = mgamma_me_from_moments(y)
    return _report("me", "mgamma", theta, bool(exists), sample.n, _REASON_SCALE)


def mgamma_same(sample: SampleMatrix, unbiased: bool = False) -> EstimateReport:
    """Score-adjusted moment estimator on the increments.

    With ``unbiased`` the scale is reported as n beta / (n-1) (exactly
    unbiased for beta) and the shapes as (n-1) alpha / n (the reciprocal
    correction; its reciprocal is exactly unbiased for 1/alpha_i when
    k = 1, while for k >= 2 the shared denominator pools coordinates and
    an O(1/n) cross-coordinate residual remains).
    """
    _require(sample, "mgamma")
    stats = mgamma_stats(sample.data)
    y = np.concatenate([stats["mean_z"], stats["mean_logz"], stats["mean_zlogz"]])
    theta, exists = mgamma_same_from_moments(y, n=sample.n, unbiased=unbiased)
    method = "same_unbiased" if unbiased else "same"
    return _report(method, "mgamma", theta, bool(exists), sample.n, _REASON_SCALE)


def mgamma_mle(sample: SampleMatrix, config: SolverConfig | None = None) -> EstimateReport:
    """Maximum likelihood with the scale profiled out by the mean equation."""
    _require(sample, "mgamma")
    stats = mgamma_stats(sample.data)
    y = np.concatenate([stats["mean_z"], stats["mean_logz"], stats["mean_zlogz"]])
    same_theta, same_ok = mgamma_same_from_moments(y)
    init = same_theta[:-1] if same_ok and np.all(same_theta[:-1] > 0) else None
    theta, exists, diverged, iters, norm = mgamma_mle_from_moments(
        stats["mean_logz"], stats["mean_xk"], config=config, init=init
    )
    reason = None if exists else (_REASON_DIVERGED if diverged else _REASON_STALL)
    return _report(
        "mle", "mgamma", theta, exists, sample.n, reason,
        iterations=iters, score_norm=norm,
    )


def estimate(sample: SampleMatrix, estimator: str, config: SolverConfig | None = None) -> EstimateReport:
    """Dispatch on the estimator tag for the sample's family."""
    tags = ESTIMATOR_TAGS.get(sample.family, ())
    if estimator not in tags:
        raise ValueError(f"unknown {sample.family} estimator {estimator!r}")
    if sample.family == "dirichlet":
        if estimator == "me":
            return dirichlet_me(sample)
        if estimator == "same":
            return dirichlet_same(sample)
        return dirichlet_mle(sample, config)
    if estimator == "me":
        return mgamma_me(sample)
    if estimator == "same":
        return mgamma_same(sample)
    if estimator == "same_unbiased":
        return mgamma_same(sample, unbiased=True)
    if estimator == "mle":
        return mgamma_mle(sample, config)
    return mgamma_dirichlet_based(sample, base=estimator.removeprefix("dir_"))


def mgamma_dirichlet_based(sample: SampleMatrix, base: str = "me") -> EstimateReport:
    """Dirichlet-based estimator: base estimator on w = z/x_k, then
    beta = mean x_k / alpha0."""
    _require(sample, "mgamma")
    if base not in ("me", "same"):
        raise ValueError("base must be 'me' or 'same'")
    if sample.k < 2:
        raise ValueError("the Dirichlet-based estimators need k >= 2")
    stats = mgamma_stats(sample.data)
    if base == "me":
        w_y = np.concatenate([stats["mean_w"], stats["mean_w2"]])
    else:
        w_y = np.concatenate(
            [stats["mean_w"], stats["mean_logw"], stats["mean_wlogw"]]
        )
    y = np.concatenate([w_y, [stats["mean_xk"]]])
    theta, exists = dirichlet_based_from_moments(y, base)
    reason = None
    if not exists:
        if base == "me":
            variance = stats["mean_w2"] - stats["mean_w"] ** 2
            reason = _REASON_VARIANCE if np.any(variance <= 0) else _REASON_ESTIMATE
        else:
            reason = _REASON_DENOM
    return _report(f"dir_{base}", "mgamma", theta, bool(exists), sample.n, reason)
