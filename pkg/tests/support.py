"""Shared numerical helpers for the test suite.

Provides central-difference Jacobians of the estimator moment maps and
builders that assemble the exact population moment vector each estimator
consumes, laid out exactly as the ``*_stats`` functions produce them.
"""

import math

import numpy as np

from momentfit.estimators import (
    SolverConfig,
    dirichlet_based_map,
    dirichlet_me_map,
    dirichlet_mle_from_moments,
    dirichlet_same_map,
    mgamma_me_map,
    mgamma_mle_from_moments,
    mgamma_same_map,
)
from momentfit.model import DirichletParams, MGammaParams
from momentfit.moments import MomentId, moment_value

TIGHT_SOLVER = SolverConfig(tol=1e-13, max_iterations=200)


def central_jacobian(fn, y0, rel_step=5e-5):
    """Central-difference Jacobian of ``fn`` at ``y0`` (rows = outputs).

    Uses the five-point fourth-order central stencil: the moment maps have
    small-denominator curvature at concentrated parameters, and the extra
    order keeps the truncation error far below the comparison tolerance
    while the step stays large enough to swamp solver noise.
    """
    y0 = np.asarray(y0, dtype=float)

    def at(c, delta):
        y = y0.copy()
        y[c] += delta
        return np.asarray(fn(y), dtype=float)

    f0 = np.asarray(fn(y0), dtype=float)
    jac = np.empty((f0.size, y0.size))
    for c in range(y0.size):
        h = rel_step * max(1.0, abs(y0[c]))
        jac[:, c] = (
            -at(c, 2 * h) + 8.0 * at(c, h) - 8.0 * at(c, -h) + at(c, -2 * h)
        ) / (12.0 * h)
    return jac


def _dir(params, kind, **kw):
    return moment_value(params, MomentId("dirichlet", kind, **kw))


def _mg(params, kind, **kw):
    return moment_value(params, MomentId("mgamma", kind, **kw))


def moment_vector_dirichlet_me(params: DirichletParams) -> np.ndarray:
    idx = range(1, params.k + 1)
    return np.array(
        [_dir(params, "x_pow", i=i, m=1) for i in idx]
        + [_dir(params, "x_pow", i=i, m=2) for i in idx]
    )


def moment_vector_dirichlet_same(params: DirichletParams) -> np.ndarray:
    idx = range(1, params.k + 1)
    return np.array(
        [_dir(params, "x_pow", i=i, m=1) for i in idx]
        + [_dir(params, "log_x", i=i) for i in idx]
        + [_dir(params, "x_log_x", i=i) for i in idx]
    )


def moment_vector_dirichlet_mle(params: DirichletParams) -> np.ndarray:
    return np.array([_dir(params, "log_x", i=i) for i in range(1, params.k + 1)])


def moment_vector_mgamma_me(params: MGammaParams) -> np.ndarray:
    idx = range(1, params.k + 1)
    return np.array(
        [_mg(params, "z_pow", i=i, m=1) for i in idx]
        + [_mg(params, "z_pow", i=i, m=2) for i in idx]
    )


def moment_vector_mgamma_same(params: MGammaParams) -> np.ndarray:
    idx = range(1, params.k + 1)
    return np.array(
        [_mg(params, "z_pow", i=i, m=1) for i in idx]
        + [_mg(params, "log_z", i=i) for i in idx]
        + [_mg(params, "z_pow_log", i=i, m=1) for i in idx]
    )


def moment_vector_mgamma_mle(params: MGammaParams) -> np.ndarray:
    return np.array(
        [_mg(params, "log_z", i=i) for i in range(1, params.k + 1)]
        + [_mg(params, "xk_pow", m=1)]
    )


def moment_vector_dirichlet_based(params: MGammaParams, base: str) -> np.ndarray:
    w = DirichletParams(params.alpha)
    if base == "me":
        head = moment_vector_dirichlet_me(w)
    elif base == "same":
        head = moment_vector_dirichlet_same(w)
    else:
        raise ValueError("base must be 'me' or 'same'")
    return np.concatenate([head, [_mg(params, "xk_pow", m=1)]])


def estimator_map_and_moments(family: str, estimator: str, params):
    """Return (map, exact moment vector) for a finite-difference check.

    The map sends the estimator's sample-moment vector to the parameter
    estimate; at the population moment vector it returns the true
    parameters, and its Jacobian there is the matrix G of the sandwich.
    """
    if family == "dirichlet":
        if estimator == "me":
            return dirichlet_me_map, moment_vector_dirichlet_me(params)
        if estimator == "same":
            return dirichlet_same_map, moment_vector_dirichlet_same(params)
        if estimator == "mle":

            def solve_dir(t, alpha=params.alpha):
                a, exists, *_ = dirichlet_mle_from_moments(
                    t, config=TIGHT_SOLVER, init=alpha
                )
                if not exists:
                    raise RuntimeError("likelihood solve failed in FD probe")
                return a

            return solve_dir, moment_vector_dirichlet_mle(params)
        raise ValueError(f"unknown dirichlet estimator {estimator!r}")
    if family == "mgamma":
        k = params.k
        if estimator == "me":
            return mgamma_me_map, moment_vector_mgamma_me(params)
        if estimator == "same":
            return mgamma_same_map, moment_vector_mgamma_same(params)
        if estimator == "mle":

            def solve_mg(y, alpha=params.alpha):
                theta, exists, *_ = mgamma_mle_from_moments(
                    y[:k], y[k], config=TIGHT_SOLVER, init=alpha
                )
                if not exists:
                    raise RuntimeError("likelihood solve failed in FD probe")
                return theta

            return solve_mg, moment_vector_mgamma_mle(params)
        if estimator in ("dir_me", "dir_same"):
            base = estimator.removeprefix("dir_")
            return (
                lambda y: dirichlet_based_map(y, base),
                moment_vector_dirichlet_based(params, base),
            )
        raise ValueError(f"unknown mgamma estimator {estimator!r}")
    raise ValueError(f"unknown family {family!r}")


def max_jacobian_error(G, fn, mu, rel_step=4e-6):
    """Max abs difference between G and the FD Jacobian, and the G scale."""
    fd = central_jacobian(fn, mu, rel_step=rel_step)
    return float(np.abs(fd - G).max()), max(1.0, float(np.abs(G).max()))


def draw_alpha(rng, k, lo=0.3, hi=6.0):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=k))


def draw_dirichlet_params(rng, k):
    return DirichletParams(draw_alpha(rng, k))


def draw_mgamma_params(rng, k, beta_lo=0.3, beta_hi=4.0):
    beta = float(np.exp(rng.uniform(math.log(beta_lo), math.log(beta_hi))))
    return MGammaParams(draw_alpha(rng, k), beta)
