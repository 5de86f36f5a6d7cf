"""Asymptotic variance-covariance matrices for every estimator.

Each estimator is ``theta = g(mean h(X))``; its limiting covariance of
``sqrt(n) (theta_hat - theta)`` is ``G V G^T`` with ``G`` the Jacobian
of ``g`` at the population moments ``mu = E h(X)`` and ``V = Cov h(X)``.
``G`` comes from closed-form block formulas — every block is verified
against central-difference Jacobians of the actual moment maps in the
test suite — and ``V`` is assembled entry by entry from the moment
catalog's derivation path.

For the MLEs the product collapses to the inverse Fisher information,
computed directly through the diagonal-plus-rank-one and scalar-corner
inverse identities; the ``G V G^T`` route is kept as a cross-check.

Moment layouts match the estimators module:

- Dirichlet ME 2k:   ``[x, x^2]``          MGamma ME 2k:   ``[z, z^2]``
- Dirichlet SAME 3k: ``[x, log x, x log x]``
- MGamma SAME 3k:    ``[z, log z, z log z]``
- Dirichlet MLE k:   ``[log x]``           MGamma MLE k+1: ``[log z, x_k]``
- Dirichlet-based:   ``[w-moments..., x_k]``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DirichletParams, MGammaParams
from .moments import MomentId, moment_value
from .specialfn import digamma, digamma_diff, polygamma

__all__ = [
    "AvarMatrix",
    "GVParts",
    "avar_dirichlet_me",
    "avar_dirichlet_same",
    "avar_dirichlet_mle",
    "avar_mgamma_me",
    "avar_mgamma_same",
    "avar_mgamma_mle",
    "avar_dirichlet_based",
    "avar_matrix",
    "gv_dirichlet_me",
    "gv_dirichlet_same",
    "gv_dirichlet_mle",
    "gv_mgamma_me",
    "gv_mgamma_same",
    "gv_mgamma_mle",
    "gv_dirichlet_based",
    "mgamma_fisher_information",
]

_SYM_RTOL = 1e-10
_PSD_RTOL = 1e-8


def _check_covariance(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"{what} must be square")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} must be finite")
    scale = np.abs(v).max()
    if np.abs(v - v.T).max() > _SYM_RTOL * max(scale, 1e-300):
        raise ValueError(f"{what} must be symmetric")
    min_eig = float(np.linalg.eigvalsh(v).min())
    if min_eig < -_PSD_RTOL * np.trace(v):
        raise ValueError(f"{what} must be positive semidefinite")
    return v


@dataclass(frozen=True)
class AvarMatrix:
    """Symmetric PSD limit covariance of sqrt(n) (theta_hat - theta)."""

    matrix: np.ndarray
    family: str
    estimator: str
    params: object

    def __post_init__(self):
        m = _check_covariance(self.matrix, "avar matrix").copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class GVParts:
    """Jacobian G of the moment map and covariance V of the observables."""

    G: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.G, dtype=float).copy()
        if g.ndim != 2 or not np.all(np.isfinite(g)):
            raise ValueError("G must be a finite matrix")
        v = _check_covariance(self.V, "V").copy()
        if g.shape[1] != v.shape[0]:
            raise ValueError("G and V shapes do not conform")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "V", v)

    def product(self) -> np.ndarray:
        return self.G @ self.V @ self.G.T


def _d_id(kind, **kw):
    return MomentId("dirichlet", kind, **kw)


def _m_id(kind, **kw):
    return MomentId("mgamma", kind, **kw)


# ---------------------------------------------------------------------------
# V assembly (derivation path of the moment catalog)
# ---------------------------------------------------------------------------


def _v_dirichlet_me(params: DirichletParams) -> np.ndarray:
    k = params.k
    v = np.empty((2 * k, 2 * k))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                xx = moment_value(params, _d_id("var_x_pow", i=i, m=1))
                xs = moment_value(params, _d_id("cov_x_xsq_same", i=i))
                ss = moment_value(params, _d_id("var_x_pow", i=i, m=2))
            else:
                xx = moment_value(params, _d_id("cov_x_x", i=i, j=j))
                xs = moment_value(params, _d_id("cov_x_xsq_other", i=i, j=j))
                ss = moment_value(params, _d_id("cov_xsq_xsq", i=i, j=j))
            v[i - 1, j - 1] = xx
            v[i - 1, k + j - 1] = xs
            v[k + j - 1, i - 1] = xs
            v[k + i - 1, k + j - 1] = ss
    return v


def _v_dirichlet_same(params: DirichletParams) -> np.ndarray:
    k = params.k
    v = np.empty((3 * k, 3 * k))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                xx = moment_value(params, _d_id("var_x_pow", i=i, m=1))
                xl = moment_value(params, _d_id("cov_x_log_same", i=i))
                xg = moment_value(params, _d_id("cov_x_xlog_same", i=i))
                ll = moment_value(params, _d_id("var_log_x", i=i))
                lg = moment_value(params, _d_id("cov_log_xlog_same", i=i))
                gg = moment_value(params, _d_id("var_x_log_x", i=i))
            else:
                xx = moment_value(params, _d_id("cov_x_x", i=i, j=j))
                xl = moment_value(params, _d_id("cov_x_log_other", i=i, j=j))
                xg = moment_value(params, _d_id("cov_x_xlog_other", i=i, j=j))
                ll = moment_value(params, _d_id("cov_log_log", i=i, j=j))
                lg = moment_value(params, _d_id("cov_log_xlog_other", i=i, j=j))
                gg = moment_value(params, _d_id("cov_xlog_xlog_other", i=i, j=j))
            v[i - 1, j - 1] = xx
            v[i - 1, k + j - 1] = xl
            v[k + j - 1, i - 1] = xl
            v[i - 1, 2 * k + j - 1] = xg
            v[2 * k + j - 1, i - 1] = xg
            v[k + i - 1, k + j - 1] = ll
            v[k + i - 1, 2 * k + j - 1] = lg
            v[2 * k + j - 1, k + i - 1] = lg
            v[2 * k + i - 1, 2 * k + j - 1] = gg
    return v


def _v_dirichlet_mle(params: DirichletParams) -> np.ndarray:
    k = params.k
    v = np.empty((k, k))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                v[i - 1, j - 1] = moment_value(params, _d_id("var_log_x", i=i))
            else:
                v[i - 1, j - 1] = moment_value(params, _d_id("cov_log_log", i=i, j=j))
    return v


def _v_mgamma_me(params: MGammaParams) -> np.ndarray:
    k = params.k
    v = np.zeros((2 * k, 2 * k))
    for i in range(1, k + 1):
        v[i - 1, i - 1] = moment_value(params, _m_id("var_z", i=i))
        zs = moment_value(params, _m_id("cov_z_zsq", i=i))
        v[i - 1, k + i - 1] = zs
        v[k + i - 1, i - 1] = zs
        v[k + i - 1, k + i - 1] = moment_value(params, _m_id("var_z_sq", i=i))
    return v


def _v_mgamma_same(params: MGammaParams) -> np.ndarray:
    k = params.k
    v = np.zeros((3 * k, 3 * k))
    for i in range(1, k + 1):
        zz = moment_value(params, _m_id("var_z", i=i))
        zl = moment_value(params, _m_id("cov_z_log_z", i=i))
        zg = moment_value(params, _m_id("cov_z_zlog", i=i))
        ll = moment_value(params, _m_id("var_log_z", i=i))
        lg = moment_value(params, _m_id("cov_log_z_zlog", i=i))
        gg = moment_value(params, _m_id("var_z_log_z", i=i))
        v[i - 1, i - 1] = zz
        v[i - 1, k + i - 1] = zl
        v[k + i - 1, i - 1] = zl
        v[i - 1, 2 * k + i - 1] = zg
        v[2 * k + i - 1, i - 1] = zg
        v[k + i - 1, k + i - 1] = ll
        v[k + i - 1, 2 * k + i - 1] = lg
        v[2 * k + i - 1, k + i - 1] = lg
        v[2 * k + i - 1, 2 * k + i - 1] = gg
    return v


def _v_mgamma_mle(params: MGammaParams) -> np.ndarray:
    k = params.k
    v = np.zeros((k + 1, k + 1))
    for i in range(1, k + 1):
        v[i - 1, i - 1] = moment_value(params, _m_id("var_log_z", i=i))
        lx = moment_value(params, _m_id("cov_log_z_xk", i=i))
        v[i - 1, k] = lx
        v[k, i - 1] = lx
    v[k, k] = moment_value(params, _m_id("var_xk"))
    return v


# ---------------------------------------------------------------------------
# G blocks
# ---------------------------------------------------------------------------


def _g_dirichlet_me(params: DirichletParams) -> np.ndarray:
    a, a0, k = params.alpha, params.alpha0, params.k
    g1 = a0 * (2 * a0 + 1) * (a + 1) / (a0 - a)
    g2 = -a0 * (a0 + 1) ** 2 / (a0 - a)
    return np.concatenate([np.diag(g1), np.diag(g2)], axis=1)


def _g_dirichlet_same(params: DirichletParams) -> np.ndarray:
    a, a0, k = params.alpha, params.alpha0, params.k
    psi_big = digamma_diff(a, a0)
    g1 = a0 * np.outer(a, psi_big) / (k - 1) + a0 * np.eye(k)
    g2 = np.outer(a, a) / (k - 1)
    g3 = -a0 * np.outer(a, np.ones(k)) / (k - 1)
    return np.concatenate([g1, g2, g3], axis=1)


def _g_dirichlet_mle(params: DirichletParams) -> np.ndarray:
    # Jacobian of the solved system: the inverse of Cov(log X).
    return _inv_diag_minus_rank_one(
        polygamma(1, params.alpha), polygamma(1, params.alpha0)
    )


def _g_mgamma_me(params: MGammaParams) -> np.ndarray:
    a, b, k = params.alpha, params.beta, params.k
    g11 = np.outer(a, 2.0 + 1.0 / a) / (k * b) + np.eye(k) / b
    g12 = -np.outer(a, 1.0 / a) / (k * b * b)
    g21 = -(2.0 + 1.0 / a) / k
    g22 = 1.0 / (k * a * b)
    top = np.concatenate([g11, g12], axis=1)
    bottom = np.concatenate([g21, g22])[None, :]
    return np.concatenate([top, bottom], axis=0)


def _g_mgamma_same(params: MGammaParams) -> np.ndarray:
    a, b, k = params.alpha, params.beta, params.k
    mean_log = digamma(a) + np.log(b)
    g11 = np.outer(a, mean_log) / (k * b) + np.eye(k) / b
    g12 = np.outer(a, a) / k
    g13 = -np.outer(a, np.ones(k)) / (k * b)
    g21 = -mean_log / k
    g22 = -a * b / k
    g23 = np.ones(k) / k
    top = np.concatenate([g11, g12, g13], axis=1)
    bottom = np.concatenate([g21, g22, g23])[None, :]
    return np.concatenate([top, bottom], axis=0)


def _g_mgamma_mle(params: MGammaParams) -> np.ndarray:
    # Inverse of the Jacobian of (alpha, beta) -> (E log Z, E X_k),
    # inverted in closed form by a Schur complement on the corner.
    a, b, k = params.alpha, params.beta, params.k
    dinv = 1.0 / polygamma(1, a)
    r = params.alpha0 - dinv.sum()
    top_left = np.diag(dinv) + np.outer(dinv, dinv) / r
    top_right = -dinv[:, None] / (b * r)
    bottom_left = -b * dinv[None, :] / r
    corner = np.array([[1.0 / r]])
    return np.block([[top_left, top_right], [bottom_left, corner]])


def _g_dirichlet_based(params: MGammaParams, base: str) -> np.ndarray:
    a, b = params.alpha, params.beta
    dir_params = DirichletParams(a)
    g_d = _g_dirichlet_me(dir_params) if base == "me" else _g_dirichlet_same(dir_params)
    k, p = g_d.shape
    col_sums = g_d.sum(axis=0)
    bottom = np.concatenate([-b / params.alpha0 * col_sums, [1.0 / params.alpha0]])
    top = np.concatenate([g_d, np.zeros((k, 1))], axis=1)
    return np.concatenate([top, bottom[None, :]], axis=0)


def _v_dirichlet_based(params: MGammaParams, base: str) -> np.ndarray:
    dir_params = DirichletParams(params.alpha)
    v_d = _v_dirichlet_me(dir_params) if base == "me" else _v_dirichlet_same(dir_params)
    p = v_d.shape[0]
    v = np.zeros((p + 1, p + 1))
    v[:p, :p] = v_d
    v[p, p] = params.alpha0 * params.beta**2
    return v


# ---------------------------------------------------------------------------
# Closed-form inverses
# ---------------------------------------------------------------------------


def _inv_diag_minus_rank_one(d: np.ndarray, c: float) -> np.ndarray:
    """Inverse of diag(d) - c 11^T via the rank-one update identity."""
    dinv = 1.0 / d
    denom = 1.0 - c * dinv.sum()
    if denom <= 0:
        raise ValueError("matrix is not positive definite")
    return np.diag(dinv) + c * np.outer(dinv, dinv) / denom


def mgamma_fisher_information(params: MGammaParams) -> np.ndarray:
    """Fisher information in (alpha, beta): trigamma diagonal, 1/beta
    off blocks, alpha0/beta^2 corner."""
    a, b, k = params.alpha, params.beta, params.k
    info = np.empty((k + 1, k + 1))
    info[:k, :k] = np.diag(polygamma(1, a))
    info[:k, k] = 1.0 / b
    info[k, :k] = 1.0 / b
    info[k, k] = params.alpha0 / b**2
    return info


def _inv_mgamma_information(params: MGammaParams) -> np.ndarray:
    a, b = params.alpha, params.beta
    dinv = 1.0 / polygamma(1, a)
    r = params.alpha0 - dinv.sum()
    if r <= 0:
        raise ValueError("information matrix is not positive definite")
    top_left = np.diag(dinv) + np.outer(dinv, dinv) / r
    cross = -b * dinv / r
    corner = b * b / r
    out = np.empty((len(a) + 1, len(a) + 1))
    out[:-1, :-1] = top_left
    out[:-1, -1] = cross
    out[-1, :-1] = cross
    out[-1, -1] = corner
    return out


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def gv_dirichlet_me(params: DirichletParams) -> GVParts:
    return GVParts(_g_dirichlet_me(params), _v_dirichlet_me(params))


def gv_dirichlet_same(params: DirichletParams) -> GVParts:
    if params.k < 2:
        raise ValueError("the shared denominator needs k >= 2")
    return GVParts(_g_dirichlet_same(params), _v_dirichlet_same(params))


def gv_dirichlet_mle(params: DirichletParams) -> GVParts:
    return GVParts(_g_dirichlet_mle(params), _v_dirichlet_mle(params))


def gv_mgamma_me(params: MGammaParams) -> GVParts:
    return GVParts(_g_mgamma_me(params), _v_mgamma_me(params))


def gv_mgamma_same(params: MGammaParams) -> GVParts:
    return GVParts(_g_mgamma_same(params), _v_mgamma_same(params))


def gv_mgamma_mle(params: MGammaParams) -> GVParts:
    return GVParts(_g_mgamma_mle(params), _v_mgamma_mle(params))


def gv_dirichlet_based(params: MGammaParams, base: str) -> GVParts:
    if base not in ("me", "same"):
        raise ValueError("base must be 'me' or 'same'")
    if params.k < 2:
        raise ValueError("the Dirichlet-based estimators need k >= 2")
    return GVParts(_g_dirichlet_based(params, base), _v_dirichlet_based(params, base))


def avar_dirichlet_me(params: DirichletParams) -> AvarMatrix:
    return AvarMatrix(gv_dirichlet_me(params).product(), "dirichlet", "me", params)


def avar_dirichlet_same(params: DirichletParams) -> AvarMatrix:
    return AvarMatrix(gv_dirichlet_same(params).product(), "dirichlet", "same", params)


def avar_dirichlet_mle(params: DirichletParams) -> AvarMatrix:
    inv = _inv_diag_minus_rank_one(
        polygamma(1, params.alpha), polygamma(1, params.alpha0)
    )
    return AvarMatrix(inv, "dirichlet", "mle", params)


def avar_mgamma_me(params: MGammaParams) -> AvarMatrix:
    return AvarMatrix(gv_mgamma_me(params).product(), "mgamma", "me", params)


def avar_mgamma_same(params: MGammaParams) -> AvarMatrix:
    return AvarMatrix(gv_mgamma_same(params).product(), "mgamma", "same", params)


def avar_mgamma_mle(params: MGammaParams) -> AvarMatrix:
    return AvarMatrix(_inv_mgamma_information(params), "mgamma", "mle", params)


def avar_dirichlet_based(params: MGammaParams, base: str) -> AvarMatrix:
    return AvarMatrix(
        gv_dirichlet_based(params, base).product(), "mgamma", f"dir_{base}", params
    )


def avar_matrix(family: str, estimator: str, params) -> AvarMatrix:
    """Dispatch on (family, estimator tag).

    ``same_unbiased`` shares the ``same`` limit law: its deterministic
    correction factors are 1 + O(1/n) and vanish under sqrt(n) scaling.
    """
    if family == "dirichlet":
        table = {
            "me": avar_dirichlet_me,
            "same": avar_dirichlet_same,
            "mle": avar_dirichlet_mle,
        }
        if estimator not in table:
            raise ValueError(f"unknown dirichlet estimator {estimator!r}")
        return table[estimator](params)
    if family == "mgamma":
        if estimator in ("me", "same", "mle"):
            return {
                "me": avar_mgamma_me,
                "same": avar_mgamma_same,
                "mle": avar_mgamma_mle,
            }[estimator](params)
        if estimator == "same_unbiased":
            avar = avar_mgamma_same(params)
            return AvarMatrix(avar.matrix, "mgamma", "same_unbiased", params)
        if estimator in ("dir_me", "dir_same"):
            return avar_dirichlet_based(params, estimator.removeprefix("dir_"))
        raise ValueError(f"unknown mgamma estimator {estimator!r}")
    raise ValueError(f"unknown family {family!r}")
