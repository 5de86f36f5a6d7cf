"""Closed-form moment and covariance catalogs for the two families.

The raw-moment catalog is the single source of truth: every covariance
exposed by :func:`dirichlet_covariance` / :func:`mgamma_covariance` is
assembled as ``Cov(U, V) = E(UV) - E(U) E(V)`` from raw entries
(:func:`covariance_from_raw`).  Closed-form covariance expressions are
kept alongside as redundant validators (``*_covariance_printed``); one
of them, the Gamma-increment ``cov_z_zlog`` entry, is knowingly
inconsistent with the derivation path and is retained only so tests can
document which side the Monte Carlo evidence supports.

Dirichlet raw moments follow from the tilting identity
``E(X_i g(X)) = (alpha_i / alpha0) E'(g)`` where ``E'`` is the
expectation under the parameter vector with ``alpha_i`` raised by one,
together with the Beta log-moments ``E log X_i = Psi(alpha_i, alpha0)``
and ``Var log X_i = Psi_1(alpha_i, alpha0)`` (``Psi``/``Psi_1`` are
digamma/trigamma differences).  Gamma-increment moments use
``E(Z^m log^q Z)`` in closed form; increments of distinct coordinates
are independent, so product moments factorize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SampleMatrix, delta_transform
from .specialfn import digamma, digamma_diff, ln_gamma, polygamma, polygamma_diff

__all__ = [
    "CatalogError",
    "MomentId",
    "DirichletBasicMoments",
    "dirichlet_basic_moments",
    "dirichlet_raw_moment",
    "dirichlet_covariance",
    "dirichlet_covariance_printed",
    "mgamma_raw_moment",
    "mgamma_covariance",
    "mgamma_covariance_printed",
    "covariance_from_raw",
    "covariance_observables",
    "has_printed_form",
    "raw_moment_ids",
    "covariance_ids",
    "moment_value",
    "printed_value",
    "observable_draws",
    "mc_moment_estimate",
]


class CatalogError(ValueError):
    """A moment identity is not part of the catalog."""


@dataclass(frozen=True)
class MomentId:
    """Identifies one catalog formula instance.

    ``i``/``j`` are 1-based coordinate indices (0 meaning unused), and
    ``m``/``mi``/``mj`` are powers for the kinds that take them.
    """

    family: str
    kind: str
    i: int = 0
    j: int = 0
    m: int = 1
    mi: int = 1
    mj: int = 1


# Argument profile of every kind: which of (i, j, m, mi, mj) it reads.
_RAW_KINDS = {
    "dirichlet": {
        "x_pow": ("i", "m"),  # E(X_i^m)
        "x_pow_pair": ("i", "j", "mi", "mj"),  # E(X_i^mi X_j^mj)
        "log_x": ("i",),  # E(log X_i)
        "log2_x": ("i",),  # E(log^2 X_i)
        "x_log_x": ("i",),  # E(X_i log X_i)
        "x_log_other": ("i", "j"),  # E(X_i log X_j)
        "xx_log_other": ("i", "j"),  # E(X_i X_j log X_j)
        "log_x_log_other": ("i", "j"),  # E(log X_i log X_j)
        "x_log_x_log_other": ("i", "j"),  # E(X_i log X_i log X_j)
        "xx_log_both": ("i", "j"),  # E(X_i X_j log X_i log X_j)
        "x2_log_x": ("i",),  # E(X_i^2 log X_i)
        "x_log2_x": ("i",),  # E(X_i log^2 X_i)
        "x2_log2_x": ("i",),  # E(X_i^2 log^2 X_i)
    },
    "mgamma": {
        "z_pow": ("i", "m"),  # E(Z_i^m)
        "z_pow_log": ("i", "m"),  # E(Z_i^m log Z_i)
        "z_pow_log2": ("i", "m"),  # E(Z_i^m log^2 Z_i)
        "log_z": ("i",),  # E(log Z_i)
        "log2_z": ("i",),  # E(log^2 Z_i)
        "xk_pow": ("m",),  # E(X_k^m)
    },
}

_COV_KINDS = {
    "dirichlet": {
        "var_x_pow": ("i", "m"),  # V(X_i^m)
        "var_log_x": ("i",),  # V(log X_i)
        "var_x_log_x": ("i",),  # V(X_i log X_i), derived only
        "cov_x_x": ("i", "j"),  # C(X_i, X_j)
        "cov_x_xsq_same": ("i",),  # C(X_i, X_i^2)
        "cov_x_xsq_other": ("i", "j"),  # C(X_i, X_j^2)
        "cov_xsq_xsq": ("i", "j"),  # C(X_i^2, X_j^2)
        "cov_x_log_same": ("i",),  # C(X_i, log X_i)
        "cov_x_log_other": ("i", "j"),  # C(X_i, log X_j)
        "cov_log_log": ("i", "j"),  # C(log X_i, log X_j)
        "cov_x_xlog_same": ("i",),  # C(X_i, X_i log X_i)
        "cov_x_xlog_other": ("i", "j"),  # C(X_i, X_j log X_j)
        "cov_log_xlog_same": ("i",),  # C(log X_i, X_i log X_i)
        "cov_log_xlog_other": ("i", "j"),  # C(log X_i, X_j log X_j)
        "cov_xlog_xlog_other": ("i", "j"),  # C(X_i log X_i, X_j log X_j), derived only
    },
    "mgamma": {
        "var_z": ("i",),  # V(Z_i)
        "var_z_sq": ("i",),  # V(Z_i^2)
        "var_log_z": ("i",),  # V(log Z_i)
        "var_z_log_z": ("i",),  # V(Z_i log Z_i)
        "cov_z_zsq": ("i",),  # C(Z_i, Z_i^2)
        "cov_z_log_z": ("i",),  # C(Z_i, log Z_i)
        "cov_z_zlog": ("i",),  # C(Z_i, Z_i log Z_i)
        "cov_log_z_zlog": ("i",),  # C(log Z_i, Z_i log Z_i)
        "var_xk": (),  # V(X_k)
        "cov_z_xk": ("i",),  # C(Z_i, X_k), derived only
        "cov_log_z_xk": ("i",),  # C(log Z_i, X_k), derived only
        "cov_zlog_xk": ("i",),  # C(Z_i log Z_i, X_k), derived only
    },
}


def _check_id(mid: MomentId, table, k: int) -> MomentId:
    if mid.family not in table:
        raise CatalogError(f"unknown family {mid.family!r}")
    kinds = table[mid.family]
    if mid.kind not in kinds:
        raise CatalogError(f"unknown {mid.family} kind {mid.kind!r}")
    uses = kinds[mid.kind]
    if "i" in uses and not 1 <= mid.i <= k:
        raise CatalogError(f"index i={mid.i} outside 1..{k}")
    if "j" in uses:
        if not 1 <= mid.j <= k:
            raise CatalogError(f"index j={mid.j} outside 1..{k}")
        if mid.j == mid.i:
            raise CatalogError(f"kind {mid.kind!r} requires i != j")
    for p in ("m", "mi", "mj"):
        if p in uses and getattr(mid, p) < 1:
            raise CatalogError(f"power {p} must be >= 1")
    return mid


def _rising(a: float, m: int) -> float:
    """Rising factorial a (a+1) ... (a+m-1), in log space once a+m > 30."""
    if m == 0:
        return 1.0
    if a + m <= 30.0:
        out = 1.0
        for r in range(m):
            out *= a + r
        return out
    return math.exp(ln_gamma(a + m) - ln_gamma(a))


def _psi(a, b):
    return digamma_diff(a, b)


def _psi1(a, b):
    return polygamma_diff(1, a, b)


# ---------------------------------------------------------------------------
# Dirichlet raw moments
# ---------------------------------------------------------------------------


def dirichlet_raw_moment(params, mid: MomentId) -> float:
    """Closed-form raw moment of a Dirichlet vector."""
    mid = _check_id(mid, _RAW_KINDS, params.k)
    a0 = params.alpha0
    ai = params.alpha[mid.i - 1] if mid.i else 0.0
    aj = params.alpha[mid.j - 1] if mid.j else 0.0
    kind = mid.kind
    if kind == "x_pow":
        return _rising(ai, mid.m) / _rising(a0, mid.m)
    if kind == "x_pow_pair":
        return (
            _rising(ai, mid.mi)
            * _rising(aj, mid.mj)
            / _rising(a0, mid.mi + mid.mj)
        )
    if kind == "log_x":
        return _psi(ai, a0)
    if kind == "log2_x":
        return _psi(ai, a0) ** 2 + _psi1(ai, a0)
    if kind == "x_log_x":
        return ai / a0 * _psi(ai + 1, a0 + 1)
    if kind == "x_log_other":
        return ai / a0 * _psi(aj, a0 + 1)
    if kind == "xx_log_other":
        return ai * aj / (a0 * (a0 + 1)) * _psi(aj + 1, a0 + 2)
    if kind == "log_x_log_other":
        return _psi(ai, a0) * _psi(aj, a0) - polygamma(1, a0)
    if kind == "x_log_x_log_other":
        return (
            ai
            / a0
            * (_psi(ai + 1, a0 + 1) * _psi(aj, a0 + 1) - polygamma(1, a0 + 1))
        )
    if kind == "xx_log_both":
        return (
            ai
            * aj
            / (a0 * (a0 + 1))
            * (_psi(ai + 1, a0 + 2) * _psi(aj + 1, a0 + 2) - polygamma(1, a0 + 2))
        )
    if kind == "x2_log_x":
        return ai * (ai + 1) / (a0 * (a0 + 1)) * _psi(ai + 2, a0 + 2)
    if kind == "x_log2_x":
        return ai / a0 * (_psi(ai + 1, a0 + 1) ** 2 + _psi1(ai + 1, a0 + 1))
    if kind == "x2_log2_x":
        return (
            ai
            * (ai + 1)
            / (a0 * (a0 + 1))
            * (_psi(ai + 2, a0 + 2) ** 2 + _psi1(ai + 2, a0 + 2))
        )
    raise CatalogError(f"unhandled kind {kind!r}")  # pragma: no cover


@dataclass(frozen=True)
class DirichletBasicMoments:
    """The four first-order quantities estimators are built from."""

    mean: float  # E(X_i)
    variance: float  # V(X_i)
    mean_log: float  # E(log X_i)
    cov_x_log: float  # C(X_i, log X_i)


def dirichlet_basic_moments(params, i: int) -> DirichletBasicMoments:
    """Mean, variance, log-mean, and x-log covariance of coordinate ``i``."""
    if not 1 <= i <= params.k:
        raise CatalogError(f"index i={i} outside 1..{params.k}")
    a0 = params.alpha0
    ai = params.alpha[i - 1]
    return DirichletBasicMoments(
        mean=ai / a0,
        variance=ai * (a0 - ai) / (a0 * a0 * (a0 + 1)),
        mean_log=_psi(ai, a0),
        cov_x_log=(a0 - ai) / (a0 * a0),
    )


# ---------------------------------------------------------------------------
# Gamma-increment (mgamma) raw moments
# ---------------------------------------------------------------------------


def _z_term_mean(alpha: float, beta: float, p: int, q: int) -> float:
    """E(Z^p log^q Z) for Z ~ Gamma(alpha, beta), q in {0, 1, 2}."""
    base = beta**p * _rising(alpha, p)
    if q == 0:
        return base
    bracket = digamma(alpha + p) + math.log(beta)
    if q == 1:
        return base * bracket
    if q == 2:
        return base * (polygamma(1, alpha + p) + bracket * bracket)
    raise CatalogError("log powers above 2 are outside the catalog")


def mgamma_raw_moment(params, mid: MomentId) -> float:
    """Closed-form raw moment of Gamma increments or of the total."""
    mid = _check_id(mid, _RAW_KINDS, params.k)
    beta = params.beta
    kind = mid.kind
    if kind == "xk_pow":
        return _z_term_mean(params.alpha0, beta, mid.m, 0)
    ai = params.alpha[mid.i - 1]
    if kind == "z_pow":
        return _z_term_mean(ai, beta, mid.m, 0)
    if kind == "z_pow_log":
        return _z_term_mean(ai, beta, mid.m, 1)
    if kind == "z_pow_log2":
        return _z_term_mean(ai, beta, mid.m, 2)
    if kind == "log_z":
        return _z_term_mean(ai, beta, 0, 1)
    if kind == "log2_z":
        return _z_term_mean(ai, beta, 0, 2)
    raise CatalogError(f"unhandled kind {kind!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Observables and the raw-product derivation path
# ---------------------------------------------------------------------------

# Observable signature: {coordinate (1-based): (power, log power)}.
def _dir_signature(mid: MomentId) -> dict:
    kind = mid.kind
    if kind == "x_pow":
        return {mid.i: (mid.m, 0)}
    if kind == "x_pow_pair":
        return {mid.i: (mid.mi, 0), mid.j: (mid.mj, 0)}
    if kind == "log_x":
        return {mid.i: (0, 1)}
    if kind == "log2_x":
        return {mid.i: (0, 2)}
    if kind == "x_log_x":
        return {mid.i: (1, 1)}
    if kind == "x_log_other":
        return {mid.i: (1, 0), mid.j: (0, 1)}
    if kind == "xx_log_other":
        return {mid.i: (1, 0), mid.j: (1, 1)}
    if kind == "log_x_log_other":
        return {mid.i: (0, 1), mid.j: (0, 1)}
    if kind == "x_log_x_log_other":
        return {mid.i: (1, 1), mid.j: (0, 1)}
    if kind == "xx_log_both":
        return {mid.i: (1, 1), mid.j: (1, 1)}
    if kind == "x2_log_x":
        return {mid.i: (2, 1)}
    if kind == "x_log2_x":
        return {mid.i: (1, 2)}
    if kind == "x2_log2_x":
        return {mid.i: (2, 2)}
    raise CatalogError(f"kind {mid.kind!r} is not a dirichlet observable")


_DIR_SINGLE_BY_SIGNATURE = {
    (0, 1): "log_x",
    (0, 2): "log2_x",
    (1, 1): "x_log_x",
    (2, 1): "x2_log_x",
    (1, 2): "x_log2_x",
    (2, 2): "x2_log2_x",
}


def _dir_signature_to_id(sig: dict) -> MomentId:
    """Map a product signature back to a raw catalog entry."""
    items = sorted(sig.items())
    if len(items) == 1:
        (i, (p, q)), = items
        if q == 0 and p >= 1:
            return MomentId("dirichlet", "x_pow", i=i, m=p)
        kind = _DIR_SINGLE_BY_SIGNATURE.get((p, q))
        if kind is not None:
            return MomentId("dirichlet", kind, i=i)
    elif len(items) == 2:
        (i, (pi, qi)), (j, (pj, qj)) = items
        if qi == 0 and qj == 0:
            return MomentId("dirichlet", "x_pow_pair", i=i, j=j, mi=pi, mj=pj)
        if (pi, qi, pj, qj) == (1, 0, 0, 1):
            return MomentId("dirichlet", "x_log_other", i=i, j=j)
        if (pi, qi, pj, qj) == (0, 1, 1, 0):
            return MomentId("dirichlet", "x_log_other", i=j, j=i)
        if (pi, qi, pj, qj) == (1, 0, 1, 1):
            return MomentId("dirichlet", "xx_log_other", i=i, j=j)
        if (pi, qi, pj, qj) == (1, 1, 1, 0):
            return MomentId("dirichlet", "xx_log_other", i=j, j=i)
        if (pi, qi, pj, qj) == (0, 1, 0, 1):
            return MomentId("dirichlet", "log_x_log_other", i=i, j=j)
        if (pi, qi, pj, qj) == (1, 1, 0, 1):
            return MomentId("dirichlet", "x_log_x_log_other", i=i, j=j)
        if (pi, qi, pj, qj) == (0, 1, 1, 1):
            return MomentId("dirichlet", "x_log_x_log_other", i=j, j=i)
        if (pi, qi, pj, qj) == (1, 1, 1, 1):
            return MomentId("dirichlet", "xx_log_both", i=i, j=j)
    raise CatalogError(f"product moment with signature {sig} is not in the catalog")


def _merge_signatures(u: dict, v: dict) -> dict:
    out = dict(u)
    for c, (p, q) in v.items():
        p0, q0 = out.get(c, (0, 0))
        out[c] = (p0 + p, q0 + q)
    return out


def _mgamma_terms(mid: MomentId, k: int):
    """Expand an mgamma observable into [(coef, {coord: (p, q)})] terms."""
    kind = mid.kind
    if kind == "z_pow":
        return [(1.0, {mid.i: (mid.m, 0)})]
    if kind == "z_pow_log":
        return [(1.0, {mid.i: (mid.m, 1)})]
    if kind == "z_pow_log2":
        return [(1.0, {mid.i: (mid.m, 2)})]
    if kind == "log_z":
        return [(1.0, {mid.i: (0, 1)})]
    if kind == "log2_z":
        return [(1.0, {mid.i: (0, 2)})]
    if kind == "xk_pow":
        # X_k = Z_1 + ... + Z_k, expanded multilinearly.
        if mid.m == 1:
            return [(1.0, {c: (1, 0)}) for c in range(1, k + 1)]
        if mid.m == 2:
            return [
                (1.0, _merge_signatures({a: (1, 0)}, {b: (1, 0)}))
                for a in range(1, k + 1)
                for b in range(1, k + 1)
            ]
        raise CatalogError("xk_pow expands as an observable only for m <= 2")
    raise CatalogError(f"kind {mid.kind!r} is not an mgamma observable")


def _mgamma_expected_terms(terms, params) -> float:
    total = 0.0
    for coef, sig in terms:
        value = coef
        for c, (p, q) in sig.items():
            if q > 2:
                raise CatalogError("log powers above 2 are outside the catalog")
            value *= _z_term_mean(params.alpha[c - 1], params.beta, p, q)
        total += value
    return total


def _product_terms(u_terms, v_terms):
    return [
        (cu * cv, _merge_signatures(su, sv))
        for cu, su in u_terms
        for cv, sv in v_terms
    ]


def covariance_from_raw(family: str, params, u: MomentId, v: MomentId) -> float:
    """``Cov(U, V) = E(UV) - E(U) E(V)`` assembled from raw catalog entries."""
    u = _check_id(u, _RAW_KINDS, params.k)
    v = _check_id(v, _RAW_KINDS, params.k)
    if u.family != family or v.family != family:
        raise CatalogError("observable ids must match the requested family")
    if family == "dirichlet":
        product = _dir_signature_to_id(
            _merge_signatures(_dir_signature(u), _dir_signature(v))
        )
        e_uv = dirichlet_raw_moment(params, product)
        return e_uv - dirichlet_raw_moment(params, u) * dirichlet_raw_moment(
            params, v
        )
    if family == "mgamma":
        ut = _mgamma_terms(u, params.k)
        vt = _mgamma_terms(v, params.k)
        e_uv = _mgamma_expected_terms(_product_terms(ut, vt), params)
        e_u = _mgamma_expected_terms(ut, params)
        e_v = _mgamma_expected_terms(vt, params)
        return e_uv - e_u * e_v
    raise CatalogError(f"unknown family {family!r}")


# Covariance kind -> the pair of raw observables it denotes.
def covariance_observables(mid: MomentId) -> tuple:
    """The ``(U, V)`` raw observables behind a covariance identity."""
    fam, kind = mid.family, mid.kind
    if fam == "dirichlet":
        x = lambda i, m=1: MomentId(fam, "x_pow", i=i, m=m)
        lg = lambda i: MomentId(fam, "log_x", i=i)
        xlg = lambda i: MomentId(fam, "x_log_x", i=i)
        pairs = {
            "var_x_pow": (x(mid.i, mid.m), x(mid.i, mid.m)),
            "var_log_x": (lg(mid.i), lg(mid.i)),
            "var_x_log_x": (xlg(mid.i), xlg(mid.i)),
            "cov_x_x": (x(mid.i), x(mid.j)),
            "cov_x_xsq_same": (x(mid.i), x(mid.i, 2)),
            "cov_x_xsq_other": (x(mid.i), x(mid.j, 2)),
            "cov_xsq_xsq": (x(mid.i, 2), x(mid.j, 2)),
            "cov_x_log_same": (x(mid.i), lg(mid.i)),
            "cov_x_log_other": (x(mid.i), lg(mid.j)),
            "cov_log_log": (lg(mid.i), lg(mid.j)),
            "cov_x_xlog_same": (x(mid.i), xlg(mid.i)),
            "cov_x_xlog_other": (x(mid.i), xlg(mid.j)),
            "cov_log_xlog_same": (lg(mid.i), xlg(mid.i)),
            "cov_log_xlog_other": (lg(mid.i), xlg(mid.j)),
            "cov_xlog_xlog_other": (xlg(mid.i), xlg(mid.j)),
        }
    elif fam == "mgamma":
        z = lambda i, m=1: MomentId(fam, "z_pow", i=i, m=m)
        lz = lambda i: MomentId(fam, "log_z", i=i)
        zlz = lambda i: MomentId(fam, "z_pow_log", i=i, m=1)
        xk = MomentId(fam, "xk_pow", m=1)
        pairs = {
            "var_z": (z(mid.i), z(mid.i)),
            "var_z_sq": (z(mid.i, 2), z(mid.i, 2)),
            "var_log_z": (lz(mid.i), lz(mid.i)),
            "var_z_log_z": (zlz(mid.i), zlz(mid.i)),
            "cov_z_zsq": (z(mid.i), z(mid.i, 2)),
            "cov_z_log_z": (z(mid.i), lz(mid.i)),
            "cov_z_zlog": (z(mid.i), zlz(mid.i)),
            "cov_log_z_zlog": (lz(mid.i), zlz(mid.i)),
            "var_xk": (xk, xk),
            "cov_z_xk": (z(mid.i), xk),
            "cov_log_z_xk": (lz(mid.i), xk),
            "cov_zlog_xk": (zlz(mid.i), xk),
        }
    else:
        raise CatalogError(f"unknown family {fam!r}")
    if kind not in pairs:
        raise CatalogError(f"kind {kind!r} is not a covariance identity")
    return pairs[kind]


def dirichlet_covariance(params, mid: MomentId) -> float:
    """Dirichlet covariance via the raw-moment derivation path."""
    mid = _check_id(mid, _COV_KINDS, params.k)
    u, v = covariance_observables(mid)
    return covariance_from_raw("dirichlet", params, u, v)


def mgamma_covariance(params, mid: MomentId) -> float:
    """Gamma-increment covariance via the raw-moment derivation path."""
    mid = _check_id(mid, _COV_KINDS, params.k)
    u, v = covariance_observables(mid)
    return covariance_from_raw("mgamma", params, u, v)


# ---------------------------------------------------------------------------
# Printed closed forms (redundant validators)
# ---------------------------------------------------------------------------


def dirichlet_covariance_printed(params, mid: MomentId) -> float:
    """Closed-form Dirichlet covariances, kept as a second route."""
    mid = _check_id(mid, _COV_KINDS, params.k)
    a0 = params.alpha0
    ai = params.alpha[mid.i - 1] if mid.i else 0.0
    aj = params.alpha[mid.j - 1] if mid.j else 0.0
    bi = a0 - ai
    kind = mid.kind
    if kind == "var_x_pow":
        m = mid.m
        return (
            _rising(ai, 2 * m) / _rising(a0, 2 * m)
            - (_rising(ai, m) / _rising(a0, m)) ** 2
        )
    if kind == "var_log_x":
        return _psi1(ai, a0)
    if kind == "cov_x_x":
        return -ai * aj / (a0 * a0 * (a0 + 1))
    if kind == "cov_x_xsq_same":
        return 2 * ai * bi * (ai + 1) / (a0 * a0 * (a0 + 1) * (a0 + 2))
    if kind == "cov_x_xsq_other":
        return -2 * ai * aj * (aj + 1) / (a0 * a0 * (a0 + 1) * (a0 + 2))
    if kind == "cov_xsq_xsq":
        return (
            -2
            * ai
            * (ai + 1)
            * aj
            * (aj + 1)
            * (2 * a0 + 3)
            / (a0 * a0 * (a0 + 1) ** 2 * (a0 + 2) * (a0 + 3))
        )
    if kind == "cov_x_log_same":
        return bi / (a0 * a0)
    if kind == "cov_x_log_other":
        return -ai / (a0 * a0)
    if kind == "cov_log_log":
        return -polygamma(1, a0)
    if kind == "cov_x_xlog_same":
        return ai * bi / (a0 * a0 * (a0 + 1)) * (_psi(ai + 1, a0 + 2) + 1.0)
    if kind == "cov_x_xlog_other":
        return -ai * aj / (a0 * a0 * (a0 + 1)) * (_psi(aj + 1, a0 + 2) + 1.0)
    if kind == "cov_log_xlog_same":
        return bi / (a0 * a0) * _psi(ai + 1, a0 + 1) + ai / a0 * _psi1(
            ai + 1, a0 + 1
        )
    if kind == "cov_log_xlog_other":
        return -aj / (a0 * a0) * _psi(aj + 1, a0 + 1) - aj / a0 * polygamma(
            1, a0 + 1
        )
    raise CatalogError(f"no printed closed form for dirichlet {kind!r}")


def mgamma_covariance_printed(params, mid: MomentId) -> float:
    """Closed-form Gamma-increment covariances, kept as a second route.

    ``cov_z_zlog`` reproduces the closed form exactly as printed, whose
    first bracket is squared; the derivation path (and Monte Carlo)
    disagree with it, so it exists only as the documented mismatch.
    """
    mid = _check_id(mid, _COV_KINDS, params.k)
    beta = params.beta
    lb = math.log(beta)
    kind = mid.kind
    if kind == "var_xk":
        return params.alpha0 * beta * beta
    ai = params.alpha[mid.i - 1] if mid.i else 0.0
    if kind == "var_z":
        return ai * beta * beta
    if kind == "var_z_sq":
        return 2 * ai * (ai + 1) * (2 * ai + 3) * beta**4
    if kind == "var_log_z":
        return polygamma(1, ai)
    if kind == "var_z_log_z":
        return ai * (ai + 1) * beta * beta * (
            polygamma(1, ai + 2) + (digamma(ai + 2) + lb) ** 2
        ) - ai * ai * beta * beta * (digamma(ai + 1) + lb) ** 2
    if kind == "cov_z_zsq":
        return 2 * ai * (ai + 1) * beta**3
    if kind == "cov_z_log_z":
        return beta
    if kind == "cov_z_zlog":
        return (
            ai * (ai + 1) * beta * beta * (digamma(ai + 2) + lb) ** 2
            - ai * ai * beta * beta * (digamma(ai + 1) + lb)
        )
    if kind == "cov_log_z_zlog":
        return ai * beta * (
            polygamma(1, ai + 1) + (digamma(ai + 1) + lb) ** 2
        ) - ai * beta * (digamma(ai) + lb) * (digamma(ai + 1) + lb)
    raise CatalogError(f"no printed closed form for mgamma {kind!r}")


_PRINTED_DERIVED_ONLY = {
    ("dirichlet", "var_x_log_x"),
    ("dirichlet", "cov_xlog_xlog_other"),
    ("mgamma", "cov_z_xk"),
    ("mgamma", "cov_log_z_xk"),
    ("mgamma", "cov_zlog_xk"),
}


def has_printed_form(mid: MomentId) -> bool:
    """Whether a covariance id has a printed closed form to validate."""
    if mid.kind in _COV_KINDS.get(mid.family, {}):
        return (mid.family, mid.kind) not in _PRINTED_DERIVED_ONLY
    return False


# ---------------------------------------------------------------------------
# Catalog enumeration and Monte Carlo estimation
# ---------------------------------------------------------------------------


def raw_moment_ids(family: str, k: int):
    """One instance of every raw kind for each valid index choice."""
    out = []
    kinds = _RAW_KINDS[family]
    for kind, uses in kinds.items():
        if "j" in uses:
            for i in range(1, k + 1):
                for j in range(1, k + 1):
                    if i == j:
                        continue
                    if kind == "x_pow_pair":
                        for mi, mj in ((1, 1), (2, 1), (2, 2)):
                            out.append(
                                MomentId(family, kind, i=i, j=j, mi=mi, mj=mj)
                            )
                    else:
                        out.append(MomentId(family, kind, i=i, j=j))
        elif "i" in uses:
            for i in range(1, k + 1):
                if "m" in uses:
                    for m in (1, 2):
                        out.append(MomentId(family, kind, i=i, m=m))
                else:
                    out.append(MomentId(family, kind, i=i))
        else:  # xk_pow
            for m in (1, 2):
                out.append(MomentId(family, kind, m=m))
    return out


def covariance_ids(family: str, k: int, printed_only: bool = False):
    """One instance of every covariance kind for each valid index choice."""
    out = []
    for kind, uses in _COV_KINDS[family].items():
        if "j" in uses:
            ids = [
                MomentId(family, kind, i=i, j=j)
                for i in range(1, k + 1)
                for j in range(1, k + 1)
                if i != j
            ]
        elif "i" in uses:
            if "m" in uses:
                ids = [
                    MomentId(family, kind, i=i, m=m)
                    for i in range(1, k + 1)
                    for m in (1, 2)
                ]
            else:
                ids = [MomentId(family, kind, i=i) for i in range(1, k + 1)]
        else:
            ids = [MomentId(family, kind)]
        if printed_only:
            ids = [mid for mid in ids if has_printed_form(mid)]
        out.extend(ids)
    return out


def moment_value(params, mid: MomentId) -> float:
    """Catalog value for either a raw or a covariance id."""
    if mid.kind in _RAW_KINDS.get(mid.family, {}):
        if mid.family == "dirichlet":
            return dirichlet_raw_moment(params, mid)
        return mgamma_raw_moment(params, mid)
    if mid.kind in _COV_KINDS.get(mid.family, {}):
        if mid.family == "dirichlet":
            return dirichlet_covariance(params, mid)
        return mgamma_covariance(params, mid)
    raise CatalogError(f"unknown {mid.family} kind {mid.kind!r}")


def printed_value(params, mid: MomentId) -> float:
    """Printed-form value: raw ids are their own closed form."""
    if mid.kind in _RAW_KINDS.get(mid.family, {}):
        return moment_value(params, mid)
    if mid.family == "dirichlet":
        return dirichlet_covariance_printed(params, mid)
    return mgamma_covariance_printed(params, mid)


def observable_draws(mid: MomentId, sample: SampleMatrix) -> np.ndarray:
    """Per-draw values of the observable a raw id denotes."""
    if sample.family != mid.family:
        raise ValueError(f"sample family {sample.family!r} != id family {mid.family!r}")
    mid = _check_id(mid, _RAW_KINDS, sample.k)
    if mid.family == "dirichlet":
        x = sample.data
        sig = _dir_signature(mid)
        out = np.ones(sample.n)
        for c, (p, q) in sig.items():
            col = x[:, c - 1]
            if p:
                out = out * col**p
            if q:
                out = out * np.log(col) ** q
        return out
    z = delta_transform(sample)
    if mid.kind == "xk_pow":
        return sample.data[:, -1] ** mid.m
    col = z[:, mid.i - 1]
    if mid.kind == "z_pow":
        return col**mid.m
    if mid.kind == "z_pow_log":
        return col**mid.m * np.log(col)
    if mid.kind == "z_pow_log2":
        return col**mid.m * np.log(col) ** 2
    if mid.kind == "log_z":
        return np.log(col)
    if mid.kind == "log2_z":
        return np.log(col) ** 2
    raise CatalogError(f"unhandled kind {mid.kind!r}")  # pragma: no cover


def mc_moment_estimate(mid: MomentId, sample: SampleMatrix):
    """Monte Carlo estimate and standard error for any catalog id."""
    if mid.kind in _RAW_KINDS.get(mid.family, {}):
        vals = observable_draws(mid, sample)
        n = vals.size
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))
    u_id, v_id = covariance_observables(mid)
    u = observable_draws(u_id, sample)
    v = observable_draws(v_id, sample)
    n = u.size
    w = (u - u.mean()) * (v - v.mean())
    est = float(w.sum() / (n - 1))
    return est, float(w.std(ddof=1) / math.sqrt(n))
