"""Parameter types, samplers, densities, and transforms for the two families.

The Dirichlet family ``D_k(alpha)`` lives on the open standard simplex;
the multivariate Gamma family ``MG_k(alpha, beta)`` is the law of the
cumulative sums ``X_i = Z_1 + ... + Z_i`` of independent Gamma
increments ``Z_i ~ G(alpha_i, beta)``.  The two are linked by the
difference operator ``Z = delta(X)`` and the projection
``W = Z / X_k``, which is Dirichlet-distributed and independent of
``X_k``.  Both families are canonical exponential families: Dirichlet
with sufficient statistic ``log X``, MGamma with ``(log Z, X_k)``; the
``log_partition`` values here are the corresponding normalizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .specialfn import ln_gamma

__all__ = [
    "SIMPLEX_TOL",
    "SupportError",
    "DirichletParams",
    "MGammaParams",
    "SampleMatrix",
    "RngSpec",
    "sample_dirichlet",
    "sample_mgamma",
    "log_density_dirichlet",
    "log_density_mgamma",
    "delta_transform",
    "dirichlet_projection",
    "sufficient_stats",
    "log_partition",
]

# Tolerance on |sum(x) - 1| for points claimed to lie on the simplex.
SIMPLEX_TOL = 1e-9

_FAMILIES = ("dirichlet", "mgamma")


class SupportError(ValueError):
    """A point or sample lies outside the support of its family."""


def _sum_left_to_right(values):
    """Plain left-to-right float summation (the documented alpha0)."""
    total = 0.0
    for v in values:
        total += float(v)
    return total


def _positive_vector(alpha, min_k):
    arr = np.atleast_1d(np.asarray(alpha, dtype=float)).copy()
    if arr.ndim != 1 or arr.size < min_k:
        raise ValueError(f"alpha must be a vector with at least {min_k} components")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("all shape parameters must be positive and finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DirichletParams:
    """Shape vector of a Dirichlet distribution on the open simplex."""

    alpha: np.ndarray
    alpha0: float = field(init=False)

    def __post_init__(self):
        alpha = _positive_vector(self.alpha, min_k=2)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha0", _sum_left_to_right(alpha))

    @property
    def k(self) -> int:
        return self.alpha.size


@dataclass(frozen=True, eq=False)
class MGammaParams:
    """Shape vector and common scale of a multivariate Gamma distribution."""

    alpha: np.ndarray
    beta: float
    alpha0: float = field(init=False)

    def __post_init__(self):
        alpha = _positive_vector(self.alpha, min_k=1)
        beta = float(self.beta)
        if not np.isfinite(beta) or beta <= 0.0:
            raise ValueError("beta must be positive and finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha0", _sum_left_to_right(alpha))

    @property
    def k(self) -> int:
        return self.alpha.size


def _check_simplex_rows(data):
    if np.any(data <= 0.0) or np.any(data >= 1.0):
        raise SupportError("dirichlet entries must lie strictly inside (0, 1)")
    sums = data.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
        worst = float(np.abs(sums - 1.0).max())
        raise SupportError(
            f"dirichlet rows must sum to 1 within {SIMPLEX_TOL:g} "
            f"(worst deviation {worst:.3e})"
        )


def _check_increasing_rows(data):
    if np.any(data[:, 0] <= 0.0):
        raise SupportError("mgamma coordinates must be positive")
    if data.shape[1] > 1 and np.any(np.diff(data, axis=1) <= 0.0):
        raise SupportError("mgamma rows must be strictly increasing")


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """An N x k observation matrix validated against a family support."""

    data: np.ndarray
    family: str

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}")
        data = np.asarray(self.data, dtype=float).copy()
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("data must be a non-empty N x k matrix")
        if not np.all(np.isfinite(data)):
            raise SupportError("sample contains non-finite entries")
        if self.family == "dirichlet":
            _check_simplex_rows(data)
        else:
            _check_increasing_rows(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class RngSpec:
    """Addressable randomness: a 64-bit seed plus a 64-bit substream index.

    Identical ``(seed, stream)`` pairs always reproduce the same draws;
    distinct streams under one seed are statistically independent, so
    every Monte Carlo replicate can own its own stream.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer")
            if not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer")
            object.__setattr__(self, name, int(value))

    def generator(self) -> np.random.Generator:
        """A fresh counter-based generator keyed by (seed, stream)."""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


# For very small shapes a generated row can round onto the support boundary
# (a simplex coordinate becomes exactly 1.0 when its partners fall below half
# an ulp, or a cumulative sum ties).  Such rows are redrawn from the same
# stream so the samplers stay total and deterministic; the cap bounds the
# retries for shapes so small that almost no row is representable.
_REDRAW_ROUNDS = 64


def _interior_rows(draw, valid, n: int, what: str) -> np.ndarray:
    rows = draw(n)
    bad = ~valid(rows)
    for _ in range(_REDRAW_ROUNDS):
        count = int(bad.sum())
        if count == 0:
            return rows
        rows[bad] = draw(count)
        bad[bad] = ~valid(rows[bad])
    raise SupportError(
        f"could not draw {what} rows inside the open support; "
        "the shape parameters are too small to represent samples in binary64"
    )


def sample_dirichlet(params: DirichletParams, n: int, rng: RngSpec) -> SampleMatrix:
    """Draw ``n`` rows from ``D_k(alpha)`` by Gamma normalization."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rng.generator()

    def draw(count):
        g = gen.standard_gamma(params.alpha, size=(count, params.k))
        with np.errstate(invalid="ignore"):
            return g / g.sum(axis=1, keepdims=True)

    def valid(rows):
        return (rows > 0.0).all(axis=1) & (rows < 1.0).all(axis=1)

    return SampleMatrix(_interior_rows(draw, valid, n, "simplex"), "dirichlet")


def sample_mgamma(params: MGammaParams, n: int, rng: RngSpec) -> SampleMatrix:
    """Draw ``n`` rows from ``MG_k(alpha, beta)`` as Gamma cumulative sums."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rng.generator()

    def draw(count):
        z = params.beta * gen.standard_gamma(params.alpha, size=(count, params.k))
        return np.cumsum(z, axis=1)

    def valid(rows):
        return (rows[:, 0] > 0.0) & (np.diff(rows, axis=1) > 0.0).all(axis=1)

    return SampleMatrix(_interior_rows(draw, valid, n, "increasing"), "mgamma")


def _point(x, k, name="x"):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size != k:
        raise ValueError(f"{name} must be a vector of length {k}")
    if not np.all(np.isfinite(arr)):
        raise SupportError(f"{name} contains non-finite entries")
    return arr


def _simplex_point(x, k):
    arr = _point(x, k)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or abs(arr.sum() - 1.0) > SIMPLEX_TOL:
        raise SupportError("point is not strictly inside the standard simplex")
    return arr


def _increasing_point(x, k):
    arr = _point(x, k)
    if arr[0] <= 0.0 or (arr.size > 1 and np.any(np.diff(arr) <= 0.0)):
        raise SupportError("point must satisfy 0 < x_1 < ... < x_k")
    return arr


def log_density_dirichlet(params: DirichletParams, x) -> float:
    """Log density of ``D_k(alpha)`` at a point strictly inside the simplex."""
    arr = _simplex_point(x, params.k)
    return float(
        np.dot(params.alpha - 1.0, np.log(arr))
        - log_partition("dirichlet", params)
    )


def log_density_mgamma(params: MGammaParams, x) -> float:
    """Log density of ``MG_k(alpha, beta)`` at an increasing positive point."""
    arr = _increasing_point(x, params.k)
    z = np.diff(arr, prepend=0.0)
    return float(
        np.dot(params.alpha - 1.0, np.log(z))
        - arr[-1] / params.beta
        - log_partition("mgamma", params)
    )


def _require_family(sample: SampleMatrix, family: str):
    if sample.family != family:
        raise ValueError(f"expected a {family} sample, got {sample.family}")


def delta_transform(sample: SampleMatrix) -> np.ndarray:
    """Increments ``Z_i = X_i - X_{i-1}`` (with ``X_0 = 0``) of an mgamma sample."""
    _require_family(sample, "mgamma")
    return np.diff(sample.data, axis=1, prepend=0.0)


def dirichlet_projection(sample: SampleMatrix) -> SampleMatrix:
    """Project an mgamma sample to ``W = Z / X_k``, a Dirichlet sample."""
    _require_family(sample, "mgamma")
    if sample.k < 2:
        raise ValueError(
            "projection needs k >= 2: for k = 1 it is the constant 1"
        )
    z = delta_transform(sample)
    w = z / sample.data[:, -1:]
    return SampleMatrix(w, "dirichlet")


def sufficient_stats(family: str, x) -> np.ndarray:
    """Canonical sufficient statistic at a single point.

    Dirichlet: ``(log x_1, ..., log x_k)``; MGamma:
    ``(log z_1, ..., log z_k, x_k)`` with ``z`` the increments.
    """
    if family == "dirichlet":
        arr = np.asarray(x, dtype=float)
        arr = _simplex_point(arr, np.atleast_1d(arr).size)
        return np.log(arr)
    if family == "mgamma":
        arr = np.asarray(x, dtype=float)
        arr = _increasing_point(arr, np.atleast_1d(arr).size)
        z = np.diff(arr, prepend=0.0)
        return np.concatenate([np.log(z), arr[-1:]])
    raise ValueError(f"family must be one of {_FAMILIES}")


def log_partition(family: str, params) -> float:
    """Exponential-family normalizer A.

    Dirichlet: ``sum_i logGamma(alpha_i) - logGamma(alpha0)``; MGamma:
    ``sum_i logGamma(alpha_i) + alpha0 log beta``.  The gradient with
    respect to the natural parameter is the mean sufficient statistic.
    """
    if family == "dirichlet":
        return float(np.sum(ln_gamma(params.alpha)) - ln_gamma(params.alpha0))
    if family == "mgamma":
        return float(
            np.sum(ln_gamma(params.alpha)) + params.alpha0 * np.log(params.beta)
        )
    raise ValueError(f"family must be one of {_FAMILIES}")
