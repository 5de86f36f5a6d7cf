"""Tests for the moment and covariance catalogs.

Expected values are frozen from independent arithmetic (digamma and
trigamma recurrences, exponential-distribution moments) or checked
against Monte Carlo estimates at 4 standard errors with fixed seeds.
"""

import math

import numpy as np
import pytest

from momentfit.model import (
    DirichletParams,
    MGammaParams,
    RngSpec,
    sample_dirichlet,
    sample_mgamma,
)
from momentfit.moments import (
    CatalogError,
    MomentId,
    covariance_from_raw,
    covariance_ids,
    dirichlet_basic_moments,
    dirichlet_covariance,
    dirichlet_covariance_printed,
    dirichlet_raw_moment,
    has_printed_form,
    mc_moment_estimate,
    mgamma_covariance,
    mgamma_covariance_printed,
    mgamma_raw_moment,
    moment_value,
    printed_value,
    raw_moment_ids,
)

EULER_GAMMA = 0.5772156649015329


def dir_id(kind, **kw):
    return MomentId("dirichlet", kind, **kw)


def mg_id(kind, **kw):
    return MomentId("mgamma", kind, **kw)


# ---------------------------------------------------------------------------
# Frozen spot values
# ---------------------------------------------------------------------------


def test_dirichlet_basic_moments_spot():
    basics = dirichlet_basic_moments(DirichletParams([2.0, 3.0]), 1)
    assert basics.mean == pytest.approx(0.4, abs=1e-15)
    assert basics.variance == pytest.approx(0.04, abs=1e-15)
    # E log X_1 = -(1/2 + 1/3 + 1/4) = -13/12.
    assert basics.mean_log == pytest.approx(-13.0 / 12.0, abs=1e-13)
    assert basics.cov_x_log == pytest.approx(0.12, abs=1e-15)


def test_dirichlet_basic_moments_symmetry_and_signs():
    for c in (0.3, 1.0, 4.0):
        params = DirichletParams([c] * 4)
        for i in range(1, 5):
            basics = dirichlet_basic_moments(params, i)
            assert basics.mean == pytest.approx(0.25, rel=1e-14)
            assert basics.variance > 0
            assert basics.cov_x_log > 0
    with pytest.raises(CatalogError):
        dirichlet_basic_moments(DirichletParams([1.0, 1.0]), 3)


def test_dirichlet_raw_moment_spot():
    params = DirichletParams([2.0, 3.0])
    # E(X_1^2) = (2*3)/(5*6).
    assert dirichlet_raw_moment(params, dir_id("x_pow", i=1, m=2)) == pytest.approx(
        0.2, abs=1e-15
    )
    # E(X_1 X_2) = 2*3/(5*6).
    assert dirichlet_raw_moment(
        params, dir_id("x_pow_pair", i=1, j=2)
    ) == pytest.approx(0.2, abs=1e-15)
    # E(X_1 log X_2) = 0.4 * (-(1/3 + 1/4 + 1/5)) = -47/150.
    assert dirichlet_raw_moment(
        params, dir_id("x_log_other", i=1, j=2)
    ) == pytest.approx(-47.0 / 150.0, abs=1e-13)


def test_dirichlet_covariance_spot():
    params = DirichletParams([2.0, 3.0])
    assert dirichlet_covariance(params, dir_id("cov_x_x", i=1, j=2)) == pytest.approx(
        -0.04, abs=1e-13
    )
    # C(log X_1, log X_2) = -psi_1(5).
    assert dirichlet_covariance(
        params, dir_id("cov_log_log", i=1, j=2)
    ) == pytest.approx(-0.22132295573711533, abs=1e-13)


def test_mgamma_raw_moment_spot():
    assert mgamma_raw_moment(
        MGammaParams([2.0], beta=3.0), mg_id("z_pow", i=1, m=1)
    ) == pytest.approx(6.0, abs=1e-14)
    # E(Z log Z) for the standard exponential is psi(2) = 1 - gamma.
    assert mgamma_raw_moment(
        MGammaParams([1.0], beta=1.0), mg_id("z_pow_log", i=1, m=1)
    ) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-13)


def test_mgamma_covariance_spot():
    params = MGammaParams([1.0], beta=1.0)
    # V(Z^2) = E Z^4 - (E Z^2)^2 = 24 - 4 for the standard exponential.
    assert mgamma_covariance(params, mg_id("var_z_sq", i=1)) == pytest.approx(
        20.0, rel=1e-13
    )
    # C(Z, Z^2) = E Z^3 - E Z E Z^2 = 6 - 2.
    assert mgamma_covariance(params, mg_id("cov_z_zsq", i=1)) == pytest.approx(
        4.0, rel=1e-13
    )
    # C(Z, log Z) = beta, for any shape.
    for alpha, beta in ((1.0, 1.0), (2.0, 3.0), (0.4, 0.7)):
        got = mgamma_covariance(MGammaParams([alpha], beta=beta), mg_id("cov_z_log_z", i=1))
        assert got == pytest.approx(beta, rel=1e-12)


def test_mgamma_basic_identities():
    # E(X_k) = alpha0 beta, V(X_k) = alpha0 beta^2, E(Z_i) = alpha_i beta,
    # V(Z_i) = alpha_i beta^2, E(log Z_i) = psi(alpha_i) + log beta.
    params = MGammaParams([1.2, 3.4], beta=0.6)
    assert mgamma_raw_moment(params, mg_id("xk_pow", m=1)) == pytest.approx(
        4.6 * 0.6, rel=1e-14
    )
    assert mgamma_covariance(params, mg_id("var_xk")) == pytest.approx(
        4.6 * 0.36, rel=1e-12
    )
    assert mgamma_raw_moment(params, mg_id("z_pow", i=2, m=1)) == pytest.approx(
        3.4 * 0.6, rel=1e-14
    )
    assert mgamma_covariance(params, mg_id("var_z", i=2)) == pytest.approx(
        3.4 * 0.36, rel=1e-12
    )


# ---------------------------------------------------------------------------
# Structural identities
# ---------------------------------------------------------------------------


def test_basic_moments_are_catalog_specializations():
    rng = np.random.default_rng(1)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        params = DirichletParams(rng.uniform(0.2, 5.0, size=k))
        i = int(rng.integers(1, k + 1))
        basics = dirichlet_basic_moments(params, i)
        assert basics.mean == pytest.approx(
            dirichlet_raw_moment(params, dir_id("x_pow", i=i, m=1)), rel=1e-12
        )
        assert basics.variance == pytest.approx(
            dirichlet_covariance(params, dir_id("var_x_pow", i=i, m=1)),
            rel=1e-9,
            abs=1e-15,
        )
        assert basics.mean_log == pytest.approx(
            dirichlet_raw_moment(params, dir_id("log_x", i=i)), rel=1e-12
        )
        assert basics.cov_x_log == pytest.approx(
            dirichlet_covariance(params, dir_id("cov_x_log_same", i=i)),
            rel=1e-9,
            abs=1e-15,
        )


def test_cov_x_log_from_raw_matches_basic_form():
    rng = np.random.default_rng(2)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        params = DirichletParams(rng.uniform(0.2, 5.0, size=k))
        i = int(rng.integers(1, k + 1))
        got = covariance_from_raw(
            "dirichlet",
            params,
            dir_id("x_pow", i=i, m=1),
            dir_id("log_x", i=i),
        )
        want = (params.alpha0 - params.alpha[i - 1]) / params.alpha0**2
        assert abs(got - want) <= 1e-10


def test_variance_kinds_are_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(25):
        kd = int(rng.integers(2, 6))
        dparams = DirichletParams(rng.uniform(0.2, 5.0, size=kd))
        mparams = MGammaParams(
            rng.uniform(0.2, 5.0, size=int(rng.integers(1, 5))),
            beta=float(rng.uniform(0.2, 5.0)),
        )
        for params, family in ((dparams, "dirichlet"), (mparams, "mgamma")):
            for mid in covariance_ids(family, params.k):
                if mid.kind.startswith("var_"):
                    assert moment_value(params, mid) >= 0.0


def test_derivation_path_matches_printed_closed_forms():
    # Every covariance with a printed closed form agrees with the
    # raw-moment derivation to 1e-9 relative -- except the one entry
    # whose printed form is internally inconsistent (checked separately).
    rng = np.random.default_rng(4)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        dparams = DirichletParams(rng.uniform(0.2, 5.0, size=k))
        for mid in covariance_ids("dirichlet", k, printed_only=True):
            derived = dirichlet_covariance(dparams, mid)
            printed = dirichlet_covariance_printed(dparams, mid)
            assert derived == pytest.approx(printed, rel=1e-9, abs=1e-13), mid
        mparams = MGammaParams(
            rng.uniform(0.2, 5.0, size=int(rng.integers(1, 5))),
            beta=float(rng.uniform(0.2, 5.0)),
        )
        for mid in covariance_ids("mgamma", mparams.k, printed_only=True):
            if mid.kind == "cov_z_zlog":
                continue
            derived = mgamma_covariance(mparams, mid)
            printed = mgamma_covariance_printed(mparams, mid)
            assert derived == pytest.approx(printed, rel=1e-9, abs=1e-13), mid


def test_cov_z_zlog_printed_form_is_inconsistent():
    # The printed closed form squares its first bracket; the derivation
    # path gives E(Z^2 log Z) - E(Z) E(Z log Z) = 2 - gamma at
    # alpha = beta = 1, and Monte Carlo sides with the derivation.
    params = MGammaParams([1.0], beta=1.0)
    derived = mgamma_covariance(params, mg_id("cov_z_zlog", i=1))
    printed = mgamma_covariance_printed(params, mg_id("cov_z_zlog", i=1))
    assert derived == pytest.approx(2.0 - EULER_GAMMA, abs=1e-13)
    assert abs(derived - printed) > 0.1

    sample = sample_mgamma(params, 10**6, RngSpec(seed=99))
    est, se = mc_moment_estimate(mg_id("cov_z_zlog", i=1), sample)
    assert abs(est - derived) <= 4 * se
    assert abs(est - printed) > 10 * se


def test_cross_total_covariances_reduce_by_independence():
    # C(Z_i, X_k) = V(Z_i); C(log Z_i, X_k) = beta;
    # C(Z_i log Z_i, X_k) = C(Z_i log Z_i, Z_i).
    params = MGammaParams([0.7, 1.9, 3.2], beta=1.4)
    for i in (1, 2, 3):
        assert mgamma_covariance(params, mg_id("cov_z_xk", i=i)) == pytest.approx(
            mgamma_covariance(params, mg_id("var_z", i=i)), rel=1e-11
        )
        assert mgamma_covariance(
            params, mg_id("cov_log_z_xk", i=i)
        ) == pytest.approx(1.4, rel=1e-11)
        assert mgamma_covariance(
            params, mg_id("cov_zlog_xk", i=i)
        ) == pytest.approx(
            mgamma_covariance(params, mg_id("cov_z_zlog", i=i)), rel=1e-11
        )


def test_xk_closed_form_matches_expansion():
    params = MGammaParams([0.7, 1.9, 3.2], beta=1.4)
    # E(X_k^2) closed form (rising factorial in alpha0) vs the
    # multilinear expansion used inside covariance_from_raw.
    direct = mgamma_raw_moment(params, mg_id("xk_pow", m=2))
    var = mgamma_covariance(params, mg_id("var_xk"))
    mean = mgamma_raw_moment(params, mg_id("xk_pow", m=1))
    assert direct == pytest.approx(var + mean**2, rel=1e-12)
    assert var == pytest.approx(params.alpha0 * 1.4**2, rel=1e-12)


def test_rising_factorial_log_space_consistency():
    # alpha0 + m crosses the log-space threshold: compare against exact
    # rational arithmetic.
    params = DirichletParams([15.0, 16.0])
    got = dirichlet_raw_moment(params, dir_id("x_pow", i=1, m=2))
    assert got == pytest.approx((15 * 16) / (31 * 32), rel=1e-13)
    big = DirichletParams([200.0, 300.0])
    got = dirichlet_raw_moment(big, dir_id("x_pow", i=2, m=2))
    assert got == pytest.approx((300 * 301) / (500 * 501), rel=1e-12)


# ---------------------------------------------------------------------------
# Catalog errors
# ---------------------------------------------------------------------------


def test_catalog_errors():
    dparams = DirichletParams([1.0, 2.0, 3.0])
    mparams = MGammaParams([1.0, 2.0], beta=1.0)
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, dir_id("x_pow", i=0, m=1))
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, dir_id("x_pow", i=4, m=1))
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, dir_id("x_pow_pair", i=2, j=2))
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, dir_id("x_pow", i=1, m=0))
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, dir_id("nonsense", i=1))
    with pytest.raises(CatalogError):
        dirichlet_raw_moment(dparams, mg_id("z_pow", i=1, m=1))
    with pytest.raises(CatalogError):
        mgamma_raw_moment(mparams, mg_id("z_pow", i=3, m=1))
    # Product moments outside the catalog.
    with pytest.raises(CatalogError):
        covariance_from_raw(
            "dirichlet", dparams, dir_id("x2_log2_x", i=1), dir_id("x_pow", i=1, m=1)
        )
    with pytest.raises(CatalogError):
        covariance_from_raw(
            "mgamma", mparams, mg_id("log2_z", i=1), mg_id("log_z", i=1)
        )
    with pytest.raises(CatalogError):
        mgamma_covariance_printed(mparams, mg_id("cov_z_xk", i=1))
    with pytest.raises(CatalogError):
        dirichlet_covariance_printed(dparams, dir_id("var_x_log_x", i=1))


def test_has_printed_form_flags():
    assert has_printed_form(dir_id("cov_x_x", i=1, j=2))
    assert not has_printed_form(dir_id("var_x_log_x", i=1))
    assert has_printed_form(mg_id("var_xk"))
    assert not has_printed_form(mg_id("cov_z_xk", i=1))
    assert not has_printed_form(dir_id("x_pow", i=1))  # raw, not a covariance


# ---------------------------------------------------------------------------
# Monte Carlo agreement (reduced battery; the acceptance suite runs the
# full 25-draw version)
# ---------------------------------------------------------------------------


def _assert_catalog_matches_mc(family, params, sample, factor=4.0):
    k = params.k
    for mid in raw_moment_ids(family, k) + covariance_ids(family, k):
        want = moment_value(params, mid)
        est, se = mc_moment_estimate(mid, sample)
        assert abs(est - want) <= factor * se, (mid, want, est, se)


def test_catalog_matches_monte_carlo_dirichlet():
    params = DirichletParams([0.4, 1.3, 3.1])
    sample = sample_dirichlet(params, 300_000, RngSpec(seed=2024, stream=1))
    _assert_catalog_matches_mc("dirichlet", params, sample)


def test_catalog_matches_monte_carlo_mgamma():
    params = MGammaParams([0.6, 2.4], beta=1.8)
    sample = sample_mgamma(params, 300_000, RngSpec(seed=2024, stream=2))
    _assert_catalog_matches_mc("mgamma", params, sample)


def test_cov_z_zlog_matches_mc_at_large_n():
    # C(Z, Z log Z) at alpha=2, beta=0.5 against 1e7 draws.
    params = MGammaParams([2.0], beta=0.5)
    sample = sample_mgamma(params, 10**7, RngSpec(seed=77))
    want = mgamma_covariance(params, mg_id("cov_z_zlog", i=1))
    est, se = mc_moment_estimate(mg_id("cov_z_zlog", i=1), sample)
    assert abs(est - want) <= 4 * se


def test_printed_value_dispatch():
    params = DirichletParams([2.0, 3.0])
    mid = dir_id("x_pow", i=1, m=1)
    assert printed_value(params, mid) == moment_value(params, mid)
    cov = dir_id("cov_x_log_same", i=1)
    assert printed_value(params, cov) == pytest.approx(0.12, abs=1e-15)
