"""Tests for the closed-form limit covariance matrices.

Each Jacobian block G is checked against a central-difference Jacobian of
the actual estimator map, evaluated at the exact population moment vector
of the observables.  The covariance blocks V reuse the moment catalog
(independently validated against Monte Carlo in test_moments.py), the
likelihood-based matrices are cross-checked against their information
matrices, and the sandwich diagonals are compared with the sampling
covariance of simulated estimates.
"""

import math

import numpy as np
import pytest

from momentfit.avar import (
    AvarMatrix,
    GVParts,
    avar_dirichlet_based,
    avar_dirichlet_me,
    avar_dirichlet_mle,
    avar_dirichlet_same,
    avar_matrix,
    avar_mgamma_me,
    avar_mgamma_mle,
    avar_mgamma_same,
    gv_dirichlet_based,
    gv_dirichlet_me,
    gv_dirichlet_mle,
    gv_dirichlet_same,
    gv_mgamma_me,
    gv_mgamma_mle,
    gv_mgamma_same,
    mgamma_fisher_information,
)
from momentfit.estimators import estimate
from momentfit.model import (
    DirichletParams,
    MGammaParams,
    RngSpec,
    sample_dirichlet,
    sample_mgamma,
)
from support import (
    central_jacobian,
    draw_dirichlet_params,
    draw_mgamma_params,
    estimator_map_and_moments,
    max_jacobian_error,
    moment_vector_dirichlet_based,
    moment_vector_dirichlet_same,
)

EULER_GAMMA = 0.5772156649015329
FD_TOL = 1e-6


def _dir_cases(seed, per_k, ks=(2, 3, 5)):
    rng = np.random.default_rng(seed)
    return [draw_dirichlet_params(rng, k) for k in ks for _ in range(per_k)]


def _mg_cases(seed, per_k, ks=(1, 2, 3, 5)):
    rng = np.random.default_rng(seed)
    return [draw_mgamma_params(rng, k) for k in ks for _ in range(per_k)]


def _ids(cases):
    return [f"k{p.k}-{i}" for i, p in enumerate(cases)]


DIR_CASES = _dir_cases(911, per_k=4)
MG_CASES = _mg_cases(912, per_k=3)
MG_CASES_K2 = [p for p in MG_CASES if p.k >= 2]


# ---------------------------------------------------------------------------
# Jacobians against central differences of the actual maps
# ---------------------------------------------------------------------------


class TestJacobianBlocks:
    @pytest.mark.parametrize("params", DIR_CASES, ids=_ids(DIR_CASES))
    @pytest.mark.parametrize("estimator", ["me", "same", "mle"])
    def test_dirichlet_jacobians_match_finite_differences(self, params, estimator):
        fn, mu = estimator_map_and_moments("dirichlet", estimator, params)
        G = {
            "me": gv_dirichlet_me,
            "same": gv_dirichlet_same,
            "mle": gv_dirichlet_mle,
        }[estimator](params).G
        err, scale = max_jacobian_error(G, fn, mu)
        assert err <= FD_TOL * scale, f"FD mismatch {err:.3e} at scale {scale:.3e}"

    @pytest.mark.parametrize("params", MG_CASES, ids=_ids(MG_CASES))
    @pytest.mark.parametrize("estimator", ["me", "same", "mle"])
    def test_mgamma_jacobians_match_finite_differences(self, params, estimator):
        fn, mu = estimator_map_and_moments("mgamma", estimator, params)
        G = {
            "me": gv_mgamma_me,
            "same": gv_mgamma_same,
            "mle": gv_mgamma_mle,
        }[estimator](params).G
        err, scale = max_jacobian_error(G, fn, mu)
        assert err <= FD_TOL * scale, f"FD mismatch {err:.3e} at scale {scale:.3e}"

    @pytest.mark.parametrize("params", MG_CASES_K2, ids=_ids(MG_CASES_K2))
    @pytest.mark.parametrize("estimator", ["dir_me", "dir_same"])
    def test_dirichlet_based_jacobians_match_finite_differences(
        self, params, estimator
    ):
        fn, mu = estimator_map_and_moments("mgamma", estimator, params)
        G = gv_dirichlet_based(params, estimator.removeprefix("dir_")).G
        err, scale = max_jacobian_error(G, fn, mu)
        assert err <= FD_TOL * scale, f"FD mismatch {err:.3e} at scale {scale:.3e}"


class TestJacobianScaleChecks:
    """Pin the exact scale of two blocks against finite differences.

    Both have a nearby wrong variant (an extra factor alpha0, a flipped
    sign) that stays dimensionally plausible, so the tests assert the
    implemented block matches the numerical Jacobian and the variant does
    not.
    """

    def test_shared_denominator_middle_block_has_no_alpha0_factor(self):
        params = DirichletParams([0.7, 1.6, 3.2])
        k, a = params.k, params.alpha
        fn, mu = estimator_map_and_moments("dirichlet", "same", params)
        fd = central_jacobian(fn, mu)
        middle = fd[:, k : 2 * k]
        implemented = np.outer(a, a) / (k - 1)
        inflated = params.alpha0 * implemented
        assert np.abs(middle - implemented).max() <= FD_TOL * max(
            1.0, np.abs(implemented).max()
        )
        assert np.abs(middle - inflated).max() > 0.5 * np.abs(implemented).max()
        G = gv_dirichlet_same(params).G
        np.testing.assert_allclose(G[:, k : 2 * k], implemented, rtol=1e-12)

    @pytest.mark.parametrize("base", ["me", "same"])
    def test_scale_row_of_two_stage_jacobian_is_negative(self, base):
        params = MGammaParams([0.8, 2.1, 1.4], 1.7)
        fn, mu = estimator_map_and_moments("mgamma", f"dir_{base}", params)
        fd = central_jacobian(fn, mu)
        bottom = fd[-1, :-1]
        w = DirichletParams(params.alpha)
        g_w = (gv_dirichlet_me(w) if base == "me" else gv_dirichlet_same(w)).G
        negative = -params.beta / params.alpha0 * g_w.sum(axis=0)
        flipped = -negative
        assert np.abs(bottom - negative).max() <= FD_TOL * max(
            1.0, np.abs(negative).max()
        )
        assert np.abs(bottom - flipped).max() > np.abs(negative).max()
        G = gv_dirichlet_based(params, base).G
        np.testing.assert_allclose(G[-1, :-1], negative, rtol=1e-12)
        np.testing.assert_allclose(G[-1, -1], 1.0 / params.alpha0, rtol=1e-15)


# ---------------------------------------------------------------------------
# Hand-checked fixtures
# ---------------------------------------------------------------------------


class TestHandFixtures:
    def test_dirichlet_me_jacobian_at_unit_alpha(self):
        G = gv_dirichlet_me(DirichletParams([1.0, 1.0])).G
        want = np.hstack([np.diag([20.0, 20.0]), np.diag([-18.0, -18.0])])
        np.testing.assert_allclose(G, want, rtol=1e-12, atol=1e-12)

    def test_dirichlet_same_jacobian_at_unit_alpha(self):
        G = gv_dirichlet_same(DirichletParams([1.0, 1.0])).G
        want = np.array(
            [
                [0.0, -2.0, 1.0, 1.0, -2.0, -2.0],
                [-2.0, 0.0, 1.0, 1.0, -2.0, -2.0],
            ]
        )
        np.testing.assert_allclose(G, want, rtol=1e-12, atol=1e-12)

    def test_mgamma_me_jacobian_at_unit_parameters(self):
        G = gv_mgamma_me(MGammaParams([1.0], 1.0)).G
        np.testing.assert_allclose(
            G, np.array([[4.0, -1.0], [-3.0, 1.0]]), rtol=1e-13
        )

    def test_mgamma_same_jacobian_at_unit_parameters(self):
        G = gv_mgamma_same(MGammaParams([1.0], 1.0)).G
        want = np.array(
            [
                [1.0 - EULER_GAMMA, 1.0, -1.0],
                [EULER_GAMMA, -1.0, 1.0],
            ]
        )
        np.testing.assert_allclose(G, want, rtol=1e-13)

    def test_dirichlet_likelihood_avar_at_unit_alpha(self):
        A = avar_dirichlet_mle(DirichletParams([1.0, 1.0])).matrix
        diag = 1.7121527161384056
        off = 1.104225614284379
        want = np.array([[diag, off], [off, diag]])
        np.testing.assert_allclose(A, want, rtol=1e-14)

    def test_mgamma_likelihood_avar_at_unit_parameters(self):
        A = avar_mgamma_mle(MGammaParams([1.0], 1.0)).matrix
        c = 1.5505460967304305
        want = np.array([[c, -c], [-c, 1.0 + c]])
        np.testing.assert_allclose(A, want, rtol=1e-14)


# ---------------------------------------------------------------------------
# Likelihood matrices against their information matrices
# ---------------------------------------------------------------------------


class TestInformationIdentities:
    @pytest.mark.parametrize("params", DIR_CASES[:6], ids=_ids(DIR_CASES[:6]))
    def test_dirichlet_likelihood_avar_inverts_information(self, params):
        parts = gv_dirichlet_mle(params)
        A = avar_dirichlet_mle(params).matrix
        eye = A @ parts.V
        assert np.abs(eye - np.eye(params.k)).max() <= 1e-10
        np.testing.assert_allclose(parts.product(), A, rtol=1e-10)

    @pytest.mark.parametrize("params", MG_CASES[:6], ids=_ids(MG_CASES[:6]))
    def test_mgamma_likelihood_avar_inverts_information(self, params):
        A = avar_mgamma_mle(params).matrix
        info = mgamma_fisher_information(params)
        eye = A @ info
        assert np.abs(eye - np.eye(params.k + 1)).max() <= 1e-10
        np.testing.assert_allclose(gv_mgamma_mle(params).product(), A, rtol=1e-9)

    def test_mgamma_information_matrix_entries(self):
        params = MGammaParams([0.9, 2.2], 1.5)
        info = mgamma_fisher_information(params)
        assert info.shape == (3, 3)
        np.testing.assert_allclose(info[:2, 2], 1.0 / params.beta)
        np.testing.assert_allclose(info[2, :2], 1.0 / params.beta)
        np.testing.assert_allclose(
            info[2, 2], params.alpha0 / params.beta**2, rtol=1e-15
        )


# ---------------------------------------------------------------------------
# Structure of the assembled matrices
# ---------------------------------------------------------------------------


def _all_avars(params_dir, params_mg):
    out = [
        avar_dirichlet_me(params_dir),
        avar_dirichlet_same(params_dir),
        avar_dirichlet_mle(params_dir),
        avar_mgamma_me(params_mg),
        avar_mgamma_same(params_mg),
        avar_mgamma_mle(params_mg),
    ]
    if params_mg.k >= 2:
        out.append(avar_dirichlet_based(params_mg, "me"))
        out.append(avar_dirichlet_based(params_mg, "same"))
    return out


class TestMatrixStructure:
    @pytest.mark.parametrize(
        "pd, pm", list(zip(DIR_CASES[:5], MG_CASES_K2[:5])), ids=range(5)
    )
    def test_avar_matrices_are_symmetric_positive_definite(self, pd, pm):
        for avar in _all_avars(pd, pm):
            m = avar.matrix
            assert m.shape == (avar.d, avar.d)
            np.testing.assert_allclose(m, m.T, rtol=1e-9, atol=1e-12)
            assert np.linalg.eigvalsh(m).min() > 0.0

    def test_independent_increment_covariances_are_block_diagonal(self):
        params = MGammaParams([0.7, 1.9, 3.4], 0.8)
        k = params.k
        for parts, blocks in ((gv_mgamma_me(params), 2), (gv_mgamma_same(params), 3)):
            V = parts.V
            coord = np.tile(np.arange(k), blocks)
            cross = coord[:, None] != coord[None, :]
            assert np.all(V[cross] == 0.0)

    def test_mgamma_likelihood_covariance_couples_through_total(self):
        params = MGammaParams([0.7, 1.9, 3.4], 0.8)
        k = params.k
        V = gv_mgamma_mle(params).V
        np.testing.assert_allclose(V[:k, k], params.beta, rtol=1e-12)
        np.testing.assert_allclose(
            V[k, k], params.alpha0 * params.beta**2, rtol=1e-12
        )

    def test_two_stage_covariance_isolates_the_total(self):
        params = MGammaParams([0.7, 1.9, 3.4], 0.8)
        for base in ("me", "same"):
            V = gv_dirichlet_based(params, base).V
            assert np.all(V[:-1, -1] == 0.0)
            assert np.all(V[-1, :-1] == 0.0)
            np.testing.assert_allclose(
                V[-1, -1], params.alpha0 * params.beta**2, rtol=1e-12
            )
            w = DirichletParams(params.alpha)
            base_parts = gv_dirichlet_me(w) if base == "me" else gv_dirichlet_same(w)
            np.testing.assert_allclose(V[:-1, :-1], base_parts.V, rtol=1e-12)

    def test_dirichlet_avar_permutation_equivariance(self):
        alpha = np.array([0.5, 1.7, 3.3])
        perm = np.array([2, 0, 1])
        for fn in (avar_dirichlet_me, avar_dirichlet_same, avar_dirichlet_mle):
            a = fn(DirichletParams(alpha)).matrix
            b = fn(DirichletParams(alpha[perm])).matrix
            np.testing.assert_allclose(
                b, a[np.ix_(perm, perm)], rtol=1e-11, atol=1e-12 * np.abs(a).max()
            )

    def test_mgamma_avar_permutation_equivariance(self):
        alpha = np.array([0.5, 1.7, 3.3])
        beta = 1.4
        perm = np.array([2, 0, 1, 3])
        fns = [
            avar_mgamma_me,
            avar_mgamma_same,
            avar_mgamma_mle,
            lambda p: avar_dirichlet_based(p, "me"),
            lambda p: avar_dirichlet_based(p, "same"),
        ]
        for fn in fns:
            a = fn(MGammaParams(alpha, beta)).matrix
            b = fn(MGammaParams(alpha[perm[:3]], beta)).matrix
            np.testing.assert_allclose(
                b, a[np.ix_(perm, perm)], rtol=1e-11, atol=1e-12 * np.abs(a).max()
            )


# ---------------------------------------------------------------------------
# Efficiency orderings on the two report grids per family
# ---------------------------------------------------------------------------

SWEEP = np.linspace(0.2, 5.0, 25)
SLACK = 1e-9

DIRICHLET_GRIDS = [
    ("k3", [1.0, 5.0]),
    ("k5", [0.2, 1.0, 2.0, 5.0]),
]

MGAMMA_GRIDS = [
    ("alpha1-k2", lambda s: MGammaParams([s, 5.0], 1.0)),
    ("alpha1-k4", lambda s: MGammaParams([s, 1.0, 2.0, 5.0], 1.0)),
    ("beta-k2", lambda s: MGammaParams([1.0, 5.0], s)),
    ("beta-k4", lambda s: MGammaParams([0.2, 1.0, 2.0, 5.0], s)),
]


class TestEfficiencyOrderings:
    @pytest.mark.parametrize(
        "name, tail", DIRICHLET_GRIDS, ids=[g[0] for g in DIRICHLET_GRIDS]
    )
    def test_dirichlet_diagonal_ordering(self, name, tail):
        for s in SWEEP:
            p = DirichletParams([s, *tail])
            d_me = np.diag(avar_dirichlet_me(p).matrix)
            d_sa = np.diag(avar_dirichlet_same(p).matrix)
            d_ml = np.diag(avar_dirichlet_mle(p).matrix)
            assert np.all(d_sa <= d_me + SLACK), f"{name} s={s}"
            assert np.all(d_ml <= d_sa + SLACK), f"{name} s={s}"

    @pytest.mark.parametrize(
        "name, make", MGAMMA_GRIDS, ids=[g[0] for g in MGAMMA_GRIDS]
    )
    def test_mgamma_diagonal_ordering(self, name, make):
        for s in SWEEP:
            p = make(float(s))
            d_me = np.diag(avar_mgamma_me(p).matrix)
            d_sa = np.diag(avar_mgamma_same(p).matrix)
            d_ml = np.diag(avar_mgamma_mle(p).matrix)
            d_dme = np.diag(avar_dirichlet_based(p, "me").matrix)
            d_dsa = np.diag(avar_dirichlet_based(p, "same").matrix)
            assert np.all(d_sa <= d_me + SLACK), f"{name} s={s}"
            assert np.all(d_ml <= d_sa + SLACK), f"{name} s={s}"
            assert np.all(d_dsa <= d_dme + SLACK), f"{name} s={s}"
            assert np.all(d_ml <= d_dsa + SLACK), f"{name} s={s}"

    def test_two_stage_variant_can_exceed_plain_moment_estimator(self):
        # The orderings above pair each log-based variant with its own
        # moment baseline; across assemblies no global ordering holds.
        worst = -np.inf
        for s in SWEEP:
            p = MGammaParams([float(s), 5.0], 1.0)
            d_me = np.diag(avar_mgamma_me(p).matrix)
            d_dsa = np.diag(avar_dirichlet_based(p, "same").matrix)
            worst = max(worst, float((d_dsa - d_me).max()))
        assert worst > 1.0


# ---------------------------------------------------------------------------
# Dispatch and validation
# ---------------------------------------------------------------------------


class TestDispatchAndValidation:
    def test_dispatcher_matches_direct_constructors(self):
        pd = DirichletParams([0.6, 1.4, 2.2])
        pm = MGammaParams([0.6, 1.4, 2.2], 1.3)
        pairs = [
            ("dirichlet", "me", pd, avar_dirichlet_me(pd)),
            ("dirichlet", "same", pd, avar_dirichlet_same(pd)),
            ("dirichlet", "mle", pd, avar_dirichlet_mle(pd)),
            ("mgamma", "me", pm, avar_mgamma_me(pm)),
            ("mgamma", "same", pm, avar_mgamma_same(pm)),
            ("mgamma", "mle", pm, avar_mgamma_mle(pm)),
            ("mgamma", "dir_me", pm, avar_dirichlet_based(pm, "me")),
            ("mgamma", "dir_same", pm, avar_dirichlet_based(pm, "same")),
        ]
        for family, tag, params, direct in pairs:
            got = avar_matrix(family, tag, params)
            assert np.array_equal(got.matrix, direct.matrix)
            assert got.family == family

    def test_bias_corrected_variant_shares_the_limit_law(self):
        pm = MGammaParams([0.6, 1.4], 1.3)
        plain = avar_matrix("mgamma", "same", pm)
        corrected = avar_matrix("mgamma", "same_unbiased", pm)
        assert np.array_equal(plain.matrix, corrected.matrix)
        assert corrected.estimator == "same_unbiased"

    def test_unknown_tags_are_rejected(self):
        pd = DirichletParams([1.0, 2.0])
        pm = MGammaParams([1.0, 2.0], 1.0)
        with pytest.raises(ValueError):
            avar_matrix("dirichlet", "dir_me", pd)
        with pytest.raises(ValueError):
            avar_matrix("mgamma", "bogus", pm)
        with pytest.raises(ValueError):
            avar_matrix("poisson", "me", pd)
        with pytest.raises(ValueError):
            avar_dirichlet_based(pm, "mle")

    def test_small_k_requirements(self):
        with pytest.raises(ValueError):
            gv_dirichlet_same(DirichletParams([2.0]))
        with pytest.raises(ValueError):
            gv_dirichlet_based(MGammaParams([2.0], 1.0), "me")

    def test_avar_matrix_rejects_bad_input(self):
        ok = np.eye(2)
        with pytest.raises(ValueError):
            AvarMatrix(np.ones((2, 3)), "dirichlet", "me", None)
        with pytest.raises(ValueError):
            AvarMatrix(np.array([[1.0, np.nan], [np.nan, 1.0]]), "dirichlet", "me", None)
        with pytest.raises(ValueError):
            AvarMatrix(np.array([[1.0, 0.5], [-0.5, 1.0]]), "dirichlet", "me", None)
        with pytest.raises(ValueError):
            AvarMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]), "dirichlet", "me", None)
        frozen = AvarMatrix(ok, "dirichlet", "me", None)
        with pytest.raises(ValueError):
            frozen.matrix[0, 0] = 5.0

    def test_gv_parts_reject_bad_input(self):
        with pytest.raises(ValueError):
            GVParts(np.ones((2, 3)), np.eye(2))
        with pytest.raises(ValueError):
            GVParts(np.array([[1.0, np.inf]]), np.eye(2))
        parts = GVParts(np.ones((1, 2)), np.eye(2))
        np.testing.assert_allclose(parts.product(), [[2.0]])


# ---------------------------------------------------------------------------
# Sampling-covariance smoke checks (full sweep lives in the acceptance gate)
# ---------------------------------------------------------------------------


def _empirical_diag(family, params, tag, n, m, seed):
    theta = np.concatenate(
        [params.alpha, [params.beta]] if family == "mgamma" else [params.alpha]
    )
    sampler = sample_mgamma if family == "mgamma" else sample_dirichlet
    rows = []
    for r in range(m):
        sample = sampler(params, n, RngSpec(seed, stream=r))
        report = estimate(sample, tag)
        if report.exists:
            rows.append(report.estimate)
    rows = np.asarray(rows)
    assert rows.shape[0] > 0.95 * m
    dev = math.sqrt(n) * (rows - theta)
    return np.cov(dev, rowvar=False, ddof=1).diagonal(), rows.shape[0]


class TestSamplingCovarianceSmoke:
    def test_dirichlet_shared_denominator_sandwich(self):
        params = DirichletParams([1.3, 2.1])
        want = np.diag(avar_dirichlet_same(params).matrix)
        got, kept = _empirical_diag("dirichlet", params, "same", 4000, 800, 777)
        assert kept == 800
        np.testing.assert_allclose(got, want, rtol=0.2)

    def test_mgamma_moment_sandwich(self):
        params = MGammaParams([0.9, 2.4], 1.6)
        want = np.diag(avar_mgamma_me(params).matrix)
        got, kept = _empirical_diag("mgamma", params, "me", 4000, 800, 778)
        assert kept == 800
        np.testing.assert_allclose(got, want, rtol=0.2)
