import numpy as np
import pytest

from conftest import pairwise_tv_loop, random_kernel
from pml_contraction import (
    SearchConfig,
    binarize,
    brute_force_eta_tv,
    dobrushin,
    empirical_eta_f,
    eta_chi2,
    is_decomposable,
    leakage_capacity,
    maximal_correlation_sq,
    tv,
)
from pml_contraction.contraction import simplex_grid
from pml_contraction.divergences import HELLINGER_SPEC, KL_SPEC, TV_SPEC
from pml_contraction.errors import DomainError, SearchConfigError, SizeError

FAST = SearchConfig(restarts=60, refine_rounds=30, seed=3)


def svd_rho_sq(K, p):
    py = p @ K
    keep = py > 0
    B = np.sqrt(p)[:, None] * K[:, keep] / np.sqrt(py[keep])[None, :]
    s = np.linalg.svd(B, compute_uv=False)
    return float(s[1] ** 2) if s.size > 1 else 0.0


def test_dobrushin_matches_loop(rng):
    for _ in range(200):
        K = random_kernel(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)), zero_prob=0.2)
        assert dobrushin(K) == pytest.approx(pairwise_tv_loop(K), abs=1e-15)


def test_dobrushin_extremes():
    assert dobrushin(np.eye(3)) == 1.0
    assert dobrushin([[0.2, 0.8]] * 4) == 0.0


def test_decomposable_pair_found():
    K = [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0], [0.3, 0.3, 0.4]]
    assert is_decomposable(K) == (True, (0, 1))
    assert is_decomposable([[0.5, 0.5], [0.2, 0.8]]) == (False, None)


def test_decomposable_means_no_contraction(rng):
    for _ in range(20):
        n, m = int(rng.integers(3, 6)), int(rng.integers(3, 6))
        K = random_kernel(rng, n, m)
        # give inputs 0 and 1 disjoint supports
        K[0] = 0.0
        K[0, 0] = 1.0
        K[1, 0] = 0.0
        K[1] /= K[1].sum()
        assert is_decomposable(K)[0]
        assert dobrushin(K) == 1.0
        assert eta_chi2(K, FAST).lower >= 0.99


def test_binarize_keeps_tv_and_leakage(rng):
    for _ in range(300):
        n, m = int(rng.integers(2, 6)), int(rng.integers(2, 7))
        K = random_kernel(rng, n, m)
        P, Q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        B = binarize(K, P, Q)
        assert B.n_outputs == 2
        assert abs(tv(P @ B.matrix, Q @ B.matrix) - tv(P @ K, Q @ K)) <= 1e-12
        for c in (0.05, 0.1):
            if c <= 1 / n:
                assert leakage_capacity(B, c) <= leakage_capacity(K, c) + 1e-12


def test_binarize_degenerate_pair():
    K = np.tile([0.2, 0.3, 0.5], (3, 1))
    B = binarize(K, [0.2, 0.3, 0.5], [0.5, 0.3, 0.2])
    np.testing.assert_allclose(B.matrix, [[0.2, 0.8]] * 3)


def test_simplex_grid():
    g = simplex_grid(3, 0.25)
    assert g.shape == (15, 3)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)


def test_brute_force_agrees_with_dobrushin(rng):
    for _ in range(10):
        K = random_kernel(rng, int(rng.integers(2, 4)), 3)
        assert abs(brute_force_eta_tv(K, 0.05) - dobrushin(K)) <= 0.02


def test_brute_force_limits():
    with pytest.raises(SizeError):
        brute_force_eta_tv(np.full((5, 2), 0.5))
    with pytest.raises(DomainError):
        brute_force_eta_tv(np.eye(2), 0.5)


def test_search_tv_reaches_dobrushin(rng):
    for _ in range(10):
        K = random_kernel(rng, int(rng.integers(2, 5)), 3)
        est = empirical_eta_f(K, TV_SPEC, search=FAST)
        assert est.lower <= est.upper + 1e-12
        assert est.lower == pytest.approx(dobrushin(K), abs=1e-3)


def test_restricted_tv_matches_unrestricted(rng):
    # the TV ratio is scale free, so shrinking to the credal set changes nothing
    for _ in range(5):
        n = int(rng.integers(2, 5))
        K = random_kernel(rng, n, 3)
        c = float(rng.uniform(0.01, 0.9 / n))
        full = empirical_eta_f(K, TV_SPEC, search=FAST).lower
        restricted = empirical_eta_f(K, TV_SPEC, c=c, search=FAST).lower
        assert abs(full - restricted) <= 2e-3
        P, Q = empirical_eta_f(K, TV_SPEC, c=c, search=FAST).witness_pair
        assert P.probs.min() >= c - 1e-12 and Q.probs.min() >= c - 1e-12


@pytest.mark.parametrize("spec", [KL_SPEC, HELLINGER_SPEC])
def test_smooth_f_below_dobrushin(rng, spec):
    for _ in range(5):
        K = random_kernel(rng, 3, 3)
        est = empirical_eta_f(K, spec, search=FAST)
        assert 0.0 <= est.lower <= dobrushin(K) + 1e-9


def test_search_uniform_c_rejected():
    with pytest.raises(DomainError):
        empirical_eta_f(np.eye(2), c=0.5)


def test_search_config_validation():
    with pytest.raises(SearchConfigError):
        SearchConfig(restarts=0)
    with pytest.raises(SearchConfigError):
        SearchConfig(seed=-1)


def test_search_is_deterministic(refs):
    a = empirical_eta_f(refs["K2"], KL_SPEC, search=FAST)
    b = empirical_eta_f(refs["K2"], KL_SPEC, search=FAST)
    assert a.lower == b.lower
    assert a.witness_pair[0].probs.tolist() == b.witness_pair[0].probs.tolist()


def test_maximal_correlation_matches_svd(rng):
    for _ in range(200):
        n, m = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        K = random_kernel(rng, n, m, zero_prob=0.2)
        p = rng.dirichlet(np.ones(n))
        assert maximal_correlation_sq(K, p) == pytest.approx(svd_rho_sq(K, p), abs=1e-7)


def test_eta_chi2_binary_symmetric_channel():
    a = 0.25
    K = np.array([[1 - a, a], [a, 1 - a]])
    grid = np.linspace(0.001, 0.999, 999)
    oracle = max(svd_rho_sq(K, np.array([t, 1 - t])) for t in grid)
    est = eta_chi2(K, FAST)
    assert est.lower == pytest.approx((1 - 2 * a) ** 2, abs=1e-9)
    assert est.lower == pytest.approx(oracle, abs=1e-6)
    P, PY = est.witness_pair
    np.testing.assert_allclose(PY.probs, P.probs @ K)


def test_eta_chi2_below_dobrushin(rng):
    for _ in range(10):
        K = random_kernel(rng, 3, 3)
        assert eta_chi2(K, FAST).lower <= dobrushin(K) + 1e-9
