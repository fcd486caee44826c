import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hdnsboot.gaussian import (NotSPDError, SpdMatrix, couple, coupled_gaussian_pair,
                               coupling_bound, empirical_kolmogorov, empirical_w2_1d,
                               gaussian_w2, min_eigenvalue, random_spd, spd_sqrt, tv_bound,
                               vha_check, sqrt_frobenius_gap)


def _pairs(count, d, seed):
    rng = np.random.default_rng(seed)
    return [(random_spd(d, rng), random_spd(d, rng)) for _ in range(count)]


class TestSpdMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(NotSPDError):
            SpdMatrix([[1.0, 0.1], [0.0, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(NotSPDError):
            SpdMatrix([[1.0, 2.0], [2.0, 1.0]])

    def test_symmetrizes_within_tolerance(self):
        s = SpdMatrix([[1.0, 0.5 + 1e-10], [0.5, 1.0]])
        np.testing.assert_array_equal(s.entries, s.entries.T)
        assert s.d == 2


class TestSqrt:
    def test_identity(self):
        np.testing.assert_allclose(spd_sqrt(np.eye(4)).entries, np.eye(4), atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(spd_sqrt(np.diag([4.0, 9.0])).entries, np.diag([2.0, 3.0]),
                                   atol=1e-14)

    def test_round_trip(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        r = spd_sqrt(a).entries
        assert np.linalg.norm(r @ r - a) / np.linalg.norm(a) < 1e-8

    def test_clips_tiny_negative_eigenvalue(self):
        a = np.diag([1.0, -1e-11])
        from hdnsboot.gaussian import _sqrt
        with pytest.warns(RuntimeWarning):
            r = _sqrt(a)
        assert np.all(np.isfinite(r))
        with pytest.raises(NotSPDError):
            _sqrt(np.diag([1.0, -1e-8]))


class TestW2:
    def test_equal(self):
        s = random_spd(4, np.random.default_rng(0))
        assert gaussian_w2(s, s) < 1e-7

    def test_scalar(self):
        assert gaussian_w2([[4.0]], [[1.0]]) == pytest.approx(1.0, abs=1e-12)

    def test_commuting(self):
        assert gaussian_w2(np.diag([1.0, 4.0]), np.diag([4.0, 1.0])) == pytest.approx(math.sqrt(2))

    @given(st.floats(0.01, 100), st.floats(0.01, 100))
    def test_scalar_closed_form(self, v1, v2):
        assert abs(gaussian_w2([[v1]], [[v2]]) - abs(math.sqrt(v1) - math.sqrt(v2))) <= 1e-10

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b, c = (random_spd(4, rng) for _ in range(3))
            assert abs(gaussian_w2(a, b) - gaussian_w2(b, a)) <= 1e-8
            assert gaussian_w2(a, c) <= gaussian_w2(a, b) + gaussian_w2(b, c) + 1e-6

    def test_matches_trace_formula(self):
        from scipy.linalg import sqrtm
        for a, b in _pairs(50, 5, 8):
            ra = sqrtm(a).real
            sq = np.trace(a + b - 2 * sqrtm(ra @ b @ ra).real)
            assert gaussian_w2(a, b) == pytest.approx(math.sqrt(sq), rel=1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gaussian_w2(np.eye(2), np.eye(3))


class TestCoupling:
    def test_equal_covariances(self):
        s = random_spd(3, np.random.default_rng(2))
        p = coupled_gaussian_pair(s, s, seed=4)
        np.testing.assert_array_equal(p.x, p.y)

    def test_zero_source(self):
        p = couple(np.eye(2) * 3, np.eye(2), np.zeros(2))
        np.testing.assert_array_equal(p.x, 0)
        np.testing.assert_array_equal(p.y, 0)

    def test_reconstruction(self):
        a, b = _pairs(1, 5, 3)[0]
        p = coupled_gaussian_pair(a, b, seed=1)
        np.testing.assert_allclose(p.x, spd_sqrt(a).entries @ p.z_source, atol=1e-10)
        np.testing.assert_allclose(p.y, spd_sqrt(b).entries @ p.z_source, atol=1e-10)

    def test_mean_square_gap_matches_trace(self):
        a, b = _pairs(1, 5, 4)[0]
        p = coupled_gaussian_pair(a, b, seed=2, size=100_000)
        mc = np.mean(np.sum((p.x - p.y) ** 2, axis=1))
        exact = sqrt_frobenius_gap(a, b) ** 2
        assert abs(mc / exact - 1) < 0.05
        assert mc <= coupling_bound(a, b, min(min_eigenvalue(a), min_eigenvalue(b)))

    def test_max_norm_probe(self):
        # Pr(|x - y| > eps) <= 10 d^(5/2) eps^-2 |S1 - S2|_max on the shared-z coupling
        for d in (1, 3, 5):
            for i, (a, b) in enumerate(_pairs(5, d, 10 + d)):
                p = coupled_gaussian_pair(a, b, seed=i, size=20_000)
                gap = np.linalg.norm(p.x - p.y, axis=1)
                for eps in (0.05, 0.2, 1.0):
                    bound = 10 * d ** 2.5 / eps**2 * np.max(np.abs(a - b))
                    assert np.mean(gap > eps) <= bound


class TestBounds:
    def test_coupling_bound_scalar(self):
        assert coupling_bound([[4.0]], [[1.0]], 1.0) == pytest.approx(9.0)
        assert coupling_bound(np.eye(2), np.eye(2), 1.0) == 0.0

    def test_coupling_bound_errors(self):
        with pytest.raises(ValueError):
            coupling_bound(np.eye(2), np.eye(2), 0.0)
        with pytest.warns(RuntimeWarning):
            coupling_bound(np.eye(2), 2 * np.eye(2), 5.0)

    def test_tv_bound(self):
        assert tv_bound(np.eye(3), np.eye(3)) == 0.0
        assert tv_bound([[1.0]], [[2.0]]) == pytest.approx(1.5)
        s = random_spd(2, np.random.default_rng(5))
        assert tv_bound(s, 1.1 * s) == pytest.approx(1.5 * 0.1 * math.sqrt(2), rel=1e-9)

    def test_vha(self):
        assert vha_check(np.eye(2), np.eye(2), 1.0) == (0.0, 0.0)
        lhs, rhs = vha_check([[4.0]], [[1.0]], 1.0)
        assert (lhs, rhs) == (pytest.approx(1.0), pytest.approx(3.0))
        with pytest.raises(ValueError):
            vha_check([[4.0]], [[1.0]], 2.0)

    def test_vha_battery(self):
        for a, b in _pairs(100, 5, 6):
            lam = min(min_eigenvalue(a), min_eigenvalue(b))
            lhs, rhs = vha_check(a, b, lam)
            assert lhs <= rhs


class TestEmpirical:
    def test_w2_examples(self):
        assert empirical_w2_1d([1.0, 2.0], [2.0, 1.0]) == 0.0
        assert empirical_w2_1d([0.0, 0.0], [1.0, 1.0]) == 1.0
        with pytest.raises(ValueError):
            empirical_w2_1d([0.0, 1.0], [0.0])

    def test_w2_consistency(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal(100_000)
        b = 2 * rng.standard_normal(100_000)
        assert abs(empirical_w2_1d(a, b) - gaussian_w2([[1.0]], [[4.0]])) < 0.05

    def test_kolmogorov_examples(self):
        assert empirical_kolmogorov([3.0, 1.0, 2.0], [1.0, 2.0, 3.0]) == 0.0
        assert empirical_kolmogorov([0.0], [1.0]) == 1.0

    def test_kolmogorov_same_distribution(self):
        a = generator_draws(1)
        b = generator_draws(2)
        assert empirical_kolmogorov(a, b) < 0.06

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=30),
           st.lists(st.floats(-10, 10), min_size=1, max_size=30))
    def test_kolmogorov_matches_brute_force(self, a, b):
        grid = sorted(set(a) | set(b))
        brute = max(abs(np.mean(np.array(a) <= x) - np.mean(np.array(b) <= x)) for x in grid)
        assert empirical_kolmogorov(a, b) == pytest.approx(brute, abs=1e-12)


def generator_draws(seed):
    from hdnsboot.inference import combined_norm
    return combined_norm(np.random.default_rng(seed).standard_normal((2000, 5)))


def test_min_eigenvalue():
    assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert min_eigenvalue(np.diag([4.0, 1.0])) == pytest.approx(1.0)
    assert min_eigenvalue([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0)
    assert min_eigenvalue([[7.5]]) == 7.5
    with pytest.raises(ValueError):
        min_eigenvalue([[np.inf]])


@given(st.lists(st.floats(0, 50), min_size=2, max_size=6), st.integers(0, 2**32 - 1))
def test_min_eigenvalue_rotation_invariant(diag, seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((len(diag), len(diag))))
    m = q.T @ np.diag(diag) @ q
    assert abs(min_eigenvalue(m) - min(diag)) <= 1e-8
