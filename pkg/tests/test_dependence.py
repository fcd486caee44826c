import math

import numpy as np
import pytest

from hdnsboot.dependence import (DependenceEstimate, cumulative_theta, estimate_theta,
                                 geometric_tail_bound, min_eigenvalue, probe_indices)
from hdnsboot.models import ModelSpec

M1 = ModelSpec("M1", 500, 1)


def est(k, per_coord):
    per_coord = np.asarray(per_coord, dtype=float)
    return DependenceEstimate(k=k, q=2.0, per_coord=per_coord,
                              max_over_coords=float(per_coord.max()),
                              mc_se=np.zeros_like(per_coord), reps=100)


def test_probe_indices():
    assert probe_indices(500) == [125, 250, 375, 500]
    assert probe_indices(10) == [3, 5, 8, 10]


def test_validation():
    with pytest.raises(ValueError):
        estimate_theta(M1, 0, reps=99)
    with pytest.raises(ValueError):
        estimate_theta(M1, 0, q=0.5)
    with pytest.raises(ValueError):
        estimate_theta(M1, -1)


def test_lag_beyond_zero_start_gives_zero():
    spec = ModelSpec("M1", 20, 2, burn_in=5)
    out = estimate_theta(spec, 26, reps=100)
    np.testing.assert_array_equal(out.per_coord, 0)
    assert out.max_over_coords == 0.0


def test_instantaneous_replacement():
    # swapping the current innovation changes x by xi - xi', whose L2 norm is sqrt(2)
    out = estimate_theta(M1, 0, 2, reps=2000, seed=3)
    assert abs(out.max_over_coords / math.sqrt(2) - 1) < 0.10
    assert np.all(out.per_coord >= 0)
    assert out.max_over_coords == out.per_coord.max()


def test_geometric_decay_ratios():
    ests = [estimate_theta(M1, k, 2, reps=2000, seed=4) for k in range(4)]
    for k in range(1, 4):
        ratio = ests[k].max_over_coords / ests[k - 1].max_over_coords
        assert 0.3 < ratio < 0.9


def test_multivariate_models_run():
    for model in ("M2", "M5"):
        out = estimate_theta(ModelSpec(model, 100, 3), 1, 2, reps=200, seed=1)
        assert out.per_coord.shape == (3,)
        assert np.all(np.isfinite(out.mc_se)) and np.all(out.per_coord > 0)


def test_standard_error_scales_with_reps():
    ratios = []
    for t in range(20):
        small = estimate_theta(ModelSpec("M1", 60, 1), 1, 2, reps=100, seed=100 + t)
        large = estimate_theta(ModelSpec("M1", 60, 1), 1, 2, reps=200, seed=200 + t)
        ratios.append(large.mc_se[0] / small.mc_se[0])
    assert 0.6 < np.mean(ratios) < 0.85


def test_cumulative_examples():
    assert cumulative_theta([est(3, [0.2, 0.5])]) == 0.5
    assert cumulative_theta([est(0, [0, 0]), est(1, [0, 0])]) == 0.0
    assert cumulative_theta([est(1, [1, 0]), est(0, [1, 3])]) == 3.0
    with pytest.raises(ValueError):
        cumulative_theta([est(0, [1.0]), est(2, [1.0])])
    with pytest.raises(ValueError):
        cumulative_theta([])


def test_tail_bound():
    assert geometric_tail_bound([est(0, [1.0]), est(1, [0.5])]) == pytest.approx(0.5)
    assert geometric_tail_bound([est(0, [1.0]), est(1, [1.5])]) == math.inf
    assert geometric_tail_bound([est(0, [1.0])]) == math.inf


def test_cumulative_truncation():
    lags = [estimate_theta(M1, k, 2, reps=200, seed=2) for k in range(41)]
    short, full = cumulative_theta(lags[:21]), cumulative_theta(lags)
    assert math.isfinite(short)
    assert (full - short) / full < 0.05


def test_min_eigenvalue_reexport():
    assert min_eigenvalue([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0)


def test_matches_closed_form_for_scalar_ar():
    # for a scalar linear recursion the swap propagates deterministically:
    # theta_k = sqrt(2) * max_probe |a(p) a(p-1) ... a(p-k+1)|
    n = 500
    a = lambda i: 0.6 * math.cos(2 * math.pi * i / n)
    for k in range(4):
        exact = max(math.sqrt(2) * abs(math.prod(a(p - l) for l in range(k)))
                    for p in probe_indices(n))
        got = estimate_theta(M1, k, 2, reps=2000, seed=11 + k).max_over_coords
        assert abs(got / exact - 1) < 0.06
