import math

import numpy as np
import pytest

from spacinglars.distfn import norm_sf
from spacinglars.simlab import ks_uniform
from spacinglars.spacing import log_pivot, reject, spacing_pvalue, spacing_pvalues


def test_orthogonal_examples():
    res = spacing_pvalue(np.array([2.0, 1.0]), np.eye(2))
    assert res.p_value == pytest.approx(norm_sf(2.0) / norm_sf(1.0), rel=1e-14)
    assert res.p_value == pytest.approx(0.143393, abs=5e-7)
    res = spacing_pvalue(np.array([2.0, 0.0]), np.eye(2))
    assert res.p_value == pytest.approx(2 * norm_sf(2.0), rel=1e-14)
    d = res.as_dict()
    assert set(d) == {"p_value", "lambda1", "lambda2", "i_hat", "eps_hat"}


def test_far_tail_stays_positive():
    res = spacing_pvalue(np.array([45.0, 40.0]), np.eye(2))
    assert 0.0 < res.p_value < 1e-90
    assert res.log_p == pytest.approx(-0.5 * (45**2 - 40**2) + math.log(40 / 45), rel=1e-3)


def test_pivot_in_unit_interval(rng):
    U = rng.standard_normal((1000, 4)) * 3
    R = np.eye(4)
    S = spacing_pvalues(U, R)
    assert np.all((S > 0) & (S <= 1))


def test_permutation_and_sign_invariance(rng):
    X = rng.standard_normal((10, 5))
    X /= np.linalg.norm(X, axis=0)
    R = X.T @ X
    U = rng.standard_normal(5)
    base = spacing_pvalue(U, R).p_value
    for _ in range(10):
        perm = rng.permutation(5)
        d = rng.choice([-1.0, 1.0], size=5)
        Rp = (R * np.outer(d, d))[np.ix_(perm, perm)]
        assert spacing_pvalue((d * U)[perm], Rp).p_value == pytest.approx(base, rel=1e-12)


def test_null_uniform_correlated(rng):
    X = rng.standard_normal((6, 8))
    X /= np.linalg.norm(X, axis=0)
    R = X.T @ X
    U = rng.standard_normal((4000, 6)) @ X
    d, rej = ks_uniform(spacing_pvalues(U, R))
    assert not rej


def test_log_pivot_rejects_negative_knot():
    with pytest.raises(AssertionError):
        log_pivot(1.0, -0.1)


def test_reject_is_closed():
    assert reject(0.03, 0.05)
    assert reject(0.05, 0.05)
    assert not reject(0.07, 0.05)
    assert not reject(0.0500001, 0.05)
    with pytest.raises(ValueError):
        reject(0.1, 1.0)
