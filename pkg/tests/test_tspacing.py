import math
import warnings

import numpy as np
import pytest
from scipy import linalg, stats

from spacinglars.simlab import gen_design, ks_uniform
from spacinglars.tspacing import (DegenerateNoise, RankWarning, pinv_sqrt, reduced_gram,
                                  sigma_hat, t_spacing_pvalue)


def test_pinv_sqrt_full_rank(rng):
    A = rng.standard_normal((5, 5))
    M = A @ A.T + np.eye(5)
    B = pinv_sqrt(M)
    np.testing.assert_allclose(B @ M @ B, np.eye(5), atol=1e-12)
    np.testing.assert_allclose(B, linalg.inv(linalg.sqrtm(M)).real, atol=1e-10)


def test_pinv_sqrt_projector(rng):
    A = rng.standard_normal((6, 3))
    M = A @ A.T
    B = pinv_sqrt(M)
    Q, _ = np.linalg.qr(A)
    np.testing.assert_allclose(B @ M @ B, Q @ Q.T, atol=1e-10)
    np.testing.assert_allclose(B, B.T, atol=1e-14)


def test_pinv_sqrt_rejects_asymmetric():
    with pytest.raises(ValueError):
        pinv_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_reduced_gram_naive(rng):
    X = gen_design(7, 5, rng)
    for i in range(5):
        xi = X[:, [i]]
        P = np.eye(7) - xi @ xi.T
        Xo = np.delete(X, i, axis=1)
        np.testing.assert_allclose(reduced_gram(X, i), Xo.T @ P @ Xo, atol=1e-14)


def test_sigma_hat_is_residual_norm(rng):
    # with X_{-i} of rank n the whitened norm is the residual after projecting out x_i
    n, p = 8, 20
    X = gen_design(n, p, rng)
    Y = rng.standard_normal(n) * 2.5
    U, R = X.T @ Y, X.T @ X
    for i in (0, 7, 19):
        xi = X[:, i]
        ref = np.linalg.norm(Y - xi * (xi @ Y)) / math.sqrt(n - 1)
        s, rank = sigma_hat(X, U, R, i, return_rank=True)
        assert rank == n - 1
        assert s == pytest.approx(ref, rel=1e-10)


def test_sigma_hat_squared_mean(rng):
    n, p, sigma = 6, 15, 1.7
    X = gen_design(n, p, rng)
    R = X.T @ X
    vals = []
    for _ in range(4000):
        Y = sigma * rng.standard_normal(n)
        vals.append(sigma_hat(X, X.T @ Y, R, 3) ** 2)
    vals = np.array(vals)
    assert abs(vals.mean() - sigma**2) < 4 * vals.std() / math.sqrt(vals.size)


def test_t_against_naive(rng):
    n, p = 10, 25
    X = gen_design(n, p, rng)
    Y = rng.standard_normal(n)
    res = t_spacing_pvalue(X, Y)
    U = X.T @ Y
    i = int(np.argmax(np.abs(U)))
    s = np.linalg.norm(Y - X[:, i] * U[i]) / math.sqrt(n - 1)
    ref = stats.t.sf(res.knots.lambda1 / s, n - 1) / stats.t.sf(res.knots.lambda2 / s, n - 1)
    assert res.sigma_hat == pytest.approx(s, rel=1e-10)
    assert res.p_value == pytest.approx(ref, rel=1e-9)
    assert res.rank == n - 1


def test_t_identity_example():
    with pytest.warns(RankWarning):
        res = t_spacing_pvalue(np.eye(2), np.array([2.0, 1.0]))
    assert res.sigma_hat == pytest.approx(1.0, rel=1e-14)
    ref = stats.t.sf(2.0, 1) / stats.t.sf(1.0, 1)
    assert res.p_value == pytest.approx(ref, rel=1e-12)


def test_t_scale_invariance_bitexact(rng):
    n, p = 12, 30
    X = gen_design(n, p, rng)
    Y = rng.standard_normal(n)
    base = t_spacing_pvalue(X, Y).p_value
    for k in (-3, 1, 5):
        assert t_spacing_pvalue(X, Y * 2.0**k).p_value == base


def test_t_null_uniform(rng):
    n, p = 10, 30
    X = gen_design(n, p, rng)
    T = [t_spacing_pvalue(X, rng.standard_normal(n)).p_value for _ in range(2000)]
    d, rej = ks_uniform(T)
    assert not rej


def test_t_zero_noise():
    X = np.eye(3)[:, [0, 1, 2, 0]] * 1.0
    X[:, 3] = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankWarning)
        with pytest.raises(DegenerateNoise):
            t_spacing_pvalue(X, np.array([3.0, 0.0, 0.0]))


def test_t_needs_two_rows():
    with pytest.raises(ValueError):
        t_spacing_pvalue(np.array([[1.0, 1.0]]), np.array([1.0]))


def test_spec_small_examples(rng):
    np.testing.assert_allclose(reduced_gram(np.eye(2), 0), [[1.0]])
    np.testing.assert_allclose(pinv_sqrt(np.array([[4.0]])), [[0.5]])
    np.testing.assert_allclose(pinv_sqrt(np.eye(4)), np.eye(4), atol=1e-15)
    with pytest.warns(RankWarning):
        res = t_spacing_pvalue(np.eye(2), np.array([2.0, 1.0]))
    assert (res.t1, res.t2) == (pytest.approx(2.0), pytest.approx(1.0))
    assert res.p_value == pytest.approx(0.590334, abs=5e-7)


def test_reduced_gram_psd_and_naive(rng):
    X = gen_design(5, 8, rng)
    A = reduced_gram(X, 2)
    x3 = X[:, [2]]
    Xo = np.delete(X, 2, axis=1)
    naive = ((np.eye(5) - x3 @ x3.T) @ Xo).T @ ((np.eye(5) - x3 @ x3.T) @ Xo)
    np.testing.assert_allclose(A, naive, atol=1e-10)
    assert np.max(np.abs(A - A.T)) <= 1e-12
    assert np.linalg.eigvalsh(A)[0] >= -1e-8


def test_pinv_sqrt_rank3_projector(rng):
    B = rng.standard_normal((5, 3))
    M = B @ B.T
    A = pinv_sqrt(M)
    w, Q = np.linalg.eigh(M)
    Qr = Q[:, w > 1e-10 * w.max()]
    assert np.linalg.norm(A @ M @ A - Qr @ Qr.T) <= 1e-8


def test_sigma_hat_homogeneous(rng):
    X = gen_design(9, 20, rng)
    Y = rng.standard_normal(9)
    s = sigma_hat(X, X.T @ Y, X.T @ X, 4)
    assert sigma_hat(X, X.T @ (3.5 * Y), X.T @ X, 4) == pytest.approx(3.5 * s, rel=1e-12)


def test_sigma_hat_squared_mean_fixed_index(rng):
    # chi2(n-1)/(n-1) law for a fixed column; a data-selected column biases it down
    n, p = 50, 100
    vals = []
    for _ in range(2000):
        X = gen_design(n, p, rng)
        Y = rng.standard_normal(n)
        vals.append(sigma_hat(X, X.T @ Y, X.T @ X, 0) ** 2)
    vals = np.array(vals)
    assert abs(vals.mean() - 1.0) < 3 * vals.std(ddof=1) / math.sqrt(vals.size)
