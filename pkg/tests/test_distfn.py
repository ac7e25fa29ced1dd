import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from spacinglars.distfn import (chisq_quantile, chisq_sf, norm_isf, norm_isf_log, norm_logsf,
                                norm_pdf, norm_sf, student_logsf, student_sf)

mpmath.mp.dps = 50


def test_norm_pdf_values():
    assert norm_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert norm_pdf(1.0) == norm_pdf(-1.0)
    assert norm_pdf(2.0) == pytest.approx(float(mpmath.npdf(2)), rel=1e-14)
    assert norm_pdf(2.0) == pytest.approx(0.05399097, abs=5e-9)


def test_norm_sf_values():
    assert norm_sf(0.0) == 0.5
    assert norm_sf(2.0) == pytest.approx(0.02275013, abs=5e-9)
    x = np.linspace(-8, 8, 101)
    np.testing.assert_allclose(norm_sf(x) + norm_sf(-x), 1.0, rtol=0, atol=1e-15)


@pytest.mark.parametrize("x", [0.5, 3.0, 10.0, 20.0, 30.0, 37.0, 40.0])
def test_norm_logsf_against_mpmath(x):
    exact = float(mpmath.log(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2))
    assert norm_logsf(x) == pytest.approx(exact, rel=1e-13)
    assert np.isfinite(norm_logsf(x))


def test_norm_isf_examples():
    assert norm_isf(0.5) == 0.0
    assert norm_isf(float(norm_sf(2.0))) == pytest.approx(2.0, abs=1e-8)
    # the truncated 8-digit constant maps to 2 within its own rounding
    assert norm_isf(0.02275013) == pytest.approx(2.0, abs=1e-6)
    assert norm_isf_log(math.log(0.5)) == pytest.approx(0.0, abs=1e-15)


def test_norm_isf_roundtrip():
    p = np.concatenate([np.logspace(-300, -1, 400), np.linspace(0.1, 0.99, 100)])
    back = norm_sf(norm_isf(p))
    assert np.max(np.abs(back / p - 1)) <= 1e-12


def test_norm_isf_log_roundtrip():
    logp = -np.logspace(-6, math.log10(700), 300)
    back = norm_logsf(norm_isf_log(logp))
    assert np.max(np.abs(back - logp) / np.abs(logp)) <= 1e-12


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_norm_isf_rejects(p):
    with pytest.raises(ValueError):
        norm_isf(p)


def test_nonfinite_rejected():
    for fn in (norm_pdf, norm_sf, norm_logsf):
        with pytest.raises(ValueError):
            fn(float("inf"))
    with pytest.raises(ValueError):
        norm_isf_log(0.0)


def test_student_sf_examples():
    assert student_sf(0.0, 5) == 0.5
    assert student_sf(1.0, 1) == pytest.approx(0.25, rel=1e-14)
    assert student_sf(2.0, 1) == pytest.approx(0.5 - math.atan(2) / math.pi, rel=1e-14)
    assert student_sf(2.0, 1) == pytest.approx(0.147584, abs=5e-7)
    with pytest.raises(ValueError):
        student_sf(1.0, 0)
    with pytest.raises(ValueError):
        student_sf(1.0, 2.5)


@pytest.mark.parametrize("t,nu", [(3.0, 4), (50.0, 3), (200.0, 49), (1e3, 10), (4999.0, 200)])
def test_student_logsf_deep_tail(t, nu):
    x = mpmath.mpf(nu) / (nu + mpmath.mpf(t) ** 2)
    exact = mpmath.log(mpmath.betainc(nu / 2.0, 0.5, 0, x, regularized=True) / 2)
    assert student_logsf(t, nu) == pytest.approx(float(exact), rel=1e-11)


def test_student_tends_to_normal():
    x = np.linspace(-4, 4, 41)
    np.testing.assert_allclose(student_sf(x, 10**7), norm_sf(x), atol=1e-7)


def test_survival_functions_decreasing():
    # below -8 the survival function rounds to 1.0 in double precision
    x = np.linspace(-5, 30, 1000)
    assert np.all(np.diff(norm_sf(x)) < 0)
    assert np.all(np.diff(norm_logsf(np.linspace(-10, 40, 1000))) < 0)
    assert np.all(np.diff(student_sf(np.linspace(-5, 30, 1000), 7)) < 0)
    xs = np.linspace(0.01, 30, 1000)
    assert np.all(np.diff(chisq_sf(xs, 3, 2.0)) < 0)


def test_chisq_central():
    assert chisq_sf(2.0, 2) == pytest.approx(math.exp(-1), rel=1e-14)
    for k in (1, 2, 5, 17):
        x = np.linspace(0.1, 40, 25)
        np.testing.assert_allclose(chisq_sf(x, k, 0.0), stats.chi2.sf(x, k), rtol=1e-12)


@pytest.mark.parametrize("k,ncp", [(2, 5.0), (10, 0.3), (50, 120.0), (3, 900.0)])
def test_chisq_noncentral_matches_scipy(k, ncp):
    x = np.linspace(0.5, 3 * (k + ncp), 20)
    np.testing.assert_allclose(chisq_sf(x, k, ncp), stats.ncx2.sf(x, k, ncp), rtol=1e-8,
                               atol=1e-300)


def test_chisq_sampling_oracle(rng):
    N = 10**6
    mu = np.array([math.sqrt(5.0), 0.0])
    Z = rng.standard_normal((N, 2)) + mu
    freq = np.mean(np.sum(Z * Z, axis=1) > 5.0)
    se = math.sqrt(freq * (1 - freq) / N)
    assert abs(chisq_sf(5.0, 2, 5.0) - freq) < 3 * se


def test_chisq_increasing_in_ncp():
    ncp = np.linspace(0, 50, 200)
    vals = np.array([chisq_sf(7.0, 4, c) for c in ncp])
    assert np.all(np.diff(vals) > 0)


def test_chisq_quantile_roundtrip():
    for k in (1, 2, 10, 100):
        for q in (0.5, 0.95, 0.999):
            assert chisq_sf(chisq_quantile(q, k), k) == pytest.approx(1 - q, rel=1e-10)


def test_chisq_rejects():
    with pytest.raises(ValueError):
        chisq_sf(-1.0, 2)
    with pytest.raises(ValueError):
        chisq_sf(1.0, 0)
    with pytest.raises(ValueError):
        chisq_sf(1.0, 2, -0.5)
