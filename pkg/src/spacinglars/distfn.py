"""Scalar distribution functions used by the pivots and power formulas.

Everything here accepts scalars or numpy arrays and returns the same shape.
Normal tails are handled in the log domain so that ratios such as
``sf(l1) / sf(l2)`` stay accurate far beyond the point where the survival
function itself underflows.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

__all__ = [
    "norm_pdf",
    "norm_sf",
    "norm_logsf",
    "norm_isf",
    "norm_isf_log",
    "student_sf",
    "student_logsf",
    "chisq_sf",
    "chisq_quantile",
]


def _finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _out(arr):
    return arr.item() if np.ndim(arr) == 0 else arr


def norm_pdf(x):
    """Standard normal density."""
    x = _finite(x)
    return _out(np.exp(-0.5 * x * x - LOG_SQRT_2PI))


def norm_sf(x):
    """Standard normal survival function ``1 - Phi(x)``."""
    x = _finite(x)
    return _out(special.ndtr(-x))


def norm_logsf(x):
    """Natural log of the standard normal survival function.

    Stays finite well past ``x = 37`` where ``norm_sf`` underflows.
    """
    x = _finite(x)
    return _out(special.log_ndtr(-x))


def _polish(x, logp, steps=2):
    # Newton on log sf: d/dx log sf(x) = -pdf(x)/sf(x)
    for _ in range(steps):
        lsf = special.log_ndtr(-x)
        hazard = np.exp(-0.5 * x * x - LOG_SQRT_2PI - lsf)
        x = x + (lsf - logp) / hazard
    return x


def norm_isf(p):
    """Inverse of the normal survival function.

    Args:
        p: probability in (0, 1).

    Returns:
        ``x`` with ``norm_sf(x) == p``.
    """
    p = _finite(p, "p")
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("p must lie in (0, 1)")
    x = -special.ndtri(p)
    return _out(_polish(x, np.log(p)))


def norm_isf_log(logp):
    """Inverse normal survival function parametrised by ``log p``.

    Stable for ``log p`` down to about -700 (and beyond).
    """
    logp = _finite(logp, "logp")
    if np.any(logp >= 0.0):
        raise ValueError("logp must be negative")
    x = -special.ndtri_exp(logp)
    return _out(_polish(x, logp))


def _check_df(nu):
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 1) or np.any(nu != np.floor(nu)):
        raise ValueError("degrees of freedom must be a positive integer")
    return nu


def _log_betainc_cf(a, b, x, max_iter=500, tol=1e-15):
    """log I_x(a, b) by the modified Lentz continued fraction.

    Valid (fast convergence) for ``x < (a + 1) / (a + b + 2)``.
    """
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        h = h * d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < tol):
            break
    front = (a * np.log(x) + b * np.log1p(-x) - np.log(a)
             - (special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b)))
    return front + np.log(h)


def student_logsf(t, nu):
    """Log survival function of Student's t with ``nu`` degrees of freedom.

    The upper tail uses the incomplete-beta continued fraction directly in
    log form, so it does not underflow for large ``t``.
    """
    t = _finite(t, "t")
    nu = _check_df(nu)
    t, nu = np.broadcast_arrays(t, nu)
    out = np.empty(t.shape)
    a = 0.5 * nu
    x = nu / (nu + t * t)
    tail = (t > 0) & (x < (a + 1.0) / (a + 2.5))
    if np.any(tail):
        out[tail] = math.log(0.5) + _log_betainc_cf(a[tail], 0.5, x[tail])
    rest = ~tail
    if np.any(rest):
        out[rest] = np.log(special.stdtr(nu[rest], -t[rest]))
    return _out(out)


def student_sf(t, nu):
    """Survival function ``1 - F_nu(t)`` of Student's t distribution."""
    t = _finite(t, "t")
    nu = _check_df(nu)
    return _out(special.stdtr(nu, -t))


def chisq_sf(x, k, ncp=0.0):
    """Survival function of the (noncentral) chi-squared law.

    ``x`` and ``ncp`` may be arrays; they are broadcast elementwise.

    The noncentral case sums Poisson(ncp/2)-weighted central survival terms,
    starting at the Poisson mode and walking outwards until a term drops
    below 1e-16 of the running total.

    Args:
        x: evaluation point, ``x >= 0``.
        k: degrees of freedom, positive integer.
        ncp: noncentrality ``||mu||^2``, nonnegative.
    """
    if np.ndim(x) or np.ndim(ncp):
        return np.vectorize(_chisq_sf1, otypes=[float])(x, k, ncp)
    return _chisq_sf1(x, k, ncp)


def _chisq_sf1(x, k, ncp):
    x = float(x)
    ncp = float(ncp)
    if not (math.isfinite(x) and math.isfinite(ncp)):
        raise ValueError("x and ncp must be finite")
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if x < 0 or ncp < 0:
        raise ValueError("x and ncp must be nonnegative")
    k = int(k)
    if ncp == 0.0:
        return float(special.chdtrc(k, x))
    lam = 0.5 * ncp
    mode = int(math.floor(lam))

    def weight(j):
        return math.exp(-lam + j * math.log(lam) - math.lgamma(j + 1.0))

    total = weight(mode) * special.chdtrc(k + 2 * mode, x)
    # upwards the central survival terms grow, so stop on the weight alone
    j = mode + 1
    while True:
        w = weight(j)
        total += w * special.chdtrc(k + 2 * j, x)
        if w <= 1e-16 * total or w == 0.0:
            break
        j += 1
    j = mode - 1
    while j >= 0:
        t = weight(j) * special.chdtrc(k + 2 * j, x)
        total += t
        if t <= 1e-16 * total:
            break
        j -= 1
    return min(total, 1.0)


def chisq_quantile(q, k):
    """Quantile of the central chi-squared law with ``k`` degrees of freedom."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    return float(special.chdtri(int(k), 1.0 - q))
