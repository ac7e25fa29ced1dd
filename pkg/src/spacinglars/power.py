"""Power of the spacing test.

Three independent routes to ``P_mu{S <= alpha}`` for ``U ~ N(mu, R)``:

* :func:`spacing_power` -- ``alpha`` times a Gaussian expectation of a cone
  weight, integrated by randomized QMC in the rank-``r`` latent space of R;
* :func:`spacing_power_direct` -- brute-force frequency of rejection;
* :func:`power_2d` -- deterministic quadrature over the four convex pieces of
  the rejection region when ``p = 2``.

:func:`chisq_power` is the Pearson ``||Y||^2`` comparator.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .distfn import chisq_quantile, chisq_sf, norm_isf, norm_isf_log, norm_logsf
from .qmc import (IntegratorConfig, PowerEstimate, factor_covariance, gaussian_expectation,
                  substream)
from .spacing import spacing_pvalues

__all__ = [
    "PowerEstimate",
    "Region2D",
    "h_alpha",
    "g_alpha",
    "cone_weight",
    "spacing_power",
    "spacing_power_direct",
    "power_2d",
    "power_2d_mean",
    "chisq_power",
]


def _check_alpha(alpha, allow_one=False):
    ok = 0.0 < alpha <= 1.0 if allow_one else 0.0 < alpha < 1.0
    if not ok:
        raise ValueError(f"alpha must lie in (0, 1{']' if allow_one else ')'}, got {alpha}")


def _h(ell, log_alpha):
    return norm_isf_log(log_alpha + norm_logsf(ell)) - ell


def h_alpha(ell, alpha):
    """Exponent shift ``isf(alpha * sf(ell)) - ell``.

    Nonnegative, non-increasing on ``ell >= isf(alpha / 2)`` and vanishing at
    infinity. Accepts scalars or arrays.

    Raises:
        ValueError: ``alpha`` outside (0, 1] or ``ell < isf(alpha / 2)``.
    """
    _check_alpha(alpha, allow_one=True)
    ell = np.asarray(ell, dtype=float)
    if np.any(ell < norm_isf(alpha / 2.0) - 1e-12):
        raise ValueError("h_alpha is defined for ell >= isf(alpha/2)")
    return _h(ell, math.log(alpha))


def g_alpha(x, alpha):
    """Boundary map ``isf(sf(x) / alpha)``; requires ``sf(x) < alpha``."""
    _check_alpha(alpha, allow_one=True)
    x = np.asarray(x, dtype=float)
    logp = norm_logsf(x) - math.log(alpha)
    if np.any(logp >= 0.0):
        raise ValueError("g_alpha requires sf(x) < alpha")
    return norm_isf_log(logp)


def cone_weight(u, mu, alpha):
    """Weight ``exp(eps * mu_i * h_alpha(eps * u_i))`` of the cone containing ``u``.

    ``(i, eps)`` is the signed argmax of ``|u|``; only that cone contributes.
    ``u`` may be a single point or an (m, p) batch. The shift is evaluated by
    the same formula even below ``isf(alpha/2)``, where it stays well defined.
    """
    _check_alpha(alpha, allow_one=True)
    u = np.asarray(u, dtype=float)
    mu = np.asarray(mu, dtype=float).ravel()
    single = u.ndim == 1
    u = np.atleast_2d(u)
    rows = np.arange(u.shape[0])
    i = np.argmax(np.abs(u), axis=1)
    ui = u[rows, i]
    eps = np.where(ui < 0, -1.0, 1.0)
    coef = eps * mu[i]
    out = np.ones(u.shape[0])
    live = coef != 0.0
    if live.any():
        out[live] = np.exp(coef[live] * _h(eps[live] * ui[live], math.log(alpha)))
    return out[0] if single else out


def _clamp(est: PowerEstimate) -> PowerEstimate:
    return PowerEstimate(min(max(est.value, 0.0), 1.0), est.stderr, est.budget, est.method)


def spacing_power(mu, R, alpha, cfg: IntegratorConfig | None = None, tau_rel=None,
                  workers=None) -> PowerEstimate:
    """Power ``P_mu{S <= alpha}`` as ``alpha * E_mu[cone weight]``.

    The Gaussian expectation runs in the latent space of a spectral factor of
    ``R`` (dimension = rank of R), which for ``R = X^T X`` is rank(X) <= n.
    """
    _check_alpha(alpha)
    mu = np.asarray(mu, dtype=float).ravel()
    gf = factor_covariance(R, tau_rel, mean=mu)
    est = gaussian_expectation(lambda u: cone_weight(u, mu, alpha), gf, cfg, workers)
    return _clamp(PowerEstimate(alpha * est.value, alpha * est.stderr, est.budget, est.method))


def spacing_power_direct(mu, R, alpha, nrep=100_000, seed=0, chunk=20_000) -> PowerEstimate:
    """Rejection frequency of the spacing test over ``nrep`` draws ``U ~ N(mu, R)``."""
    _check_alpha(alpha)
    if nrep < 1:
        raise ValueError("nrep must be positive")
    mu = np.asarray(mu, dtype=float).ravel()
    R = np.asarray(R, dtype=float)
    gf = factor_covariance(R, mean=mu)
    hits = 0
    for c, start in enumerate(range(0, nrep, chunk)):
        m = min(chunk, nrep - start)
        rng = substream(seed, c)
        U = rng.standard_normal((m, gf.rank)) @ gf.factor.T + mu
        hits += int(np.count_nonzero(spacing_pvalues(U, R) <= alpha))
    p = hits / nrep
    return PowerEstimate(p, math.sqrt(p * (1.0 - p) / nrep), nrep, "direct_mc")


class Region2D:
    """Rejection region ``{S <= alpha}`` for ``p = 2``, ``R = [[1, rho], [rho, 1]]``.

    Four convex pieces indexed by ``(sign, axis)``: the outer coordinate
    ``sign * U_axis`` is at least ``isf(alpha / 2)`` and the other coordinate
    lies in an interval around ``rho * U_axis`` whose half-widths are
    ``g_alpha(sign * U_axis)`` times ``1 -/+ rho``.
    """

    pieces = ((+1, 0), (+1, 1), (-1, 0), (-1, 1))

    def __init__(self, alpha, rho):
        _check_alpha(alpha)
        if not abs(rho) < 1.0 - 1e-8:
            raise ValueError("|rho| must be < 1 - 1e-8")
        self.alpha = alpha
        self.rho = rho
        self.threshold = norm_isf(alpha / 2.0)

    def inner_bounds(self, sign, outer):
        """Interval for the inner coordinate given the outer one (arrays ok)."""
        outer = np.asarray(outer, dtype=float)
        v = sign * outer
        g = np.where(v >= self.threshold, g_alpha(np.maximum(v, self.threshold), self.alpha),
                     np.nan)
        rho = self.rho
        lo = rho * outer - g * (1.0 + sign * rho)
        hi = rho * outer + g * (1.0 - sign * rho)
        return lo, hi

    def membership(self, U):
        """(m, 4) boolean array: which piece each row of ``U`` falls in."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        out = np.zeros((U.shape[0], 4), dtype=bool)
        for k, (sign, axis) in enumerate(self.pieces):
            outer = U[:, axis]
            inner = U[:, 1 - axis]
            ok = sign * outer >= self.threshold
            lo, hi = self.inner_bounds(sign, np.where(ok, outer, sign * self.threshold))
            out[:, k] = ok & (inner >= lo) & (inner <= hi)
        return out

    def contains(self, U):
        return self.membership(U).any(axis=1)


def _interval_prob(a, b):
    # P(a <= Z <= b) without cancellation in either tail
    if a > 0.0:
        return special.ndtr(-a) - special.ndtr(-b)
    return special.ndtr(b) - special.ndtr(a)


def power_2d_mean(mean, rho, alpha, tol=1e-8) -> PowerEstimate:
    """``P(N(mean, R(rho)) in rejection region)`` by 1-d adaptive quadrature per piece."""
    region = Region2D(alpha, rho)
    mean = np.asarray(mean, dtype=float).ravel()
    s = math.sqrt(1.0 - rho * rho)
    t = region.threshold
    total = 0.0
    evals = 0
    for sign, axis in region.pieces:
        m_out, m_in = mean[axis], mean[1 - axis]

        def integrand(v, sign=sign, m_out=m_out, m_in=m_in):
            outer = sign * v
            lo, hi = region.inner_bounds(sign, outer)
            c = m_in + rho * (outer - m_out)
            dens = math.exp(-0.5 * (outer - m_out) ** 2) / math.sqrt(2.0 * math.pi)
            return dens * _interval_prob((float(lo) - c) / s, (float(hi) - c) / s)

        centre = sign * m_out
        upper = max(t, centre) + 12.0
        pts = [centre] if t < centre < upper else None
        val, _, info = integrate.quad(integrand, t, upper, epsabs=tol / 8, epsrel=1e-10,
                                      limit=200, points=pts, full_output=1)
        evals += info["neval"]
        total += val
    return PowerEstimate(min(max(total, 0.0), 1.0), 0.0, evals, "quad2d")


def power_2d(beta, rho, alpha, tol=1e-8) -> PowerEstimate:
    """Two-predictor power ``k_{alpha,rho}(beta) = P(N(R beta, R) in region)``."""
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != 2:
        raise ValueError("beta must have two entries")
    R = np.array([[1.0, rho], [rho, 1.0]])
    return power_2d_mean(R @ beta, rho, alpha, tol)


def chisq_power(ncp, n, alpha) -> PowerEstimate:
    """Power of the level-``alpha`` test rejecting for large ``||Y||^2 ~ chi2(n, ncp)``."""
    _check_alpha(alpha)
    q = chisq_quantile(1.0 - alpha, n)
    return PowerEstimate(float(chisq_sf(q, n, ncp)), 0.0, 1, "closed_form")
