"""Randomized quasi-Monte-Carlo integration of Gaussian expectations.

``E[f(A z + m)]`` with ``z ~ N(0, Id_r)`` is estimated by a rank-1 lattice
rule (generating vector built component by component for a prime number of
points), periodized with the baker's transform, mapped to Gaussian space by
the normal quantile and randomized with independent Cranley-Patterson
shifts. The spread of the per-shift averages gives the standard error.
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

DEFAULT_POINTS = 2**12
DEFAULT_SHIFTS = 25
_U_EPS = 2.0**-53


@dataclass(frozen=True)
class IntegratorConfig:
    """Budget and seed for :func:`gaussian_expectation`.

    The lattice size is rounded up to the next prime, which is what gets
    reported as the budget.
    """

    lattice_points: int = DEFAULT_POINTS
    shifts: int = DEFAULT_SHIFTS
    seed: int = 0
    fallback: bool = False

    def __post_init__(self):
        if self.lattice_points < 16:
            raise ValueError("lattice_points must be >= 16")
        if self.shifts < 8:
            raise ValueError("shifts must be >= 8")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PowerEstimate:
    value: float
    stderr: float
    budget: int
    method: str

    def as_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "budget": self.budget,
                "method": self.method}


@dataclass(frozen=True)
class GaussianFactor:
    """``target = factor @ latent + mean`` with ``latent ~ N(0, Id_rank)``."""

    mean: np.ndarray
    factor: np.ndarray

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @property
    def dim(self) -> int:
        return self.factor.shape[0]

    def covariance(self) -> np.ndarray:
        return self.factor @ self.factor.T


class NonFiniteIntegrand(FloatingPointError):
    def __init__(self, latent):
        self.latent = np.asarray(latent)
        super().__init__(f"integrand is not finite at latent point {self.latent.tolist()}")


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index``; order-independent."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SPACING_THREADS", "1")))
    except ValueError:
        return 1


def factor_covariance(R, tau_rel=None, mean=None) -> GaussianFactor:
    """Spectral factor of a PSD matrix, dropping eigenvalues below ``tau_rel * max``.

    Columns are ordered by decreasing eigenvalue, so the leading lattice
    coordinates carry the largest variance.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.max(np.abs(R)), 1.0)
    if np.max(np.abs(R - R.T)) > 1e-8 * scale:
        raise ValueError("covariance is not symmetric")
    p = R.shape[0]
    if tau_rel is None:
        tau_rel = p * np.finfo(float).eps * 64
    w, Q = np.linalg.eigh(0.5 * (R + R.T))
    order = np.argsort(-w, kind="stable")  # ties keep their original order
    w, Q = w[order], Q[:, order]
    keep = w > tau_rel * max(w[0], 0.0)
    F = Q[:, keep] * np.sqrt(w[keep])
    mean = np.zeros(p) if mean is None else np.asarray(mean, dtype=float).ravel()
    return GaussianFactor(mean, F)


def next_prime(n: int) -> int:
    def is_prime(k):
        if k < 2:
            return False
        if k % 2 == 0:
            return k == 2
        f = 3
        while f * f <= k:
            if k % f == 0:
                return False
            f += 2
        return True

    while not is_prime(n):
        n += 1
    return n


def _primitive_root(n: int) -> int:
    m = n - 1
    factors, k, f = set(), m, 2
    while f * f <= k:
        while k % f == 0:
            factors.add(f)
            k //= f
        f += 1
    if k > 1:
        factors.add(k)
    for g in range(2, n):
        if all(pow(g, m // q, n) != 1 for q in factors):
            return g
    raise ValueError(f"no primitive root for {n}")


@functools.lru_cache(maxsize=16)
def lattice_generator(n: int, dim: int) -> np.ndarray:
    """Rank-1 lattice generating vector for prime ``n``, fast CBC construction.

    Minimizes the shift-averaged worst-case error in the Korobov space of
    smoothness 2 with product weights ``1/j^2``, one coordinate at a time,
    using the circulant structure over the multiplicative group mod ``n``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n < 3 or next_prime(n) != n:
        raise ValueError("n must be an odd prime")

    def omega(x):
        return 2.0 * math.pi**2 * (x * x - x + 1.0 / 6.0)

    g = _primitive_root(n)
    m = n - 1
    perm = np.empty(m, dtype=np.int64)
    perm[0] = 1
    for k in range(1, m):
        perm[k] = perm[k - 1] * g % n
    w_hat = np.fft.rfft(omega(perm / n))
    neg = (-np.arange(m)) % m
    idx = np.arange(n, dtype=np.int64)
    q = np.ones(n)
    z = np.empty(dim, dtype=np.int64)
    for s in range(dim):
        if s == 0:
            z[s] = 1
        else:
            qq = q[perm[neg]]
            err = np.fft.irfft(w_hat * np.fft.rfft(qq), m)
            z[s] = perm[int(np.argmin(err))]
        q *= 1.0 + omega((idx * z[s] % n) / n) / (s + 1) ** 2
    return z


def _lattice_points(n, z, shift):
    k = np.arange(n, dtype=np.int64)[:, None]
    x = np.mod((k * z[None, :] % n) / n + shift[None, :], 1.0)
    y = 1.0 - np.abs(2.0 * x - 1.0)
    return np.clip(y, _U_EPS, 1.0 - _U_EPS)


def _evaluate(f, gf, latent):
    vals = np.asarray(f(latent @ gf.factor.T + gf.mean), dtype=float)
    if vals.shape != (latent.shape[0],):
        vals = np.broadcast_to(vals, (latent.shape[0],))
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NonFiniteIntegrand(latent[np.argmax(bad)])
    return vals


def gaussian_expectation(f, gf: GaussianFactor, cfg: IntegratorConfig | None = None,
                         workers: int | None = None) -> PowerEstimate:
    """Estimate ``E f(target)`` for ``target ~ N(gf.mean, gf.factor gf.factor^T)``.

    Args:
        f: vectorized integrand mapping an (m, dim) array to m values.
        gf: Gaussian factor of the target law.
        cfg: lattice size, number of random shifts, seed, MC fallback flag.
        workers: threads used across shifts (default ``SPACING_THREADS`` or 1).
            The result does not depend on it.

    Returns:
        ``PowerEstimate`` whose ``stderr`` is the standard deviation of the
        per-shift means divided by ``sqrt(shifts)``.

    Raises:
        NonFiniteIntegrand: the offending latent point is attached.
    """
    cfg = cfg or IntegratorConfig()
    M = cfg.shifts
    r = gf.rank
    if cfg.fallback:
        n = cfg.lattice_points
        method = "direct_mc"
    else:
        n = next_prime(cfg.lattice_points)
        method = "mcqmc"
        z = lattice_generator(n, r) if r else None

    def replicate(m):
        rng = substream(cfg.seed, m)
        if r == 0:
            latent = np.zeros((n, 0))
        elif cfg.fallback:
            latent = rng.standard_normal((n, r))
        else:
            latent = special.ndtri(_lattice_points(n, z, rng.random(r)))
        return float(np.mean(_evaluate(f, gf, latent)))

    workers = workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            means = np.array(list(pool.map(replicate, range(M))))
    else:
        means = np.array([replicate(m) for m in range(M)])
    est = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(M))
    return PowerEstimate(est, se, n * M, method)


def sample_gaussian(gf: GaussianFactor, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw from ``N(gf.mean, gf.factor gf.factor^T)``; ``size`` adds a leading batch axis."""
    if size is None:
        return gf.factor @ rng.standard_normal(gf.rank) + gf.mean
    return rng.standard_normal((size, gf.rank)) @ gf.factor.T + gf.mean
