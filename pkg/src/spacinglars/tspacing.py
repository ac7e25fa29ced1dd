"""Studentized spacing test (t-spacing) for unknown noise scale.

The noise level is estimated from the part of ``U`` orthogonal to the
selected predictor: with ``V = U_{-i} - R_{-i,i} U_i`` and
``R_{-i} = X_{-i}^T (Id - X_i X_i^T) X_{-i}``, the whitened norm
``||R_{-i}^{-1/2} V||^2 / sigma^2`` is chi-squared with ``n - 1`` degrees of
freedom under the null, independently of the knots' ratio.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distfn import student_logsf
from .knots import KnotResult, knots
from .model import correlate, gram

SYMMETRY_TOL = 1e-8


class RankWarning(UserWarning):
    """The rank hypothesis behind the exact null law does not hold."""


class DegenerateNoise(ValueError):
    """Estimated noise scale is zero: ``Y`` lies in the span of the selected column."""


@dataclass(frozen=True)
class TSpacingResult:
    p_value: float
    log_p: float
    t1: float
    t2: float
    sigma_hat: float
    knots: KnotResult
    rank: int

    def as_dict(self) -> dict:
        return {
            "p_value": self.p_value,
            "t1": self.t1,
            "t2": self.t2,
            "sigma_hat": self.sigma_hat,
            **self.knots.as_dict(),
        }


def _projected(X, i):
    xi = X[:, i]
    Xo = np.delete(X, i, axis=1)
    return Xo - np.outer(xi, xi @ Xo)


def reduced_gram(X, i: int) -> np.ndarray:
    """Gram matrix of the other columns after projecting out column ``i``."""
    P = _projected(np.asarray(X, dtype=float), i)
    A = P.T @ P
    return 0.5 * (A + A.T)


def _spectral(M, tau_rel):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.max(np.abs(M)), 1.0) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    if tau_rel is None:
        tau_rel = M.shape[0] * np.finfo(float).eps * 64
    top = w[-1] if w.size else 0.0
    keep = w > tau_rel * max(top, 0.0)
    return w, Q, keep


def pinv_sqrt(M, tau_rel=None) -> np.ndarray:
    """Symmetric square root of the Moore-Penrose pseudoinverse.

    Eigenvalues below ``tau_rel`` times the largest one are treated as zero;
    the default ``tau_rel`` is ``dim * eps * 64``.
    """
    w, Q, keep = _spectral(M, tau_rel)
    Qk = Q[:, keep]
    return (Qk / np.sqrt(w[keep])) @ Qk.T


def _whitened_norm(P, V, tau_rel=None):
    # eigenpairs of P^T P from the thin SVD of P: O(n^2 p) instead of O(p^3)
    _, sv, Zt = np.linalg.svd(P, full_matrices=False)
    w = sv * sv
    if tau_rel is None:
        tau_rel = P.shape[1] * np.finfo(float).eps * 64
    keep = w > tau_rel * max(w[0], 0.0) if w.size else w > 0
    z = (Zt[keep] @ V) / sv[keep]
    return float(np.linalg.norm(z)), int(keep.sum())


def sigma_hat(X, U, R, i: int, tau_rel=None, return_rank=False):
    """Noise-scale estimate ``||R_{-i}^{-1/2} V_{-i}|| / sqrt(n - 1)``.

    Warns with ``RankWarning`` when ``X_{-i}`` does not have rank ``n`` (so
    ``R_{-i}`` cannot have rank ``n - 1``); the divisor stays ``sqrt(n - 1)``
    regardless.

    Raises:
        DegenerateNoise: if the estimate is <= 1e-300.
    """
    X = np.asarray(X, dtype=float)
    U = np.asarray(U, dtype=float).ravel()
    R = np.asarray(R, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need n >= 2 observations")
    V = np.delete(U - R[:, i] * U[i], i)
    norm, rank = _whitened_norm(_projected(X, i), V, tau_rel)
    if rank != n - 1 or np.linalg.matrix_rank(np.delete(X, i, axis=1)) < n:
        warnings.warn(f"X without column {i + 1} does not have rank n = {n} "
                      f"(reduced Gram rank {rank}); the null law of T is only exact under "
                      "that rank condition", RankWarning, stacklevel=2)
    s = norm / math.sqrt(n - 1)
    if not s > 1e-300:
        raise DegenerateNoise("estimated noise scale is zero")
    return (s, rank) if return_rank else s


def t_spacing_pvalue(X, Y, tau_rel=None) -> TSpacingResult:
    """t-spacing p-value ``T`` for a unit-column design ``X`` and response ``Y``.

    ``T = sf_{n-1}(T1) / sf_{n-1}(T2)`` with ``T1 = lambda1 / sigma_hat`` and
    ``T2 = lambda2 / sigma_hat``, evaluated in the log domain.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need n >= 2 observations (Student degrees of freedom n - 1 >= 1)")
    U = correlate(X, Y)
    R = gram(X)
    kr = knots(U, R)
    s, rank = sigma_hat(X, U, R, kr.i_hat, tau_rel, return_rank=True)
    t1 = kr.lambda1 / s
    t2 = kr.lambda2 / s
    logp = min(float(student_logsf(t1, n - 1) - student_logsf(t2, n - 1)), 0.0)
    return TSpacingResult(math.exp(logp), logp, t1, t2, s, kr, rank)
