"""First two LARS knots from the correlation vector and its covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENOM_TOL = 1e-8


class NearUnitCorrelation(ValueError):
    def __init__(self, j: int):
        self.j = j
        super().__init__(f"column {j + 1} is (anti)collinear with the selected column")


@dataclass(frozen=True)
class KnotResult:
    """Knots ``lambda1 >= lambda2 >= 0`` and the selection pair.

    ``i_hat`` is 0-based here; serialized outputs report it 1-based.
    """

    lambda1: float
    lambda2: float
    i_hat: int
    eps_hat: int

    def as_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "i_hat": self.i_hat + 1,
            "eps_hat": self.eps_hat,
        }


def argmax_abs(U) -> tuple[int, int]:
    """Smallest index attaining ``max |U_j|`` and the sign of that entry (+1 on zero)."""
    U = np.asarray(U, dtype=float).ravel()
    if U.size == 0:
        raise ValueError("empty vector")
    i = int(np.argmax(np.abs(U)))
    return i, (-1 if U[i] < 0 else 1)


def second_knot(U, R, i: int, eps: int) -> float:
    """``lambda_2^{i,eps}``: the largest competitor knot once ``(i, eps)`` entered.

    For every ``j != i`` the residual ``U_j - R_ji U_i`` is compared with the
    two equiangular denominators ``1 - eps R_ji`` and ``1 + eps R_ji``.

    Raises:
        NearUnitCorrelation: a denominator with magnitude <= 1e-8.
    """
    U = np.asarray(U, dtype=float).ravel()
    R = np.asarray(R, dtype=float)
    r = np.delete(R[:, i], i)
    resid = np.delete(U, i) - r * U[i]
    lo = 1.0 - eps * r
    hi = 1.0 + eps * r
    bad = np.flatnonzero((np.abs(lo) <= DENOM_TOL) | (np.abs(hi) <= DENOM_TOL))
    if bad.size:
        j = int(bad[0])
        raise NearUnitCorrelation(j + (j >= i))
    return float(np.max(np.maximum(resid / lo, -resid / hi)))


def knots(U, R) -> KnotResult:
    i, eps = argmax_abs(U)
    U = np.asarray(U, dtype=float).ravel()
    return KnotResult(float(eps * U[i]), second_knot(U, R, i, eps), i, eps)


def knots_batch(U, R):
    """Vectorized knots for a batch of correlation vectors.

    Args:
        U: array of shape (m, p), one correlation vector per row.
        R: (p, p) covariance shared by all rows.

    Returns:
        ``(lambda1, lambda2, i_hat, eps_hat)`` arrays of length m.
    """
    U = np.asarray(U, dtype=float)
    R = np.asarray(R, dtype=float)
    m, p = U.shape
    rows = np.arange(m)
    i_hat = np.argmax(np.abs(U), axis=1)
    Ui = U[rows, i_hat]
    eps = np.where(Ui < 0, -1.0, 1.0)
    lam1 = eps * Ui
    Ri = R[i_hat]  # (m, p): row i_hat of R, equal to column by symmetry
    resid = U - Ri * Ui[:, None]
    lo = 1.0 - eps[:, None] * Ri
    hi = 1.0 + eps[:, None] * Ri
    own = np.zeros((m, p), dtype=bool)
    own[rows, i_hat] = True
    bad = ~own & ((np.abs(lo) <= DENOM_TOL) | (np.abs(hi) <= DENOM_TOL))
    if bad.any():
        raise NearUnitCorrelation(int(np.argwhere(bad)[0, 1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = np.maximum(resid / lo, -resid / hi)
    cand[own] = -np.inf
    lam2 = cand.max(axis=1)
    return lam1, lam2, i_hat, eps.astype(int)
