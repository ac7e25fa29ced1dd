"""Spacing test for LARS with known noise covariance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distfn import norm_logsf
from .knots import KnotResult, knots, knots_batch


@dataclass(frozen=True)
class SpacingResult:
    p_value: float
    log_p: float
    knots: KnotResult

    def as_dict(self) -> dict:
        return {"p_value": self.p_value, **self.knots.as_dict()}


def log_pivot(lambda1, lambda2):
    """``log(sf(lambda1) / sf(lambda2))`` for scalars or arrays."""
    lam1 = np.asarray(lambda1, dtype=float)
    lam2 = np.asarray(lambda2, dtype=float)
    if np.any(lam2 < 0):
        raise AssertionError("negative second knot")
    return np.minimum(norm_logsf(lam1) - norm_logsf(lam2), 0.0)


def spacing_pvalue(U, R) -> SpacingResult:
    """Spacing p-value ``S`` from the correlation vector ``U`` and covariance ``R``.

    ``R`` must have a unit diagonal. ``S`` is uniform on [0, 1] under the
    global null and is the p-value of the test rejecting when ``S <= alpha``.
    """
    kr = knots(U, R)
    logp = float(log_pivot(kr.lambda1, kr.lambda2))
    return SpacingResult(math.exp(logp), logp, kr)


def spacing_pvalues(U, R) -> np.ndarray:
    """``S`` for each row of a (m, p) batch of correlation vectors."""
    lam1, lam2, _, _ = knots_batch(U, R)
    return np.exp(log_pivot(lam1, lam2))


def reject(S, alpha) -> bool:
    """True iff ``S <= alpha`` (closed rejection region)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return bool(S <= alpha)
