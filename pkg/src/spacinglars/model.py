"""Regression setup: design normalization, correlation-space objects, CSV input.

The tests only ever see the correlation vector ``U = X^T Y`` and its
covariance ``R = X^T Sigma X``. Columns are rescaled so that ``R`` has a unit
diagonal, which changes neither the null nor the alternative.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np


NEAR_UNIT = 1.0 - 1e-8
DEGENERATE_TOL = 1e-14


class DegenerateColumn(ValueError):
    """A design column has (numerically) zero variance under the noise model."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index + 1} is degenerate (X_i^T Sigma X_i <= {DEGENERATE_TOL:g})")


class CSVFormatError(ValueError):
    """Malformed CSV input; carries the file name and 1-based line number."""

    def __init__(self, path, line: int, msg: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {msg}")


class NormalizationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class KnownCovariance:
    Sigma: np.ndarray


@dataclass(frozen=True)
class UnknownScale:
    """Noise ``sigma^2 * Id_n`` with ``sigma`` unknown."""


@dataclass(frozen=True)
class DesignSpec:
    X: np.ndarray
    noise: KnownCovariance | UnknownScale = field(default_factory=UnknownScale)
    beta_star: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        n, p = X.shape
        if n < 1 or p < 2:
            raise ValueError(f"need n >= 1 and p >= 2, got X of shape {X.shape}")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def sigma(self) -> np.ndarray:
        if isinstance(self.noise, KnownCovariance):
            return np.asarray(self.noise.Sigma, dtype=float)
        return np.eye(self.n)

    def normalized(self) -> "DesignSpec":
        Xn = normalize_design(self.X, self.sigma(), warn=True)
        beta = self.beta_star
        if beta is not None:
            # keep X beta fixed
            beta = np.asarray(beta, dtype=float) * _column_scale(self.X, self.sigma())
        return DesignSpec(Xn, self.noise, beta)

    def correlation_model(self, Y=None) -> "CorrelationModel":
        Xn = normalize_design(self.X, self.sigma(), warn=True)
        R = gram(Xn, self.sigma())
        mu = None
        if self.beta_star is not None:
            beta = np.asarray(self.beta_star, dtype=float) * _column_scale(self.X, self.sigma())
            mu = Xn.T @ (Xn @ beta)
        U = correlate(Xn, Y) if Y is not None else np.zeros(self.p)
        return CorrelationModel(U, R, mu)


@dataclass(frozen=True)
class CorrelationModel:
    """Correlation vector ``U``, its covariance ``R`` and optional mean ``mu_star``."""

    U: np.ndarray
    R: np.ndarray
    mu_star: np.ndarray | None = None

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float).ravel()
        R = np.asarray(self.R, dtype=float)
        if R.shape != (U.size, U.size):
            raise ValueError(f"R has shape {R.shape}, expected {(U.size, U.size)}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "R", R)
        if self.mu_star is not None:
            mu = np.asarray(self.mu_star, dtype=float).ravel()
            if mu.size != U.size:
                raise ValueError("mu_star and U differ in length")
            object.__setattr__(self, "mu_star", mu)


def _column_scale(X, Sigma=None) -> np.ndarray:
    if Sigma is None:
        d = np.einsum("ij,ij->j", X, X)
    else:
        Sigma = np.asarray(Sigma, dtype=float)
        if Sigma.shape != (X.shape[0], X.shape[0]):
            raise ValueError(f"Sigma has shape {Sigma.shape}, expected {(X.shape[0],) * 2}")
        d = np.einsum("ij,ij->j", X, Sigma @ X)
    bad = np.flatnonzero(~(d > DEGENERATE_TOL))
    if bad.size:
        raise DegenerateColumn(int(bad[0]))
    return np.sqrt(d)


def normalize_design(X, Sigma=None, warn=False) -> np.ndarray:
    """Rescale the columns of ``X`` so that ``X_i^T Sigma X_i = 1``.

    Args:
        X: design matrix, shape (n, p).
        Sigma: noise covariance (n, n); identity when omitted.
        warn: emit a ``NormalizationWarning`` if any column actually moved.

    Raises:
        DegenerateColumn: a column with ``X_i^T Sigma X_i <= 1e-14``.
    """
    X = np.asarray(X, dtype=float)
    scale = _column_scale(X, Sigma)
    if np.all(np.abs(scale - 1.0) <= 1e-15):
        return X.copy()
    if warn and np.any(np.abs(scale - 1.0) > 1e-10):
        warnings.warn("design columns rescaled to satisfy X_i^T Sigma X_i = 1",
                      NormalizationWarning, stacklevel=2)
    return X / scale


def correlate(X, Y) -> np.ndarray:
    """``U = X^T Y``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    if X.shape[0] != Y.size:
        raise ValueError(f"X has {X.shape[0]} rows but Y has length {Y.size}")
    return X.T @ Y


def gram(X, Sigma=None) -> np.ndarray:
    """``R = X^T Sigma X``, symmetrized."""
    X = np.asarray(X, dtype=float)
    if Sigma is None:
        A = X.T @ X
    else:
        Sigma = np.asarray(Sigma, dtype=float)
        if Sigma.shape != (X.shape[0], X.shape[0]):
            raise ValueError(f"Sigma has shape {Sigma.shape}, expected {(X.shape[0],) * 2}")
        A = X.T @ Sigma @ X
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class NotNormalized:
    index: int
    value: float


@dataclass(frozen=True)
class NearDuplicate:
    i: int
    j: int
    value: float


@dataclass(frozen=True)
class NotPSD:
    min_eigenvalue: float


@dataclass
class Diagnostics:
    flags: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.flags

    def __iter__(self):
        return iter(self.flags)


def validate_assumptions(model: CorrelationModel | np.ndarray) -> Diagnostics:
    """Report departures from the working assumptions; never raises.

    Indices in the flags are 0-based.
    """
    R = model.R if isinstance(model, CorrelationModel) else np.asarray(model, dtype=float)
    report = Diagnostics()
    diag = np.diag(R)
    for i in np.flatnonzero(np.abs(diag - 1.0) > 1e-8):
        report.flags.append(NotNormalized(int(i), float(diag[i])))
    iu, ju = np.triu_indices(R.shape[0], k=1)
    vals = R[iu, ju]
    for k in np.flatnonzero(np.abs(vals) >= NEAR_UNIT):
        report.flags.append(NearDuplicate(int(iu[k]), int(ju[k]), float(vals[k])))
    lo = float(np.linalg.eigvalsh(0.5 * (R + R.T))[0]) if R.size else 0.0
    if lo < -1e-8:
        report.flags.append(NotPSD(lo))
    return report


def read_matrix(path) -> np.ndarray:
    """Read a dense real matrix from a comma-separated file.

    An optional single header row is skipped when its first field is not
    numeric. Every data row must have the same number of fields.

    Raises:
        CSVFormatError: with the offending 1-based line number.
    """
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            try:
                vals = [float(f) for f in rec]
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise CSVFormatError(path, lineno, f"non-numeric field in {rec!r}") from None
            if not all(np.isfinite(vals)):
                raise CSVFormatError(path, lineno, "non-finite value")
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise CSVFormatError(path, lineno, f"expected {width} fields, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise CSVFormatError(path, 1, "no numeric data")
    return np.array(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    """Read a vector stored as a single-column CSV (a single row is also accepted)."""
    M = read_matrix(path)
    if M.shape[1] == 1:
        return M[:, 0]
    if M.shape[0] == 1:
        return M[0]
    raise CSVFormatError(path, 1, f"expected a single column, got shape {M.shape}")
