"""Simulation studies: p-value calibration, power comparisons, figure data.

Every replicate draws from its own substream keyed by ``(seed, replicate)``,
so results do not depend on the order or parallelism of evaluation.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .model import correlate, gram
from .power import chisq_power, power_2d, spacing_power
from .qmc import IntegratorConfig, substream, worker_count
from .spacing import spacing_pvalue
from .tspacing import RankWarning, t_spacing_pvalue

# regime name -> how the nonzero entries of beta are drawn
REGIMES = {
    "small_unif": "Uniform[0, 1]",
    "small_gauss": "N(0, 1)",
    "medium": "N(0, 1)",
    "medium_gauss4": "N(0, 4)",
    "large": "N(0, 2)",
    "sqrt2logp": "N(sqrt(2 log p), 1)",
    "dominant": "one entry N(sqrt(2 log p), 1), the others N(0, 1)",
    "mixture": "each entry from small_unif, medium or sqrt2logp with equal probability",
    "fig1_mix": "one of small_gauss, medium_gauss4, sqrt2logp per replicate",
}
ALIASES = {"small": "small_unif", "high": "sqrt2logp"}

KS_CRIT = 1.63


@dataclass(frozen=True)
class Scenario:
    s: int
    n: int
    p: int
    design_law: str = "gaussian_iid"
    mean_regime: str = "sqrt2logp"
    sigma: float = 1.0
    alpha: float = 0.05
    replicates: int = 1000
    seed: int = 0
    lattice_points: int = 1024
    shifts: int = 8

    def __post_init__(self):
        if not 0 <= self.s <= self.p:
            raise ValueError("need 0 <= s <= p")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.design_law != "gaussian_iid":
            raise ValueError(f"unknown design law {self.design_law!r}")
        regime = ALIASES.get(self.mean_regime, self.mean_regime)
        if regime not in REGIMES:
            raise ValueError(f"unknown mean regime {self.mean_regime!r}")
        object.__setattr__(self, "mean_regime", regime)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


@dataclass
class StudyResult:
    scenario: Scenario
    columns: tuple
    records: list
    summary: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.records], dtype=float)

    def write_csv(self, path):
        write_csv(path, self.columns, self.records)


def write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_rows(fh, header, rows)


def _map(fn, items, workers=None):
    workers = workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def gen_design(n, p, rng) -> np.ndarray:
    """Gaussian i.i.d. design with unit-norm columns."""
    X = rng.standard_normal((n, p))
    return X / np.linalg.norm(X, axis=0)


def gen_beta(s, p, regime, rng) -> np.ndarray:
    """Sparse coefficient vector with ``s`` nonzero entries at random positions."""
    regime = ALIASES.get(regime, regime)
    if regime not in REGIMES:
        raise ValueError(f"unknown mean regime {regime!r}")
    if not 0 <= s <= p:
        raise ValueError("need 0 <= s <= p")
    beta = np.zeros(p)
    if s == 0:
        return beta
    support = rng.choice(p, size=s, replace=False)
    high = math.sqrt(2.0 * math.log(p))
    if regime == "fig1_mix":
        regime = ("small_gauss", "medium_gauss4", "sqrt2logp")[rng.integers(3)]
    if regime == "small_unif":
        vals = rng.random(s)
    elif regime in ("small_gauss", "medium"):
        vals = rng.standard_normal(s)
    elif regime == "medium_gauss4":
        vals = 2.0 * rng.standard_normal(s)
    elif regime == "large":
        vals = math.sqrt(2.0) * rng.standard_normal(s)
    elif regime == "sqrt2logp":
        vals = high + rng.standard_normal(s)
    elif regime == "dominant":
        vals = rng.standard_normal(s)
        vals[0] += high
    else:  # mixture
        kind = rng.integers(3, size=s)
        vals = np.where(kind == 0, rng.random(s),
                        np.where(kind == 1, rng.standard_normal(s), high + rng.standard_normal(s)))
    beta[support] = vals
    return beta


def ks_uniform(sample):
    """Two-sided Kolmogorov-Smirnov distance to Uniform[0, 1].

    Returns:
        ``(distance, reject)`` where ``reject`` compares the distance with the
        asymptotic 1% critical value ``1.63 / sqrt(N)``.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empty sample")
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise ValueError("sample values must lie in [0, 1]")
    N = x.size
    k = np.arange(1, N + 1)
    d = max(np.max(k / N - x), np.max(x - (k - 1) / N))
    return float(d), bool(d > KS_CRIT / math.sqrt(N))


def _draw(sc: Scenario, r: int):
    rng = substream(sc.seed, r)
    X = gen_design(sc.n, sc.p, rng)
    beta = gen_beta(sc.s, sc.p, sc.mean_regime, rng)
    Y = X @ beta + sc.sigma * rng.standard_normal(sc.n)
    return X, beta, Y, rng


def pvalue_study(sc: Scenario, which="both", workers=None) -> StudyResult:
    """Spacing and/or t-spacing p-values over fresh (X, beta, noise) draws.

    The spacing test is given the true ``sigma``; the t-spacing test is not.
    """
    if which not in ("S", "T", "both"):
        raise ValueError("which must be 'S', 'T' or 'both'")

    def one(r):
        X, _, Y, _ = _draw(sc, r)
        row = [r]
        if which in ("S", "both"):
            row.append(spacing_pvalue(correlate(X, Y) / sc.sigma, gram(X)).p_value)
        if which in ("T", "both"):
            row.append(t_spacing_pvalue(X, Y).p_value)
        return tuple(row)

    # the rank condition fails by construction when p - 1 < n; callers asked for it
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankWarning)
        records = _map(one, range(sc.replicates), workers)
    cols = ("replicate",) + {"S": ("S",), "T": ("T",), "both": ("S", "T")}[which]
    res = StudyResult(sc, cols, records)
    for name in cols[1:]:
        vals = res.column(name)
        d, rej = ks_uniform(vals)
        res.summary[name] = {"ks": d, "ks_reject_1pct": rej,
                             "ecdf_at_alpha": float(np.mean(vals <= sc.alpha))}
    return res


def compare_tests(sc: Scenario, workers=None) -> StudyResult:
    """Spacing-test power versus Pearson chi-squared power, per random (X, beta)."""

    def one(r):
        X, beta, _, rng = _draw(sc, r)
        Xb = X @ beta
        mu = X.T @ Xb / sc.sigma
        cfg = IntegratorConfig(sc.lattice_points, sc.shifts, int(rng.integers(2**63)))
        ps = spacing_power(mu, gram(X), sc.alpha, cfg, workers=1)
        pc = chisq_power(float(Xb @ Xb) / sc.sigma**2, sc.n, sc.alpha)
        return (r, ps.value, ps.stderr, pc.value)

    records = _map(one, range(sc.replicates), workers)
    res = StudyResult(sc, ("replicate", "power_spacing", "stderr_spacing", "power_chisq"), records)
    sp = res.column("power_spacing")
    ch = res.column("power_chisq")
    res.summary = {
        "chisq_more_powerful": float(np.mean(ch > sp)),
        "spacing_more_powerful": float(np.mean(sp > ch)),
        "mean_power_spacing": float(sp.mean()),
        "mean_power_chisq": float(ch.mean()),
    }
    return res


FIGURES = ("fig1", "fig4", "fig5", "fig6", "fig7", "fig8")
RHOS = (0.0, 0.5, -0.4)


def _git_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, cwd=Path(__file__).resolve().parent, timeout=10)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def _reps(full, scale):
    return max(1, int(round(full * scale)))


def _grid(scale):
    k = max(9, 1 + int(math.ceil(80 * scale)))
    return np.linspace(-4.0, 4.0, k)


def reproduce_figure(fig_id, outdir, scale=0.1, seed=2015, alpha=0.05, workers=None):
    """Write plot-ready CSV files (one per curve or panel) plus ``manifest.json``.

    Replicate budgets are the full-size ones multiplied by ``scale``.

    Returns:
        List of written paths, manifest last.
    """
    if fig_id not in FIGURES:
        raise ValueError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written, panels = [], []

    def study_panel(name, sc, kind):
        res = pvalue_study(sc, kind, workers) if kind in ("S", "T") else compare_tests(sc, workers)
        path = out / f"{fig_id}_{name}.csv"
        res.write_csv(path)
        written.append(path)
        panels.append({"file": path.name, "scenario": asdict(sc), "summary": res.summary})

    if fig_id == "fig1":
        reps = _reps(5000, scale)
        for k, (n, p) in enumerate(((50, 100), (100, 200), (100, 500))):
            for c, (curve, s, kind) in enumerate((("null_S", 0, "S"), ("alt_S", 2, "S"),
                                                  ("alt_T", 2, "T"))):
                sc = Scenario(s, n, p, mean_regime="fig1_mix", alpha=alpha, replicates=reps,
                              seed=seed + 10 * k + c)
                study_panel(f"n{n}_p{p}_{curve}", sc, kind)
    elif fig_id in ("fig4", "fig5"):
        grid = _grid(scale)
        for rho in RHOS:
            R = np.array([[1.0, rho], [rho, 1.0]])
            rows = []
            for b1 in grid:
                for b2 in grid:
                    beta = np.array([b1, b2])
                    row = [b1, b2, power_2d(beta, rho, alpha).value]
                    if fig_id == "fig5":
                        row.append(chisq_power(float(beta @ R @ beta), 2, alpha).value)
                    rows.append(row)
            header = ["beta1", "beta2", "power"] if fig_id == "fig4" else \
                ["beta1", "beta2", "power_spacing", "power_chisq"]
            path = out / f"{fig_id}_rho{rho:+.1f}.csv"
            write_csv(path, header, rows)
            written.append(path)
            panels.append({"file": path.name, "rho": rho, "grid_points": len(grid),
                           "alpha": alpha})
    else:
        reps = _reps(2000, scale)
        if fig_id == "fig6":
            cases = [(s, n, p, reg) for reg in ("large", "small_unif")
                     for (s, n, p) in ((5, 10, 50), (10, 50, 100), (10, 100, 200))]
        elif fig_id == "fig7":
            cases = [(5, 5, 5, "mixture"), (10, 10, 10, "mixture")]
        else:
            cases = [(1, 100, 400, "sqrt2logp"), (3, 100, 400, "dominant"),
                     (3, 100, 400, "sqrt2logp")]
        for k, (s, n, p, reg) in enumerate(cases):
            sc = Scenario(s, n, p, mean_regime=reg, alpha=alpha, replicates=reps, seed=seed + k)
            study_panel(f"s{s}_n{n}_p{p}_{reg}", sc, "compare")

    manifest = {
        "figure": fig_id,
        "seed": seed,
        "scale": scale,
        "alpha": alpha,
        "budgets": {"replicates": None if fig_id in ("fig4", "fig5") else
                    panels[0].get("scenario", {}).get("replicates")},
        "regimes": {k: REGIMES[k] for k in sorted({p["scenario"]["mean_regime"] for p in panels
                                                    if "scenario" in p})},
        "panels": panels,
        "build": _git_describe(),
    }
    mpath = out / "manifest.json"
    with open(mpath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written
