"""Power of the spacing test three ways.

Randomized lattice integration, brute-force simulation and, for two
predictors, adaptive quadrature over the rejection region. Run with
``python notebooks/03_power.py``.
"""

import numpy as np

from spacinglars import (IntegratorConfig, chisq_power, power_2d, spacing_power,
                         spacing_power_direct)

rho = 0.5
R = np.array([[1.0, rho], [rho, 1.0]])
beta = np.array([1.5, 0.5])
mu = R @ beta

# %% the three estimators on the same alternative
q = spacing_power(mu, R, 0.05, IntegratorConfig(4096, 25, seed=1))
d = spacing_power_direct(mu, R, 0.05, nrep=100_000, seed=2)
k = power_2d(beta, rho, 0.05)
for est in (q, d, k):
    print(f"{est.method:10s} {est.value:.5f} +- {est.stderr:.1e}  budget {est.budget}")

# %% Pearson chi-squared comparator, ||Y||^2 with noncentrality beta' R beta
print("chi2:", chisq_power(float(beta @ R @ beta), 2, 0.05).value)

# %% never below the level
grid = np.linspace(-2, 2, 5)
low = min(power_2d(np.array([a, b]), rho, 0.05).value for a in grid for b in grid)
print(f"smallest power on the grid: {low:.6f}")

# %% the power-to-level ratio keeps growing as alpha shrinks
for alpha in (0.1, 0.01, 0.001):
    est = spacing_power(np.array([2.0, 0.0]), np.eye(2), alpha)
    print(f"alpha = {alpha:<6} power / alpha = {est.value / alpha:.3f}")
