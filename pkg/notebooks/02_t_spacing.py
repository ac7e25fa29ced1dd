"""t-spacing test when the noise scale is unknown.

The studentized pivot does not depend on the noise level: rescaling ``Y``
leaves it unchanged. Run with ``python notebooks/02_t_spacing.py``.
"""

import numpy as np

from spacinglars import t_spacing_pvalue
from spacinglars.simlab import gen_design, ks_uniform

rng = np.random.default_rng(11)
n, p = 25, 80
X = gen_design(n, p, rng)

# %% the estimated scale follows the true one
for sigma in (0.5, 2.0, 8.0):
    res = t_spacing_pvalue(X, sigma * rng.standard_normal(n))
    print(f"sigma = {sigma:4.1f}  sigma_hat = {res.sigma_hat:6.3f}  T = {res.p_value:.3f}")

# %% invariance under rescaling
Y = rng.standard_normal(n)
print("T(Y), T(1024 Y):", t_spacing_pvalue(X, Y).p_value, t_spacing_pvalue(X, 1024 * Y).p_value)

# %% null calibration over a few hundred draws
T = [t_spacing_pvalue(X, 3.0 * rng.standard_normal(n)).p_value for _ in range(500)]
d, rejected = ks_uniform(T)
print(f"KS distance {d:.3f}, rejected at 1%: {rejected}")
