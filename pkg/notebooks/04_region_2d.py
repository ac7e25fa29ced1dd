"""The two-predictor rejection region and its boundary functions.

Writes ``region.csv`` with a membership map that can be plotted as an
image. Run with ``python notebooks/04_region_2d.py [outdir]``.
"""

import sys
from pathlib import Path

import numpy as np

from spacinglars.distfn import norm_isf
from spacinglars.power import Region2D, g_alpha, h_alpha
from spacinglars.simlab import write_csv

alpha, rho = 0.05, -0.4
region = Region2D(alpha, rho)
print("outer threshold isf(alpha/2):", region.threshold)

# %% h shrinks towards zero, g grows faster than the identity
ell = np.array([norm_isf(alpha / 2), 3.0, 5.0, 10.0, 100.0])
print("h:", np.round(h_alpha(ell, alpha), 4))
print("g(u + 1) - g(u) - 1:", np.round(g_alpha(ell[:4] + 1, alpha) - g_alpha(ell[:4], alpha) - 1, 4))

# %% which piece each grid point falls in (-1 outside)
axis = np.linspace(-5, 5, 201)
U = np.array([(a, b) for b in axis for a in axis])
piece = np.where(region.contains(U), region.membership(U).argmax(axis=1), -1)
out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
write_csv(out / "region.csv", ["u1", "u2", "piece"], [(a, b, int(k)) for (a, b), k in zip(U, piece)])
print("fraction of the box inside the region:", np.mean(piece >= 0))
