"""Small simulation studies: p-value calibration and a power comparison.

Every replicate has its own random substream, so the numbers below do not
change with ``SPACING_THREADS``. Run with
``python notebooks/05_simulation_study.py``.
"""

from spacinglars.simlab import Scenario, compare_tests, pvalue_study

# %% calibration under the null and under a sparse alternative
for s in (0, 2):
    res = pvalue_study(Scenario(s, 50, 100, mean_regime="fig1_mix", replicates=300, seed=3))
    print(f"s = {s}:", {k: round(v["ks"], 3) for k, v in res.summary.items()})

# %% chi-squared wins with many moderate effects
res = compare_tests(Scenario(5, 10, 50, mean_regime="large", replicates=50, seed=1))
print("(5, 10, 50) large:", res.summary)

# %% spacing wins with one large effect among many predictors
res = compare_tests(Scenario(1, 100, 400, mean_regime="sqrt2logp", replicates=50, seed=2))
print("(1, 100, 400) sqrt2logp:", res.summary)
