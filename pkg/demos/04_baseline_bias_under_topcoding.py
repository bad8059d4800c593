"""How classical tail estimators break when the top of the sample is capped.

Story: the two standard tail-index estimators -- mean log-spacings and
log-rank regression -- are consistent on clean heavy-tailed data.  Feed
them a top-coded sample as if it were clean and both are pulled sharply
downward: the capped values compress exactly the spacings the estimators
live on.  The bias grows with the share of the tail block that is capped.

Run time: under five seconds.
"""

import numpy as np

from tailcens import DgpSpec, dgp_sample, dgp_true_quantile, gi, hill
from tailcens._rng import substream

XI_TRUE = 0.5
N, K = 50_000, 1000
REPS = 30

print(f"true tail index: {XI_TRUE}   (n={N}, k={K}, {REPS} replications)\n")
print("censored share |  mean log-spacing estimate |  log-rank estimate")
print("  of sample    |     (bias)                 |     (bias)")
print("-" * 66)

for cen_share in (0.0, 0.005, 0.01, 0.02):
    cap = None if cen_share == 0.0 else dgp_true_quantile(DgpSpec("gpd"), 1.0 - cen_share)
    h_vals, g_vals = [], []
    for rep in range(REPS):
        sample = dgp_sample(DgpSpec("gpd"), N, substream(40, rep))
        if cap is not None:
            sample = np.minimum(sample, cap)
        order = np.sort(sample)[::-1]
        h_vals.append(hill(order, K).xi_hat)
        g_vals.append(gi(order, K).xi_hat)
    h_mean, g_mean = np.mean(h_vals), np.mean(g_vals)
    print(
        f"    {cen_share:6.1%}    |  {h_mean:.3f}  ({h_mean - XI_TRUE:+.3f})           "
        f"|  {g_mean:.3f}  ({g_mean - XI_TRUE:+.3f})"
    )

print(
    "\nwith just 2% of the sample capped, half the tail block is synthetic"
    "\nand both estimators sit far below the truth -- intervals built on them"
    "\ncover the true index almost never."
)
