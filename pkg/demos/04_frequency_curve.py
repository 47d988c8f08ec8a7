"""
When does adding sources stop helping?
======================================

With sources ordered from densest to sparsest, K times the harmonic mean of
the first K lengths measures the effective sample size of pooling them.
For lengths 2000, 1800, ..., 200 it peaks at K = 8.
"""

import numpy as np

from pctransfer import frequency_curve

lens = [200 * (11 - k) for k in range(1, 11)]
curve = [frequency_curve(lens, k) for k in range(1, 11)]
for k, (m, v) in enumerate(zip(lens, curve), start=1):
    bar = "#" * int(v / 200)
    print(f"K={k:2d}  n_K={m:5d}  {v:8.1f}  {bar}")
print("peak at K =", int(np.argmax(curve)) + 1)
