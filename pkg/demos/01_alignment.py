"""
Aligning signals sampled at different rates
===========================================

A target of length n0 and a source of length n1 >= n0 describe the same
curve on a common grid. ``expand`` copies each target value over its block
of source positions; ``average`` takes block means back down.
"""

import numpy as np

from pctransfer import average, block_bounds, expand, interleave_pair

f = np.array([1.0, 1.0, 4.0, 2.0, 2.0])

# source positions covered by each target index
bounds = block_bounds(5, 12)
print("block bounds:", bounds.tolist())
print("block widths:", np.diff(bounds).tolist())

# expanding then averaging gives the target back, bit for bit
up = expand(f, 12)
print("expanded:", up.tolist())
print("averaged back:", average(up, 5).tolist())

# a source shorter than the target can still be merged with it
merged = interleave_pair(f, np.arange(3.0))
print("target merged with a 3-point source:", merged.tolist())
