"""The four-observer circuit and its CHSH value.

Two friends each measure one half of a Bell pair; two outside observers
either ask their friend (reading the memory) or supermeasure the whole wing
along a rotated basis.  At the standard angles the four pair correlators are
+-cos(45 degrees) and S reaches 2*sqrt(2)."""

import math

import numpy as np

from friendlab import acceptance, scenarios, statlab
from friendlab.scenarios import LFConfig

cfg = LFConfig()
analytic = scenarios.pair_correlations(cfg)
for pair in scenarios.PAIR_IDS:
    print(f"E({pair}) = {analytic[pair]:+.9f}")
s = analytic["AC"] + analytic["BC"] + analytic["BD"] - analytic["AD"]
print(f"S = {s:.9f}  (2*sqrt(2) = {2 * math.sqrt(2):.9f})")

rng = np.random.default_rng(0)
tables = acceptance.sample_pair_tables(cfg, 10 ** 5, rng)
s_mc, stderr = statlab.chsh_estimate(tables)
print(f"Monte Carlo at 1e5 trials per pair: S = {s_mc:.4f} +/- {stderr:.4f}")
