"""Walkthrough: stitching overlapping search-interest blocks onto one scale.

Interest indexes arrive in blocks that are each rescaled to their own
0..100 range. Overlapping days pin the relative scale: each block is
multiplied by the mean ratio of (already-rescaled previous values /
current values) over the overlap, so the factors compose.
"""

from datetime import date, timedelta

import numpy as np

from signalcast import TrendBlock, rescale_trend_blocks

rng = np.random.default_rng(5)
truth = np.abs(np.cumsum(rng.normal(0.8, 2.0, 30))) + 5.0
d0 = date(2021, 1, 1)

block1 = TrendBlock(d0, truth[:12].copy())                              # native scale
block2 = TrendBlock(d0 + timedelta(days=9), truth[9:22] / 2.5)          # re-indexed
block3 = TrendBlock(d0 + timedelta(days=19), truth[19:] / 7.5)          # re-indexed again

merged, factors = rescale_trend_blocks([block1, block2, block3])
print("per-block scale factors:", [round(float(f), 4) for f in factors])
print("max reconstruction error:", float(np.abs(merged.values - truth).max()))

print("\n  date         true   merged")
for i in (0, 9, 10, 19, 20, 29):
    day = d0 + timedelta(days=i)
    print(f"  {day}  {truth[i]:7.2f}  {merged.values[i]:7.2f}")
