# %% [markdown]
# # From raw counters to rate ratios
#
# Resource monitors report cumulative counters. This walkthrough turns a tiny
# trace into the ratio features the classifier sees, then shows why those
# features react to a new process joining the machine.

# %%
import numpy as np

from ransomgate.transform import (
    TransformParams,
    affine_normalize,
    exp_smooth,
    first_difference,
    rate_ratios,
    ratio_of_rates_transform,
    stream_rows,
)

X = np.array([[0.0, 0.0], [4.0, 1.0], [6.0, 3.0]])
print("counters\n", X)

# %% [markdown]
# Differencing gives per-interval increments. A single global min/max maps
# every increment into [0, 1], so relative magnitudes between features survive.

# %%
dX = first_difference(X)
A, lo, hi = affine_normalize(dX)
print("increments\n", dX)
print(f"normalized with min={lo}, max={hi}\n", A)

# %% [markdown]
# Exponential smoothing trades noise for lag. With delta = 0.5 the second row
# keeps half of the first.

# %%
B = exp_smooth(A, 0.5)
print("smoothed\n", B)

# %% [markdown]
# Each feature is then divided by its right-hand neighbour (wrapping around).
# Zeros are floored at 1e-6, so an idle counter shows up as a very large or
# very small ratio rather than a division error.

# %%
C = rate_ratios(B)
print("rate ratios\n", C)
print("row products (always 1):", np.prod(C, axis=1))

# %% [markdown]
# The one-call version does the same, and the streaming form reproduces it row
# by row once the normalization constants are frozen.

# %%
params = TransformParams(delta=0.5)
batch = ratio_of_rates_transform(X, params)
online = stream_rows(X, (batch.norm_min, batch.norm_max), params)
print("batch == stream:", np.array_equal(batch.C, online))

# %% [markdown]
# ## Why ratios?
#
# If every process gets an equal CPU share, adding a process with a different
# resource mix changes the *ratio* between two counters' rates, while a copy
# of an average process leaves it alone.

# %%
from ransomgate.simulator import expected_ratio_jump

print("average newcomer:", expected_ratio_jump(2, 1.0, 2.0, 1.0, 2.0), "(was 0.5)")
print("write-heavy newcomer:", expected_ratio_jump(2, 1.0, 2.0, 4.0, 0.0))
