"""
Squeezed vacuum and optical loss
================================

A single squeezed vacuum, followed through a loss channel.
"""

import math

import numpy as np

from cvepr.criterion import infer_direct_squeezing
from cvepr.gaussian import LossChannel, SqueezerSpec, apply_loss, apply_squeezer, vacuum

# vacuum quadrature variance is 1/4 with hbar = 1/2
state = vacuum(1)
print("vacuum covariance\n", state.cov)

# a squeezer whose squeezed variance is 68% of vacuum
sq = SqueezerSpec.from_variance_ratio(0.68)
state = apply_squeezer(state, 0, sq)
print("r =", round(sq.r, 4), " squeezing dB =", round(10 * math.log10(0.68), 3))
print("variances relative to vacuum:", np.diag(state.cov) / 0.25)

# loss pulls both quadratures toward vacuum
for eta in (1.0, 0.8, 0.5, 0.0):
    v = np.diag(apply_loss(state, 0, LossChannel(eta)).cov) / 0.25
    print(f"eta = {eta:.1f}  Vx/V0 = {v[0]:.4f}  Vp/V0 = {v[1]:.4f}")

# going backwards: what was there before a 50% loss?
print("inferred:", round(infer_direct_squeezing(-0.76, 0.5), 3), "dB")
