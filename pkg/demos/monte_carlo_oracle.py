"""
Checking the analytic numbers by sampling
=========================================

"""

import numpy as np

from cvepr import config
from cvepr.criterion import delta_epr
from cvepr.detection import DetectorModel, measured_relative_power
from cvepr.montecarlo import estimate_epr_variances, sample_state, timeseries_psd
from cvepr.scenario import detected_state

cfg = config.load_preset("paper-fig3")
state = detected_state(cfg)
batch = sample_state(state, 100_000, seed=946, n_workers=4)
est = estimate_epr_variances(batch, 0, 1)
print("analytic :", round(delta_epr(state, 0, 1).delta_epr, 5))
print("sampled  :", round(est["delta_epr"], 5), "+/-", round(est["delta_epr_se"], 5))

# time-domain cross-check of the detector model
det = DetectorModel()
psd = timeseries_psd(lambda f: sum(measured_relative_power(0.84, det, f)), 2**20 / 100e6, 100e6, seed=1)
f = psd.trace.frequencies
model = sum(measured_relative_power(0.84, det, f))
z = (psd.trace.linear - model) / (model * psd.relative_std)
print("Welch segments:", psd.n_segments, " bins within 3 sigma: %.1f%%" % (100 * np.mean(abs(z) < 3)))
