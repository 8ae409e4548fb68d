"""
Phase-matching bandwidth of a PPLN waveguide
============================================

"""

import numpy as np

from cvepr.phasematch import QpmWaveguide, pm_curve, qpm_period, refractive_index

pump = 473e-9
for lam in (473e-9, 946e-9, 1064e-9):
    print(f"n_e({lam * 1e9:.0f} nm) = {refractive_index(lam, 298.15):.5f}")

period = qpm_period(pump, 2 * pump, 298.15)
print("poling period: %.4f um" % (period * 1e6))

# the gain profile is sinc^2(dk L / 2); dk is quadratic around degeneracy
for L in (6e-3, 12e-3, 24e-3):
    wg = QpmWaveguide.degenerate(L, pump)
    c = pm_curve(wg, pump, 300e-9, 6001)
    print(
        "L = %2.0f mm  FWHM %.2f nm  %.2f THz  FWHM*sqrt(L) = %.4f"
        % (L * 1e3, c.fwhm_wavelength * 1e9, c.fwhm_frequency_exact / 1e12,
           c.fwhm_frequency_exact / 1e12 * np.sqrt(L * 1e3))
    )
