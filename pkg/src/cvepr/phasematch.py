"""First-order quasi-phase matching in periodically poled lithium niobate.

The gain profile of a degenerate type-0 parametric process with the pump
fixed is ``sinc^2(dk L / 2)`` with

    dk = k_p - k_s - k_i - 2 pi / period,   k = 2 pi n_e(lambda, T) / lambda.

At degeneracy the signal and idler group velocities coincide, so dk grows
quadratically with detuning and the bandwidth scales as ``1/sqrt(L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq

from .errors import InvalidArgumentError, NoSolutionError, OutOfRangeError, SpanTooNarrowError

# sinc^2(x) = 1/2
HALF_MAX_ARGUMENT = 1.39155737825151

WAVELENGTH_RANGE_M = (0.4e-6, 5.0e-6)
TEMPERATURE_RANGE_K = (273.0, 473.0)


def _jundt_congruent(wavelength_um, temperature_c):
    # D. H. Jundt, Opt. Lett. 22, 1553 (1997): extraordinary index of congruent LiNbO3.
    f = (temperature_c - 24.5) * (temperature_c + 570.82)
    lam2 = wavelength_um**2
    n2 = (
        5.35583
        + 4.629e-7 * f
        + (0.100473 + 3.862e-8 * f) / (lam2 - (0.20692 - 0.89e-8 * f) ** 2)
        + (100.0 + 2.657e-5 * f) / (lam2 - 11.34927**2)
        - 1.5334e-2 * lam2
    )
    return np.sqrt(n2)


SELLMEIER_SETS: dict[str, Callable] = {"jundt-congruent": _jundt_congruent}


def refractive_index(wavelength, temperature: float = 298.15, sellmeier: str = "jundt-congruent"):
    """Extraordinary index ``n_e``; wavelength in metres, temperature in kelvin."""
    lam = np.asarray(wavelength, dtype=float)
    lo, hi = WAVELENGTH_RANGE_M
    if np.any(lam < lo * (1 - 1e-12)) or np.any(lam > hi * (1 + 1e-12)):
        raise OutOfRangeError(f"wavelength outside Sellmeier validity [{lo}, {hi}] m")
    if not TEMPERATURE_RANGE_K[0] <= temperature <= TEMPERATURE_RANGE_K[1]:
        raise OutOfRangeError(f"temperature {temperature} K outside {TEMPERATURE_RANGE_K}")
    try:
        model = SELLMEIER_SETS[sellmeier]
    except KeyError:
        raise InvalidArgumentError(f"unknown Sellmeier set {sellmeier!r}") from None
    n = model(lam * 1e6, temperature - 273.15)
    return float(n) if np.ndim(n) == 0 else n


def wavenumber(wavelength, temperature, sellmeier="jundt-congruent"):
    return 2 * np.pi * refractive_index(wavelength, temperature, sellmeier) / np.asarray(wavelength)


@dataclass(frozen=True)
class QpmWaveguide:
    length: float = 12e-3
    poling_period: float = 4.6e-6
    temperature: float = 298.15
    sellmeier: str = "jundt-congruent"

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidArgumentError("waveguide length must be > 0")
        if not self.poling_period > 0:
            raise InvalidArgumentError("poling period must be > 0")
        if not TEMPERATURE_RANGE_K[0] <= self.temperature <= TEMPERATURE_RANGE_K[1]:
            raise OutOfRangeError(f"temperature must be in {TEMPERATURE_RANGE_K} K")
        if self.sellmeier not in SELLMEIER_SETS:
            raise InvalidArgumentError(f"unknown Sellmeier set {self.sellmeier!r}")

    @classmethod
    def degenerate(
        cls,
        length: float,
        pump_wavelength: float,
        temperature: float = 298.15,
        sellmeier: str = "jundt-congruent",
    ) -> "QpmWaveguide":
        """Waveguide poled for exact degeneracy at ``2 * pump_wavelength``."""
        period = qpm_period(pump_wavelength, 2 * pump_wavelength, temperature, sellmeier)
        return cls(length, period, temperature, sellmeier)


def idler_wavelength(signal_wavelength, pump_wavelength):
    nu_i = 1.0 / np.asarray(pump_wavelength) - 1.0 / np.asarray(signal_wavelength)
    if np.any(nu_i <= 0):
        raise InvalidArgumentError("idler frequency must be positive (signal too energetic)")
    return 1.0 / nu_i


def delta_k(signal_wavelength, pump_wavelength: float, waveguide: QpmWaveguide):
    """Phase mismatch in rad/m for first-order QPM."""
    lam_i = idler_wavelength(signal_wavelength, pump_wavelength)
    T, s = waveguide.temperature, waveguide.sellmeier
    return (
        wavenumber(pump_wavelength, T, s)
        - wavenumber(signal_wavelength, T, s)
        - wavenumber(lam_i, T, s)
        - 2 * np.pi / waveguide.poling_period
    )


def qpm_period(
    pump_wavelength: float,
    degenerate_wavelength: float,
    temperature: float = 298.15,
    sellmeier: str = "jundt-congruent",
    bracket: tuple[float, float] = (0.5e-6, 100e-6),
) -> float:
    """Poling period that zeroes ``delta_k`` at the degenerate point."""
    idler = idler_wavelength(degenerate_wavelength, pump_wavelength)
    material = (
        wavenumber(pump_wavelength, temperature, sellmeier)
        - wavenumber(degenerate_wavelength, temperature, sellmeier)
        - wavenumber(idler, temperature, sellmeier)
    )

    def mismatch(period):
        return material - 2 * np.pi / period

    a, b = bracket
    if mismatch(a) * mismatch(b) > 0:
        raise NoSolutionError(f"no QPM period in bracket {bracket} m")
    return brentq(mismatch, a, b, xtol=1e-18, rtol=4 * np.finfo(float).eps)


def sinc(x):
    """``sin(x)/x`` with the removable singularity handled by its series."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x**2 / 6.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def gain_profile(signal_wavelength, pump_wavelength, waveguide: QpmWaveguide):
    return sinc(delta_k(signal_wavelength, pump_wavelength, waveguide) * waveguide.length / 2) ** 2


def wavelength_to_frequency_width(delta_wavelength: float, center_wavelength: float) -> float:
    """Narrowband conversion ``c * dlambda / lambda^2``."""
    return c * delta_wavelength / center_wavelength**2


@dataclass(frozen=True)
class PmCurve:
    signal_wavelengths: np.ndarray
    efficiency: np.ndarray
    fwhm_wavelength: float
    fwhm_frequency: float
    fwhm_frequency_exact: float

    def to_csv(self) -> str:
        lines = ["signal_wavelength_m,efficiency"]
        lines += [f"{w:.12g},{e:.12g}" for w, e in zip(self.signal_wavelengths, self.efficiency)]
        return "\n".join(lines) + "\n"


def _half_crossing(x, y, i_peak, step):
    """Interpolated abscissa where ``y`` first drops below 1/2 walking from the peak."""
    i = i_peak
    while 0 <= i + step < len(y):
        if y[i + step] < 0.5:
            x0, x1, y0, y1 = x[i], x[i + step], y[i], y[i + step]
            return x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0)
        i += step
    return None


def exact_frequency_fwhm(waveguide: QpmWaveguide, pump_wavelength: float) -> float:
    """FWHM in Hz of the gain versus signal detuning, by root finding."""
    nu0 = 0.5 * c / pump_wavelength

    def excess(detune):
        lam_s = c / (nu0 + detune)
        return gain_profile(lam_s, pump_wavelength, waveguide) - 0.5

    if excess(0.0) <= 0:
        raise NoSolutionError("gain at degeneracy is below half maximum")
    hi = 1e11
    while excess(hi) > 0:
        hi *= 1.5
        if hi > 0.9 * nu0:
            raise SpanTooNarrowError("no half-maximum crossing below the pump frequency")
    lo = hi / 1.5 if hi > 1e11 else 0.0
    return 2 * brentq(excess, lo, hi, xtol=1.0)


def pm_curve(
    waveguide: QpmWaveguide, pump_wavelength: float, span: float, n_points: int = 4001
) -> PmCurve:
    """Gain profile on a signal-wavelength grid centred on degeneracy."""
    if n_points < 101:
        raise InvalidArgumentError("n_points must be >= 101")
    if not span > 0:
        raise InvalidArgumentError("span must be > 0")
    center = 2 * pump_wavelength
    grid = np.linspace(center - span / 2, center + span / 2, n_points)
    eff = gain_profile(grid, pump_wavelength, waveguide)
    i_peak = int(np.argmin(np.abs(grid - center)))
    left = _half_crossing(grid, eff, i_peak, -1)
    right = _half_crossing(grid, eff, i_peak, +1)
    if left is None or right is None:
        raise SpanTooNarrowError(f"span {span:g} m does not bracket the FWHM")
    fwhm_wl = right - left
    return PmCurve(
        signal_wavelengths=grid,
        efficiency=eff,
        fwhm_wavelength=fwhm_wl,
        fwhm_frequency=wavelength_to_frequency_width(fwhm_wl, center),
        fwhm_frequency_exact=exact_frequency_fwhm(waveguide, pump_wavelength),
    )
