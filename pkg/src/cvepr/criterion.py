"""Duan-Simon inseparability sum and loss inference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UnphysicalInputError
from .gaussian import GaussianState, _check_mode

# Raw variance of x_a - x_b (or p_a + p_b) for two vacua in hbar = 1/2 units.
TWO_VACUA_VARIANCE = 0.5


@dataclass(frozen=True)
class EprResult:
    """Normalized so that two vacua give ``var_x_minus = var_p_plus = 1/2``."""

    var_x_minus: float
    var_p_plus: float

    @property
    def delta_epr(self) -> float:
        return self.var_x_minus + self.var_p_plus

    @property
    def entangled(self) -> bool:
        return self.delta_epr < 1.0

    @classmethod
    def from_relative(cls, rel_x_minus: float, rel_p_plus: float) -> "EprResult":
        """Build from variances expressed relative to the two-vacua level."""
        return cls(0.5 * rel_x_minus, 0.5 * rel_p_plus)


def delta_epr(state: GaussianState, mode_a: int, mode_b: int) -> EprResult:
    """``Var(x_a - x_b) + Var(p_a + p_b)``; entangled when below 1."""
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise InvalidArgumentError("delta_epr needs two distinct modes")
    V = state.cov
    xa, pa, xb, pb = 2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1
    var_x = V[xa, xa] + V[xb, xb] - 2.0 * V[xa, xb]
    var_p = V[pa, pa] + V[pb, pb] + 2.0 * V[pa, pb]
    # normalization point: two vacua sum to exactly 1
    scale = 0.5 / TWO_VACUA_VARIANCE
    return EprResult(float(var_x * scale), float(var_p * scale))


def infer_direct_squeezing(measured_relative_noise_db: float, eta: float) -> float:
    """Squeezing level (dB) before a loss of transmittance ``eta``.

    Inverts ``V_meas = eta * V + (1 - eta)`` for ``V``.
    """
    if not 0.0 < eta <= 1.0:
        raise InvalidArgumentError(f"eta must lie in (0, 1], got {eta}")
    v_meas = 10.0 ** (measured_relative_noise_db / 10.0)
    floor = 1.0 - eta
    if v_meas <= floor:
        raise UnphysicalInputError(
            f"measured noise {measured_relative_noise_db} dB is at or below the loss "
            f"floor {10 * math.log10(floor) if floor > 0 else float('-inf'):.4g} dB "
            f"for eta = {eta}"
        )
    return 10.0 * math.log10((v_meas - floor) / eta)


def epr_spectrum(scenario, frequencies, *, include_dark: bool = False):
    """Frequency-resolved Delta-EPR for a scenario.

    With ``include_dark=False`` this is the dark-noise-subtracted curve; with
    ``include_dark=True`` the powers are only normalized to the (noisy) vacuum
    level, as in a raw analyzer trace.

    Returns a list of ``(frequency, EprResult)``.
    """
    from .scenario import epr_relative_variances

    f = np.asarray(frequencies, dtype=float).reshape(-1)
    if f.size == 0:
        raise InvalidArgumentError("frequency list is empty")
    if np.any(f <= 0):
        raise InvalidArgumentError("frequencies must be positive")
    if f.size > 1 and np.any(np.diff(f) < 0):
        raise InvalidArgumentError("frequencies must be sorted")
    rel_x, rel_p = epr_relative_variances(scenario)
    det = scenario.combined_detector()
    if not include_dark:
        return [(float(fi), EprResult.from_relative(rel_x, rel_p)) for fi in f]
    gain = det.gain(f)
    dark = det.dark_power
    out = []
    for fi, g in zip(f, gain):
        apparent = [(v * g + dark) / (g + dark) for v in (rel_x, rel_p)]
        out.append((float(fi), EprResult.from_relative(*apparent)))
    return out
