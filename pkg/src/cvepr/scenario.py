"""Assemble the optical setup from a :class:`ScenarioConfig`.

Layout: two squeezers on modes 0 and 1, the relative phase as a phase shift
on mode 1, the half beam splitter, then per-path losses (mode matching and,
optionally, detector quantum efficiency). Output mode 0 goes to Alice and
mode 1 to Bob.
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .criterion import delta_epr
from .gaussian import (
    VACUUM_VARIANCE,
    BeamSplitterSpec,
    GaussianState,
    LossChannel,
    apply_beamsplitter,
    apply_loss,
    apply_phase_shift,
    apply_squeezer,
    vacuum,
)

ALICE, BOB = 0, 1


def source_state(cfg: ScenarioConfig) -> GaussianState:
    """Two squeezed vacua with the configured relative phase, before the HBS."""
    state = vacuum(2)
    for mode, src in enumerate(cfg.sources):
        if src.enabled:
            state = apply_squeezer(state, mode, src.squeezer())
    return apply_phase_shift(state, 1, cfg.relative_phase)


def detected_state(
    cfg: ScenarioConfig,
    *,
    include_qe: bool = True,
    path_efficiency: tuple[float, float] | None = None,
) -> GaussianState:
    """State reaching the photodiodes.

    ``path_efficiency`` overrides the config's values (used to perturb the
    Monte-Carlo side of a validation run).
    """
    state = apply_beamsplitter(source_state(cfg), 0, 1, BeamSplitterSpec(cfg.hbs_transmittance))
    eff = cfg.path_efficiency if path_efficiency is None else path_efficiency
    for mode, eta in enumerate(eff):
        state = apply_loss(state, mode, LossChannel(eta))
    if include_qe:
        for mode, det in enumerate(cfg.detectors):
            state = apply_loss(state, mode, LossChannel(det.quantum_efficiency))
    return state


def epr_relative_variances(cfg: ScenarioConfig) -> tuple[float, float]:
    """``Var(x_A - x_B)`` and ``Var(p_A + p_B)`` relative to two vacua, QE included."""
    res = delta_epr(detected_state(cfg), ALICE, BOB)
    return res.var_x_minus / 0.5, res.var_p_plus / 0.5


def single_mode_extremes(cfg: ScenarioConfig, mode: int = ALICE) -> tuple[float, float]:
    """Squeezed and anti-squeezed variances at one detector, relative to vacuum.

    Detector quantum efficiency is excluded; the detection model applies it.
    The LO phase is assumed locked to the principal axes of the mode.
    """
    cov = detected_state(cfg, include_qe=False).mode_cov(mode)
    lo, hi = np.linalg.eigvalsh(cov)
    return float(lo / VACUUM_VARIANCE), float(hi / VACUUM_VARIANCE)

