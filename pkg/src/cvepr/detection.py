"""Homodyne detector and spectrum-analyzer emulation.

All powers here are linear and referenced to the shot-noise level of a
vacuum input at the reference LO power and zero frequency, which is 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateCalibrationError, InvalidArgumentError

DEFAULT_FLOOR_DB = -60.0
CSV_HEADER = ["frequency_hz", "power_db", "rbw_hz", "vbw_hz", "n_averages", "normalized"]


def to_db(x):
    return 10.0 * np.log10(x)


def to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class DetectorModel:
    quantum_efficiency: float = 0.994
    lo_power: float = 3.5
    clearance_db: float = 10.0
    bandwidth_hz: float = 30e6
    reference_lo_power: float = 3.5

    def __post_init__(self):
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise InvalidArgumentError("quantum_efficiency must be in [0, 1]")
        if not math.isfinite(self.clearance_db):
            raise InvalidArgumentError("clearance_db must be finite")
        if not self.bandwidth_hz > 0:
            raise InvalidArgumentError("bandwidth_hz must be > 0")
        if not (self.lo_power > 0 and self.reference_lo_power > 0):
            raise InvalidArgumentError("LO powers must be > 0")

    @property
    def dark_power(self) -> float:
        return 10.0 ** (-self.clearance_db / 10.0)

    def transfer(self, frequency):
        """Power transfer ``|H(f)|^2`` of the first-order low-pass response."""
        f = np.asarray(frequency, dtype=float)
        return 1.0 / (1.0 + (f / self.bandwidth_hz) ** 2)

    def gain(self, frequency):
        """Shot-noise gain at ``frequency``: rolloff times LO-power scaling."""
        return self.transfer(frequency) * (self.lo_power / self.reference_lo_power)


def measured_relative_power(
    true_variance_normalized, detector: DetectorModel, frequency
) -> tuple[np.ndarray | float, float]:
    """Optical and electronic noise powers seen by a homodyne detector.

    ``true_variance_normalized`` is the quadrature variance relative to vacuum
    before detection. The detector's quantum efficiency acts as a beam-splitter
    loss, the optical part then rolls off with ``|H(f)|^2`` and scales with LO
    power, and the dark noise is flat.

    Returns ``(signal_power, dark_power)``; the total recorded power is their sum.
    """
    V = np.asarray(true_variance_normalized, dtype=float)
    if np.any(V < 0):
        raise InvalidArgumentError("variance must be >= 0")
    f = np.asarray(frequency, dtype=float)
    if np.any(f < 0):
        raise InvalidArgumentError("frequency must be >= 0")
    eta = detector.quantum_efficiency
    signal = (eta * V + (1.0 - eta)) * detector.gain(f)
    if np.ndim(signal) == 0:
        signal = float(signal)
    return signal, detector.dark_power


@dataclass(frozen=True, eq=False)
class SpectrumTrace:
    frequencies: np.ndarray
    power_db: np.ndarray
    rbw: float
    vbw: float
    n_averages: int = 1
    normalized: bool = False
    clamped: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        f = np.array(self.frequencies, dtype=float).reshape(-1)
        p = np.array(self.power_db, dtype=float).reshape(-1)
        if f.shape != p.shape or f.size == 0:
            raise InvalidArgumentError("frequencies and power_db must be equal, nonempty")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise InvalidArgumentError("frequency grid must be strictly increasing")
        if not (self.rbw > 0 and self.vbw > 0):
            raise InvalidArgumentError("rbw and vbw must be > 0")
        if int(self.n_averages) < 1:
            raise InvalidArgumentError("n_averages must be >= 1")
        f.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power_db", p)
        object.__setattr__(self, "rbw", float(self.rbw))
        object.__setattr__(self, "vbw", float(self.vbw))
        object.__setattr__(self, "n_averages", int(self.n_averages))
        object.__setattr__(self, "normalized", bool(self.normalized))

    @property
    def linear(self) -> np.ndarray:
        return to_linear(self.power_db)

    def same_grid(self, other: "SpectrumTrace") -> bool:
        return (
            self.frequencies.shape == other.frequencies.shape
            and np.array_equal(self.frequencies, other.frequencies)
            and self.rbw == other.rbw
            and self.vbw == other.vbw
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for f, p in zip(self.frequencies, self.power_db):
            w.writerow(
                [
                    _fmt(f),
                    _fmt(p),
                    _fmt(self.rbw),
                    _fmt(self.vbw),
                    self.n_averages,
                    int(self.normalized),
                ]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpectrumTrace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != CSV_HEADER:
            raise InvalidArgumentError("not a spectrum trace CSV (bad header)")
        body = rows[1:]
        if not body:
            raise InvalidArgumentError("trace CSV has no rows")
        return cls(
            frequencies=[float(r[0]) for r in body],
            power_db=[float(r[1]) for r in body],
            rbw=float(body[0][2]),
            vbw=float(body[0][3]),
            n_averages=int(body[0][4]),
            normalized=bool(int(body[0][5])),
        )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def subtract_dark_noise(
    meas_trace: SpectrumTrace,
    vacuum_trace: SpectrumTrace,
    dark_trace: SpectrumTrace,
    floor_db: float = DEFAULT_FLOOR_DB,
) -> SpectrumTrace:
    """Normalize to vacuum with the detector's dark noise removed.

    Computes ``(P_meas - P_dark) / (P_vac - P_dark)`` per bin. Bins whose
    numerator is not positive are clamped to ``floor_db`` and flagged in
    ``clamped``.
    """
    for name, tr in (("vacuum", vacuum_trace), ("dark", dark_trace)):
        if not meas_trace.same_grid(tr):
            raise InvalidArgumentError(f"{name} trace grid/RBW/VBW differs from measurement")
    p_meas, p_vac, p_dark = meas_trace.linear, vacuum_trace.linear, dark_trace.linear
    denom = p_vac - p_dark
    bad = np.flatnonzero(denom <= 0)
    if bad.size:
        i = int(bad[0])
        raise DegenerateCalibrationError(
            f"vacuum power does not exceed dark power at bin {i} "
            f"(f = {meas_trace.frequencies[i]:g} Hz)"
        )
    ratio = (p_meas - p_dark) / denom
    floor_lin = 10.0 ** (floor_db / 10.0)
    clamped = ratio <= floor_lin
    db = np.where(clamped, floor_db, to_db(np.where(clamped, 1.0, ratio)))
    return SpectrumTrace(
        meas_trace.frequencies,
        db,
        meas_trace.rbw,
        meas_trace.vbw,
        min(meas_trace.n_averages, vacuum_trace.n_averages, dark_trace.n_averages),
        normalized=True,
        clamped=clamped,
    )


def normalize_to_vacuum(meas_trace: SpectrumTrace, vacuum_trace: SpectrumTrace) -> SpectrumTrace:
    """Normalize to the vacuum trace without dark-noise removal (raw view)."""
    if not meas_trace.same_grid(vacuum_trace):
        raise InvalidArgumentError("vacuum trace grid/RBW/VBW differs from measurement")
    return SpectrumTrace(
        meas_trace.frequencies,
        meas_trace.power_db - vacuum_trace.power_db,
        meas_trace.rbw,
        meas_trace.vbw,
        min(meas_trace.n_averages, vacuum_trace.n_averages),
        normalized=True,
    )


def analyzer_bins(span: tuple[float, float], rbw: float) -> np.ndarray:
    """Bin centres at RBW spacing, each bin fully inside ``span``."""
    lo, hi = map(float, span)
    if not hi > lo:
        raise InvalidArgumentError("span must have positive width")
    if rbw <= 0:
        raise InvalidArgumentError("rbw must be > 0")
    if rbw > hi - lo:
        raise InvalidArgumentError("rbw exceeds the span width")
    n = int(math.floor((hi - lo) / rbw + 1e-9))
    return lo + (np.arange(n) + 0.5) * rbw


def jitter_relative_variance(rbw: float, vbw: float, n_averages: int) -> float:
    """Relative variance of one displayed bin.

    The video filter averages about ``rbw / vbw`` independent envelope samples
    (at least one) and trace averaging divides by ``n_averages`` again.
    """
    return 1.0 / (n_averages * max(1.0, rbw / vbw))


def spectrum_analyzer_trace(
    power_model: Callable[[np.ndarray], np.ndarray],
    span: tuple[float, float],
    rbw: float,
    vbw: float,
    n_averages: int = 1,
    noise_seed=None,
    *,
    lo_drift_db: float = 0.0,
    n_subsamples: int = 64,
) -> SpectrumTrace:
    """Emulate a swept spectrum analyzer reading of a continuous power model.

    Each bin is the mean of ``power_model`` over a rectangular RBW window
    (midpoint rule on ``n_subsamples`` points), multiplied by mean-one
    lognormal jitter. ``lo_drift_db`` scales the whole trace by a uniform
    random offset in ``[-lo_drift_db, lo_drift_db]`` dB; off by default.
    """
    if rbw <= 0 or vbw <= 0:
        raise InvalidArgumentError("rbw and vbw must be > 0")
    if int(n_averages) < 1:
        raise InvalidArgumentError("n_averages must be >= 1")
    centres = analyzer_bins(span, rbw)
    offsets = ((np.arange(n_subsamples) + 0.5) / n_subsamples - 0.5) * rbw
    grid = centres[:, None] + offsets[None, :]
    power = np.asarray(power_model(grid.ravel()), dtype=float).reshape(grid.shape)
    if np.any(power <= 0):
        raise InvalidArgumentError("power model must be positive")
    level = power.mean(axis=1)

    rng = np.random.default_rng(noise_seed)
    s2 = math.log1p(jitter_relative_variance(rbw, vbw, int(n_averages)))
    jitter = np.exp(math.sqrt(s2) * rng.standard_normal(level.size) - 0.5 * s2)
    level = level * jitter
    if lo_drift_db:
        level = level * 10.0 ** (rng.uniform(-lo_drift_db, lo_drift_db) / 10.0)
    return SpectrumTrace(centres, to_db(level), rbw, vbw, int(n_averages))
