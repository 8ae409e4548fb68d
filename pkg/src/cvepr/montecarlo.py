"""Monte-Carlo ground truth for the analytic pipeline.

Two facilities, deliberately kept apart:

* sideband-mode sampling (:func:`sample_state`, :func:`estimate_delta_epr`):
  each draw is one measurement of the quadratures of the sideband mode at
  the analysis frequency;
* time-series synthesis (:func:`timeseries_psd`): a Gaussian photocurrent
  with a prescribed one-sided PSD, estimated back with Welch's method.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import signal

from .criterion import TWO_VACUA_VARIANCE
from .detection import SpectrumTrace, to_db
from .errors import InsufficientSamplesError, InvalidArgumentError, NotPhysicalError
from .gaussian import GaussianState

DUMP_MAGIC = b"EPRMC001"
MIN_TIMESERIES_LENGTH = 2**16
CHUNK_SIZE = 2**16


@dataclass(frozen=True)
class SampleBatch:
    samples: np.ndarray  # (n_samples, 2 * n_modes)
    seed: int | None = None

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_modes(self) -> int:
        return self.samples.shape[1] // 2

    def split(self) -> tuple["SampleBatch", "SampleBatch"]:
        half = self.n_samples // 2
        return SampleBatch(self.samples[:half], self.seed), SampleBatch(self.samples[half:], self.seed)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix, tolerating round-off negatives."""
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-10:
        raise NotPhysicalError(f"covariance has eigenvalue {w.min():.3g} < 0")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def sample_state(
    state: GaussianState,
    n_samples: int,
    seed: int | None = None,
    *,
    n_workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> SampleBatch:
    """Draw quadrature samples of ``state``.

    Rows come in fixed-size chunks, each from its own child stream of
    ``SeedSequence(seed)``, so the batch is the same for any ``n_workers``.
    """
    n_samples = int(n_samples)
    if n_samples < 2:
        raise InsufficientSamplesError("n_samples must be >= 2")
    if n_workers < 1 or chunk_size < 1:
        raise InvalidArgumentError("n_workers and chunk_size must be >= 1")
    A = _psd_factor(state.cov)
    dim = 2 * state.n_modes
    n_chunks = -(-n_samples // chunk_size)
    if isinstance(seed, np.random.SeedSequence):
        # fresh copy so spawning does not mutate the caller's sequence
        root = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    else:
        root = np.random.SeedSequence(seed)
    streams = root.spawn(n_chunks)
    out = np.empty((n_samples, dim))

    def fill(k: int) -> None:
        lo = k * chunk_size
        hi = min(lo + chunk_size, n_samples)
        z = np.random.default_rng(streams[k]).standard_normal((hi - lo, dim))
        out[lo:hi] = state.mean + z @ A

    if n_workers == 1:
        for k in range(n_chunks):
            fill(k)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(fill, range(n_chunks)))
    return SampleBatch(out, seed)


def _combos(batch: SampleBatch, mode_a: int, mode_b: int):
    if mode_a == mode_b:
        raise InvalidArgumentError("need two distinct modes")
    for m in (mode_a, mode_b):
        if not 0 <= m < batch.n_modes:
            raise InvalidArgumentError(f"mode {m} not present in batch")
    s = batch.samples
    u = s[:, 2 * mode_a] - s[:, 2 * mode_b]
    v = s[:, 2 * mode_a + 1] + s[:, 2 * mode_b + 1]
    return u, v


def estimate_epr_variances(batch: SampleBatch, mode_a: int, mode_b: int) -> dict[str, float]:
    """Unbiased plug-in estimates with standard errors.

    Keys: ``var_x_minus``, ``var_p_plus``, ``delta_epr`` and matching
    ``*_se`` entries, all normalized like :func:`cvepr.criterion.delta_epr`.
    For Gaussian data ``Var(s^2) = 2 sigma^4 / (n - 1)`` and
    ``Cov(s_u^2, s_v^2) = 2 c_uv^2 / (n - 1)``.
    """
    if batch.n_samples < 10:
        raise InsufficientSamplesError("need at least 10 samples")
    u, v = _combos(batch, mode_a, mode_b)
    C = np.cov(np.vstack([u, v]), ddof=1)
    scale = 0.5 / TWO_VACUA_VARIANCE
    vu, vv, cuv = C[0, 0], C[1, 1], C[0, 1]
    dof = batch.n_samples - 1
    se_u = math.sqrt(2 / dof) * vu
    se_v = math.sqrt(2 / dof) * vv
    se_sum = math.sqrt(2 * (vu**2 + vv**2 + 2 * cuv**2) / dof)
    return {
        "var_x_minus": vu * scale,
        "var_x_minus_se": se_u * scale,
        "var_p_plus": vv * scale,
        "var_p_plus_se": se_v * scale,
        "delta_epr": (vu + vv) * scale,
        "delta_epr_se": se_sum * scale,
    }


def estimate_delta_epr(batch: SampleBatch, mode_a: int, mode_b: int) -> tuple[float, float]:
    est = estimate_epr_variances(batch, mode_a, mode_b)
    return est["delta_epr"], est["delta_epr_se"]


def write_samples(path, batch: SampleBatch) -> None:
    """Raw-sample dump: magic, uint64 column count, then little-endian float64 rows."""
    header = DUMP_MAGIC + struct.pack("<Q", batch.samples.shape[1])
    data = np.ascontiguousarray(batch.samples, dtype="<f8").tobytes()
    Path(path).write_bytes(header + data)


def read_samples(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != DUMP_MAGIC or len(raw) < 16:
        raise InvalidArgumentError("not an EPRMC001 sample dump")
    (ncol,) = struct.unpack("<Q", raw[8:16])
    body = np.frombuffer(raw[16:], dtype="<f8")
    if ncol == 0 or body.size % ncol:
        raise InvalidArgumentError("truncated sample dump")
    return body.reshape(-1, ncol)


# --------------------------------------------------------------------------
# time-series facility


@dataclass(frozen=True)
class PsdEstimate:
    trace: SpectrumTrace
    variance: float  # time-domain variance of the synthesized series
    n_segments: int

    @property
    def relative_std(self) -> float:
        """Per-bin relative std of a Hann, 50%-overlap Welch estimate."""
        return math.sqrt((1 + 2 * 0.1667**2) / self.n_segments)


def synthesize_noise(
    spectral_model: Callable[[np.ndarray], np.ndarray], n: int, sample_rate: float, seed
) -> np.ndarray:
    """Gaussian series whose one-sided PSD is ``spectral_model`` (units^2/Hz)."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    psd = np.asarray(spectral_model(freqs), dtype=float)
    if np.any(psd < 0):
        raise InvalidArgumentError("spectral model must be non-negative")
    # unit white noise has one-sided PSD 2 / fs
    shaped = np.fft.rfft(white) * np.sqrt(psd * sample_rate / 2.0)
    return np.fft.irfft(shaped, n=n)


def timeseries_psd(
    spectral_model: Callable[[np.ndarray], np.ndarray],
    duration: float,
    sample_rate: float,
    seed=None,
    *,
    nperseg: int = 1024,
) -> PsdEstimate:
    n = int(round(duration * sample_rate))
    if n < MIN_TIMESERIES_LENGTH:
        raise InsufficientSamplesError(
            f"duration * sample_rate = {n} < {MIN_TIMESERIES_LENGTH} samples"
        )
    x = synthesize_noise(spectral_model, n, sample_rate, seed)
    f, pxx = signal.welch(x, fs=sample_rate, window="hann", nperseg=nperseg, detrend=False)
    # drop DC and Nyquist, where the one-sided estimate has different statistics
    f, pxx = f[1:-1], pxx[1:-1]
    n_seg = (n - nperseg) // (nperseg // 2) + 1
    rbw = sample_rate / nperseg
    trace = SpectrumTrace(f, to_db(pxx), rbw=rbw, vbw=rbw, n_averages=n_seg)
    return PsdEstimate(trace, float(np.var(x, ddof=1)), n_seg)
