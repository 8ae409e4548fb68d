"""Covariance-matrix representation of multimode Gaussian states.

Conventions used throughout the package:

* ``a = x + i p`` with ``[x, p] = i/2`` (hbar = 1/2), so every vacuum
  quadrature has variance exactly 1/4.
* Phase-space vectors are ordered ``(x1, p1, x2, p2, ...)``.
* A squeezer with ``angle = 0`` squeezes ``p`` and anti-squeezes ``x``;
  ``angle = pi/2`` squeezes ``x``.

States are immutable; every operation returns a new :class:`GaussianState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NotPhysicalError

VACUUM_VARIANCE = 0.25
MAX_SQUEEZING = 10.0

_SYMMETRY_RTOL = 1e-12
_PHYSICALITY_TOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard skew form ``Omega`` in xpxp ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_symplectic(S: np.ndarray, atol: float = 1e-10) -> bool:
    n = S.shape[0] // 2
    omega = symplectic_form(n)
    return bool(np.allclose(S @ omega @ S.T, omega, rtol=0.0, atol=atol))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Williamson eigenvalues of ``cov``, sorted ascending."""
    n = cov.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ cov)
    # eigenvalues come in +/- pairs; keep one of each
    return np.sort(np.abs(ev))[::2]


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix over ``n_modes`` optical modes."""

    mean: np.ndarray
    cov: np.ndarray
    n_modes: int = field(init=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise InvalidArgumentError("mean must have even, nonzero length 2n")
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(
                f"cov shape {cov.shape} does not match mean length {mean.size}"
            )
        scale = max(np.max(np.abs(cov)), 1e-300)
        if np.max(np.abs(cov - cov.T)) > _SYMMETRY_RTOL * scale:
            raise NotPhysicalError("covariance matrix is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "n_modes", mean.size // 2)

    def min_symplectic_eigenvalue(self) -> float:
        return float(symplectic_eigenvalues(self.cov)[0])

    def is_physical(self, tol: float = _PHYSICALITY_TOL) -> bool:
        return self.min_symplectic_eigenvalue() >= VACUUM_VARIANCE - tol

    def mean_photon_number(self) -> float:
        """Total mean photon number ``sum <a^dag a>``."""
        return float(np.trace(self.cov) + self.mean @ self.mean - 0.5 * self.n_modes)

    def mode_cov(self, mode: int) -> np.ndarray:
        _check_mode(self, mode)
        return np.array(self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2])


def _check_mode(state: GaussianState, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < state.n_modes:
        raise InvalidArgumentError(
            f"mode {mode!r} out of range for a {state.n_modes}-mode state"
        )


def _symmetrized(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + cov.T)


def _apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    return GaussianState(S @ state.mean, _symmetrized(S @ state.cov @ S.T))


def _embed(n_modes: int, modes: tuple[int, ...], block: np.ndarray) -> np.ndarray:
    S = np.eye(2 * n_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    S[np.ix_(idx, idx)] = block
    return S


def rotation_matrix(theta: float) -> np.ndarray:
    """Phase-space action of ``a -> exp(i theta) a``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SqueezerSpec:
    """Single-mode squeezer; ``r`` is always non-negative, direction via ``angle``."""

    r: float
    angle: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0:
            raise InvalidArgumentError(
                f"squeezing parameter r must be finite and >= 0, got {self.r!r}"
            )
        if r > MAX_SQUEEZING:
            raise InvalidArgumentError(f"r = {r} exceeds the guard of {MAX_SQUEEZING}")
        angle = float(self.angle)
        if not math.isfinite(angle):
            raise InvalidArgumentError("squeezer angle must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "angle", angle % (2 * math.pi))

    def matrix(self) -> np.ndarray:
        R = rotation_matrix(self.angle)
        return R @ np.diag([math.exp(self.r), math.exp(-self.r)]) @ R.T

    @property
    def squeezed_variance_ratio(self) -> float:
        """Squeezed-quadrature variance relative to vacuum, ``exp(-2r)``."""
        return math.exp(-2 * self.r)

    @classmethod
    def from_variance_ratio(cls, ratio: float, angle: float = 0.0) -> "SqueezerSpec":
        if not 0 < ratio <= 1:
            raise InvalidArgumentError("variance ratio must lie in (0, 1]")
        return cls(-0.5 * math.log(ratio), angle)

    @classmethod
    def from_db(cls, squeezing_db: float, angle: float = 0.0) -> "SqueezerSpec":
        """Build from a squeezing level in dB (negative means below vacuum)."""
        return cls.from_variance_ratio(10 ** (-abs(squeezing_db) / 10), angle)


@dataclass(frozen=True)
class BeamSplitterSpec:
    transmittance: float = 0.5
    relative_phase: float = 0.0

    def __post_init__(self):
        T = float(self.transmittance)
        if not 0.0 <= T <= 1.0:
            raise InvalidArgumentError(f"transmittance must be in [0, 1], got {T}")
        object.__setattr__(self, "transmittance", T)
        object.__setattr__(self, "relative_phase", float(self.relative_phase))

    def unitary(self) -> np.ndarray:
        t = math.sqrt(self.transmittance)
        r = math.sqrt(1.0 - self.transmittance)
        phase = np.exp(1j * self.relative_phase)
        return np.array([[t, -r * np.conj(phase)], [r * phase, t]])

    def matrix(self) -> np.ndarray:
        """4x4 symplectic (orthogonal) matrix in (x_a, p_a, x_b, p_b) order."""
        return passive_symplectic(self.unitary())


def passive_symplectic(U: np.ndarray) -> np.ndarray:
    """Real orthosymplectic matrix of a passive linear-optics unitary ``U``."""
    n = U.shape[0]
    S = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for k in range(n):
            u = U[j, k]
            S[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[u.real, -u.imag], [u.imag, u.real]]
    return S


@dataclass(frozen=True)
class LossChannel:
    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not 0.0 <= eta <= 1.0:
            raise InvalidArgumentError(f"loss channel eta must be in [0, 1], got {eta}")
        object.__setattr__(self, "eta", eta)


def vacuum(n_modes: int) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes!r}")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def apply_squeezer(state: GaussianState, mode: int, spec: SqueezerSpec) -> GaussianState:
    _check_mode(state, mode)
    if spec.r == 0.0:
        return state
    return _apply_symplectic(state, _embed(state.n_modes, (mode,), spec.matrix()))


def apply_beamsplitter(
    state: GaussianState, mode_a: int, mode_b: int, spec: BeamSplitterSpec
) -> GaussianState:
    """Mix two modes.

    At ``transmittance = 1/2`` and zero phase the outputs are
    ``a_a' = (a_a - a_b)/sqrt(2)`` and ``a_b' = (a_a + a_b)/sqrt(2)``.
    """
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise InvalidArgumentError("beam splitter needs two distinct modes")
    return _apply_symplectic(state, _embed(state.n_modes, (mode_a, mode_b), spec.matrix()))


def apply_phase_shift(state: GaussianState, mode: int, theta: float) -> GaussianState:
    _check_mode(state, mode)
    return _apply_symplectic(state, _embed(state.n_modes, (mode,), rotation_matrix(theta)))


def apply_loss(state: GaussianState, mode: int, channel: LossChannel) -> GaussianState:
    """Pure-loss channel: mix ``mode`` with vacuum at power transmittance ``eta``."""
    _check_mode(state, mode)
    eta = channel.eta
    if eta == 1.0:
        return state
    scale = np.ones(2 * state.n_modes)
    scale[2 * mode : 2 * mode + 2] = math.sqrt(eta)
    cov = state.cov * np.outer(scale, scale)
    i = 2 * mode
    cov[i : i + 2, i : i + 2] += (1.0 - eta) * VACUUM_VARIANCE * np.eye(2)
    return GaussianState(state.mean * scale, cov)


def quadrature_variance(state: GaussianState, coeffs) -> float:
    """Variance of the linear combination ``coeffs . (x1, p1, x2, p2, ...)``."""
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    if c.size != 2 * state.n_modes:
        raise InvalidArgumentError(
            f"coeffs has length {c.size}, expected {2 * state.n_modes}"
        )
    if not np.any(c):
        raise InvalidArgumentError("coeffs must not be all zero")
    return float(c @ state.cov @ c)


def quadrature_coeffs(n_modes: int, terms: dict[str, float]) -> np.ndarray:
    """Coefficient vector from a mapping like ``{"x0": 1, "x1": -1}``."""
    c = np.zeros(2 * n_modes)
    for key, weight in terms.items():
        quad, mode = key[0], int(key[1:])
        if quad not in "xp" or not 0 <= mode < n_modes:
            raise InvalidArgumentError(f"bad quadrature label {key!r}")
        c[2 * mode + (quad == "p")] += weight
    return c


def pump_to_squeezing(
    coupled_pump_power: float, gain_coefficient: float, angle: float = 0.0
) -> SqueezerSpec:
    """Map coupled pump power (mW) to a squeezer via ``r = g * sqrt(P)``."""
    if coupled_pump_power < 0:
        raise InvalidArgumentError("pump power must be >= 0")
    if gain_coefficient <= 0:
        raise InvalidArgumentError("gain coefficient must be > 0")
    return SqueezerSpec(gain_coefficient * math.sqrt(coupled_pump_power), angle)


def gain_for_variance_ratio(coupled_pump_power: float, ratio: float) -> float:
    """Gain coefficient that makes ``coupled_pump_power`` give squeezing ``ratio``."""
    if coupled_pump_power <= 0:
        raise InvalidArgumentError("calibration power must be > 0")
    return SqueezerSpec.from_variance_ratio(ratio).r / math.sqrt(coupled_pump_power)
