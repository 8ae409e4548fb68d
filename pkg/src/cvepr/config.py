"""Declarative scenario configuration (TOML).

A scenario file describes the optical setup in machine-readable form: two
squeezed-vacuum sources, the half beam splitter, per-path efficiencies, two
homodyne detectors, spectrum-analyzer settings, and optionally a waveguide
block for the phase-matching calculation. See ``presets/*.toml``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .detection import DetectorModel
from .errors import ConfigValidationError, CvEprError
from .gaussian import MAX_SQUEEZING, SqueezerSpec, gain_for_variance_ratio, pump_to_squeezing

PRESETS = ("paper-fig2", "paper-fig3", "lossless", "phasematch-12mm")
SEED_MAX = 2**64


@dataclass(frozen=True)
class SourceConfig:
    """One squeezed-vacuum source; exactly one way of giving its strength."""

    r: float | None = None
    squeezing_ratio: float | None = None
    pump_power_mw: float | None = None
    gain_per_sqrt_mw: float | None = None
    angle: float = 0.0
    enabled: bool = True

    def squeezer(self) -> SqueezerSpec:
        if self.r is not None:
            return SqueezerSpec(self.r, self.angle)
        if self.squeezing_ratio is not None:
            return SqueezerSpec.from_variance_ratio(self.squeezing_ratio, self.angle)
        return pump_to_squeezing(self.pump_power_mw, self.gain_per_sqrt_mw, self.angle)


@dataclass(frozen=True)
class AnalyzerConfig:
    span_hz: tuple[float, float] = (0.0, 30e6)
    rbw_hz: tuple[float, ...] = (100e3,)
    vbw_hz: float = 100.0
    n_averages: int = 10
    lo_drift_db: float = 0.0


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 100_000
    frequencies_hz: tuple[float, ...] = (1e6, 10e6, 25e6)
    path_efficiency: tuple[float, float] | None = None


@dataclass(frozen=True)
class WaveguideConfig:
    length_m: float = 12e-3
    temperature_k: float = 298.15
    pump_wavelength_m: float = 473e-9
    poling_period_m: float | None = None  # solved for degeneracy when absent
    sellmeier: str = "jundt-congruent"
    span_m: float = 160e-9
    n_points: int = 4001


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    seed: int = 0
    sources: tuple[SourceConfig, ...] = (SourceConfig(r=0.0), SourceConfig(r=0.0))
    hbs_transmittance: float = 0.5
    relative_phase: float = math.pi / 2
    path_efficiency: tuple[float, ...] = (1.0, 1.0)
    detectors: tuple[DetectorModel, ...] = (DetectorModel(), DetectorModel())
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    output_dir: str = "out"
    subtract_dark: bool = True
    normalize: bool = True
    run_mc: bool = False
    mc: McConfig = field(default_factory=McConfig)
    waveguide: WaveguideConfig | None = None

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=int(seed))

    def combined_detector(self) -> "DetectorPair":
        return DetectorPair(tuple(self.detectors))


@dataclass(frozen=True)
class DetectorPair:
    """Electronic sum/difference of two homodyne detector outputs.

    Quantum efficiencies are handled as optical losses on each beam, so only
    the electronic gain and dark noise are combined here (averaged so that a
    vacuum input reads 1 at low frequency).
    """

    detectors: tuple[DetectorModel, ...]

    def gain(self, frequency):
        return np.mean([d.gain(frequency) for d in self.detectors], axis=0)

    @property
    def dark_power(self) -> float:
        return float(np.mean([d.dark_power for d in self.detectors]))


# --------------------------------------------------------------------------
# dict <-> config

_DETECTOR_KEYS = {
    "quantum_efficiency": "quantum_efficiency",
    "lo_power_mw": "lo_power",
    "clearance_db": "clearance_db",
    "bandwidth_hz": "bandwidth_hz",
    "reference_lo_power_mw": "reference_lo_power",
}


class _Problems(list):
    def need(self, cond: bool, msg: str) -> bool:
        if not cond:
            self.append(msg)
        return cond


def _num(p: _Problems, d: dict, key: str, where: str, default=None, *, integer=False):
    if key not in d:
        if default is None:
            p.append(f"{where}.{key}: missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        p.append(f"{where}.{key}: expected a number, got {v!r}")
        return default
    if integer and not isinstance(v, int):
        p.append(f"{where}.{key}: expected an integer, got {v!r}")
        return default
    if not math.isfinite(v):
        p.append(f"{where}.{key}: must be finite")
        return default
    return v


def _numlist(p: _Problems, d: dict, key: str, where: str, default=None):
    if key not in d:
        if default is None:
            p.append(f"{where}.{key}: missing")
        return default
    v = d[key]
    if not isinstance(v, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x)
        for x in v
    ):
        p.append(f"{where}.{key}: expected a list of finite numbers")
        return default
    return tuple(float(x) for x in v)


def _parse_source(p: _Problems, d: dict, where: str) -> SourceConfig:
    forms = [k for k in ("r", "squeezing_ratio", "pump_power_mw") if k in d]
    if not p.need(
        len(forms) == 1,
        f"{where}: give exactly one of r, squeezing_ratio, pump_power_mw (got {forms or 'none'})",
    ):
        return SourceConfig(r=0.0)
    kw: dict[str, Any] = {}
    if "r" in d:
        r = _num(p, d, "r", where)
        if r is not None:
            p.need(0 <= r <= MAX_SQUEEZING, f"{where}.r: must be in [0, {MAX_SQUEEZING}]")
        kw["r"] = r
    elif "squeezing_ratio" in d:
        s = _num(p, d, "squeezing_ratio", where)
        if s is not None:
            p.need(
                math.exp(-2 * MAX_SQUEEZING) <= s <= 1, f"{where}.squeezing_ratio: must be in (0, 1]"
            )
        kw["squeezing_ratio"] = s
    else:
        pw = _num(p, d, "pump_power_mw", where)
        g = _num(p, d, "gain_per_sqrt_mw", where)
        if pw is not None:
            p.need(pw >= 0, f"{where}.pump_power_mw: must be >= 0")
        if g is not None:
            p.need(g > 0, f"{where}.gain_per_sqrt_mw: must be > 0")
        if pw is not None and g is not None and pw >= 0 and g > 0:
            p.need(
                g * math.sqrt(pw) <= MAX_SQUEEZING,
                f"{where}: pump_power_mw and gain_per_sqrt_mw give r > {MAX_SQUEEZING}",
            )
        kw["pump_power_mw"], kw["gain_per_sqrt_mw"] = pw, g
    kw["angle"] = _num(p, d, "angle", where, 0.0)
    en = d.get("enabled", True)
    p.need(isinstance(en, bool), f"{where}.enabled: expected true/false")
    kw["enabled"] = bool(en)
    return SourceConfig(**kw)


def _parse_detector(p: _Problems, d: dict, where: str) -> DetectorModel:
    defaults = DetectorModel()
    kw = {}
    for key, attr in _DETECTOR_KEYS.items():
        kw[attr] = _num(p, d, key, where, getattr(defaults, attr))
    p.need(0 <= kw["quantum_efficiency"] <= 1, f"{where}.quantum_efficiency: must be in [0, 1]")
    p.need(kw["lo_power"] > 0, f"{where}.lo_power_mw: must be > 0")
    p.need(kw["reference_lo_power"] > 0, f"{where}.reference_lo_power_mw: must be > 0")
    p.need(kw["bandwidth_hz"] > 0, f"{where}.bandwidth_hz: must be > 0")
    p.need(-100 <= kw["clearance_db"] <= 100, f"{where}.clearance_db: must be in [-100, 100]")
    unknown = set(d) - set(_DETECTOR_KEYS)
    p.need(not unknown, f"{where}: unknown keys {sorted(unknown)}")
    try:
        return DetectorModel(**kw)
    except CvEprError:
        return defaults


def from_dict(data: dict) -> ScenarioConfig:
    """Validate a parsed TOML document and build the config.

    Every problem is collected; :class:`ConfigValidationError` lists them all.
    """
    p = _Problems()
    kw: dict[str, Any] = {}

    name = data.get("name", "custom")
    p.need(isinstance(name, str), "name: expected a string")
    kw["name"] = str(name)
    seed = _num(p, data, "seed", "seed", 0, integer=True)
    if seed is not None:
        p.need(0 <= seed < SEED_MAX, "seed: must be an unsigned 64-bit integer")
    kw["seed"] = seed

    srcs = data.get("source")
    if srcs is not None and p.need(
        isinstance(srcs, list) and len(srcs) == 2, "source: exactly two [[source]] entries required"
    ):
        kw["sources"] = tuple(_parse_source(p, s, f"source[{i}]") for i, s in enumerate(srcs))

    hbs = data.get("hbs", {})
    t = _num(p, hbs, "transmittance", "hbs", 0.5)
    p.need(0 <= t <= 1, "hbs.transmittance: must be in [0, 1]")
    kw["hbs_transmittance"] = t
    kw["relative_phase"] = _num(p, hbs, "relative_phase", "hbs", math.pi / 2)

    paths = data.get("paths", {})
    eff = _numlist(p, paths, "efficiency", "paths", (1.0, 1.0))
    if p.need(len(eff) == 2, "paths.efficiency: exactly two values required"):
        p.need(all(0 <= e <= 1 for e in eff), "paths.efficiency: values must be in [0, 1]")
    kw["path_efficiency"] = eff

    dets = data.get("detector")
    if dets is not None and p.need(
        isinstance(dets, list) and len(dets) == 2, "detector: exactly two [[detector]] entries required"
    ):
        kw["detectors"] = tuple(_parse_detector(p, d, f"detector[{i}]") for i, d in enumerate(dets))

    a = data.get("analyzer", {})
    span = _numlist(p, a, "span_hz", "analyzer", (0.0, 30e6))
    rbws = _numlist(p, a, "rbw_hz", "analyzer", (100e3,))
    if p.need(len(span) == 2, "analyzer.span_hz: expected [start, stop]"):
        lo, hi = span
        p.need(lo >= 0 and hi > lo, "analyzer.span_hz: need 0 <= start < stop")
        if p.need(len(rbws) > 0, "analyzer.rbw_hz: at least one RBW required"):
            p.need(
                all(0 < r <= hi - lo for r in rbws),
                "analyzer.rbw_hz: each RBW must be > 0 and no wider than the span",
            )
    vbw = _num(p, a, "vbw_hz", "analyzer", 100.0)
    p.need(vbw > 0, "analyzer.vbw_hz: must be > 0")
    nav = _num(p, a, "n_averages", "analyzer", 10, integer=True)
    p.need(nav >= 1, "analyzer.n_averages: must be >= 1")
    drift = _num(p, a, "lo_drift_db", "analyzer", 0.0)
    p.need(drift >= 0, "analyzer.lo_drift_db: must be >= 0")
    kw["analyzer"] = AnalyzerConfig(span, rbws, vbw, nav, drift)

    out = data.get("output", {})
    od = out.get("directory", "out")
    p.need(isinstance(od, str) and od != "", "output.directory: expected a nonempty string")
    kw["output_dir"] = str(od)

    flags = data.get("flags", {})
    for key in ("subtract_dark", "normalize", "run_mc"):
        v = flags.get(key, ScenarioConfig.__dataclass_fields__[key].default)
        p.need(isinstance(v, bool), f"flags.{key}: expected true/false")
        kw[key] = bool(v)

    mc = data.get("mc", {})
    ns = _num(p, mc, "n_samples", "mc", 100_000, integer=True)
    p.need(ns >= 10, "mc.n_samples: must be >= 10")
    freqs = _numlist(p, mc, "frequencies_hz", "mc", (1e6, 10e6, 25e6))
    if p.need(len(freqs) > 0, "mc.frequencies_hz: frequency list is empty"):
        p.need(all(f > 0 for f in freqs), "mc.frequencies_hz: frequencies must be > 0")
        p.need(list(freqs) == sorted(freqs), "mc.frequencies_hz: must be sorted")
    mc_eff = None
    if "path_efficiency" in mc:
        mc_eff = _numlist(p, mc, "path_efficiency", "mc")
        if mc_eff is not None and p.need(len(mc_eff) == 2, "mc.path_efficiency: exactly two values"):
            p.need(all(0 <= e <= 1 for e in mc_eff), "mc.path_efficiency: values must be in [0, 1]")
    kw["mc"] = McConfig(ns, freqs, mc_eff)

    if "waveguide" in data:
        kw["waveguide"] = _parse_waveguide(p, data["waveguide"])

    known = {"name", "seed", "source", "hbs", "paths", "detector", "analyzer",
             "output", "flags", "mc", "waveguide"}
    unknown = set(data) - known
    p.need(not unknown, f"unknown top-level keys {sorted(unknown)}")

    if p:
        raise ConfigValidationError(p)
    return ScenarioConfig(**kw)


def _parse_waveguide(p: _Problems, w: dict) -> WaveguideConfig:
    from .phasematch import SELLMEIER_SETS

    d = WaveguideConfig()
    length = _num(p, w, "length_m", "waveguide", d.length_m)
    p.need(length > 0, "waveguide.length_m: must be > 0")
    temp = _num(p, w, "temperature_k", "waveguide", d.temperature_k)
    p.need(273 <= temp <= 473, "waveguide.temperature_k: must be in [273, 473] K")
    pump = _num(p, w, "pump_wavelength_m", "waveguide", d.pump_wavelength_m)
    p.need(0.4e-6 <= pump <= 2.5e-6, "waveguide.pump_wavelength_m: must be in [0.4, 2.5] um")
    period = None
    if "poling_period_m" in w:
        period = _num(p, w, "poling_period_m", "waveguide")
        p.need(period is not None and period > 0, "waveguide.poling_period_m: must be > 0")
    sell = w.get("sellmeier", d.sellmeier)
    p.need(sell in SELLMEIER_SETS, f"waveguide.sellmeier: unknown set {sell!r}")
    span = _num(p, w, "span_m", "waveguide", d.span_m)
    p.need(span > 0, "waveguide.span_m: must be > 0")
    npts = _num(p, w, "n_points", "waveguide", d.n_points, integer=True)
    p.need(npts >= 101, "waveguide.n_points: must be >= 101")
    return WaveguideConfig(length, temp, pump, period, sell, span, npts)


def to_dict(cfg: ScenarioConfig) -> dict:
    def src(s: SourceConfig) -> dict:
        d = {k.name: getattr(s, k.name) for k in fields(s)}
        return {k: v for k, v in d.items() if v is not None}

    out: dict[str, Any] = {
        "name": cfg.name,
        "seed": cfg.seed,
        "source": [src(s) for s in cfg.sources],
        "hbs": {"transmittance": cfg.hbs_transmittance, "relative_phase": cfg.relative_phase},
        "paths": {"efficiency": list(cfg.path_efficiency)},
        "detector": [
            {key: getattr(d, attr) for key, attr in _DETECTOR_KEYS.items()} for d in cfg.detectors
        ],
        "analyzer": {
            "span_hz": list(cfg.analyzer.span_hz),
            "rbw_hz": list(cfg.analyzer.rbw_hz),
            "vbw_hz": cfg.analyzer.vbw_hz,
            "n_averages": cfg.analyzer.n_averages,
            "lo_drift_db": cfg.analyzer.lo_drift_db,
        },
        "output": {"directory": cfg.output_dir},
        "flags": {
            "subtract_dark": cfg.subtract_dark,
            "normalize": cfg.normalize,
            "run_mc": cfg.run_mc,
        },
        "mc": {"n_samples": cfg.mc.n_samples, "frequencies_hz": list(cfg.mc.frequencies_hz)},
    }
    if cfg.mc.path_efficiency is not None:
        out["mc"]["path_efficiency"] = list(cfg.mc.path_efficiency)
    if cfg.waveguide is not None:
        w = {k.name: getattr(cfg.waveguide, k.name) for k in fields(cfg.waveguide)}
        out["waveguide"] = {k: v for k, v in w.items() if v is not None}
    return out


def loads(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigValidationError([f"TOML syntax: {exc}"]) from exc
    return from_dict(data)


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def load(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigValidationError([f"config: cannot read {path}: {exc}"]) from exc
    return loads(text)


def load_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigValidationError([f"preset: unknown preset {name!r}; choose from {PRESETS}"])
    text = resources.files("cvepr").joinpath("presets").joinpath(f"{name}.toml").read_text("utf-8")
    return loads(text)


def path_efficiency_from_visibility(mode_matching: float, quantum_efficiency: float = 1.0) -> float:
    """Path efficiency from a mode-matching visibility (enters squared)."""
    return mode_matching**2 * quantum_efficiency


def calibrated_gain(coupled_pump_mw: float = 30.0, ratio: float = 0.68) -> float:
    return gain_for_variance_ratio(coupled_pump_mw, ratio)
