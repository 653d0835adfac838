"""TOML run configuration shared by all CLI commands.

Every section is optional except ``[medium]``; missing blocks fall back to the
defaults documented on each dataclass. Validation errors name the offending
field as ``section.key``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .model import CouplingForm, GaussianPulse, MediumParams, group_velocities
from .propagation import ModeGrid, check_coverage

SHIPPED = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "memory", "verify")
X_MARGIN_WIDTHS = 6.0


class _Section:
    """Dict view that records which keys were read, so leftovers can be rejected."""

    def __init__(self, name: str, data: Any) -> None:
        if not isinstance(data, dict):
            raise ValidationError(f"{name}: expected a table")
        self.name = name
        self.data = data
        self.used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.data

    def _raw(self, key, default):
        self.used.add(key)
        if key not in self.data:
            if default is _REQUIRED:
                raise ValidationError(f"{self.name}.{key}: required")
            return default
        return self.data[key]

    def number(self, key, default=None, *, positive=False, nonneg=False):
        v = self._raw(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{self.name}.{key}: expected a number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ValidationError(f"{self.name}.{key}: must be finite")
        if positive and v <= 0:
            raise ValidationError(f"{self.name}.{key}: must be > 0, got {v:g}")
        if nonneg and v < 0:
            raise ValidationError(f"{self.name}.{key}: must be >= 0, got {v:g}")
        return v

    def integer(self, key, default=None, *, minimum=None):
        v = self._raw(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"{self.name}.{key}: expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            raise ValidationError(f"{self.name}.{key}: must be >= {minimum}, got {v}")
        return v

    def string(self, key, default=None, choices=None):
        v = self._raw(key, default)
        if v is None:
            return None
        if not isinstance(v, str):
            raise ValidationError(f"{self.name}.{key}: expected a string, got {v!r}")
        if choices is not None and v not in choices:
            raise ValidationError(f"{self.name}.{key}: must be one of {sorted(choices)}, got {v!r}")
        return v

    def boolean(self, key, default=None):
        v = self._raw(key, default)
        if v is not None and not isinstance(v, bool):
            raise ValidationError(f"{self.name}.{key}: expected true/false, got {v!r}")
        return v

    def numbers(self, key, default=None):
        v = self._raw(key, default)
        if v is None:
            return None
        if not isinstance(v, list) or not v:
            raise ValidationError(f"{self.name}.{key}: expected a non-empty array of numbers")
        out = []
        for item in v:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ValidationError(f"{self.name}.{key}: entries must be finite numbers, got {item!r}")
            out.append(float(item))
        return np.array(out)

    def finish(self) -> None:
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ValidationError(f"{self.name}: unknown key(s) {', '.join(extra)}")


_REQUIRED = object()


def _linspace(sec: _Section) -> np.ndarray:
    """``values = [...]`` or ``start``/``stop``/``count``."""
    if sec.has("values"):
        vals = sec.numbers("values")
        return vals
    start = sec.number("start", _REQUIRED)
    stop = sec.number("stop", _REQUIRED)
    count = sec.integer("count", _REQUIRED, minimum=1)
    if count > 1 and stop <= start:
        raise ValidationError(f"{sec.name}.stop: must exceed start")
    return np.linspace(start, stop, count)


def _medium(sec: _Section) -> MediumParams:
    k0 = sec.number("k0", 1.0, positive=True)
    c = sec.number("c", 1.0, positive=True)
    form = sec.string("coupling_form", CouplingForm.LINEAR_IN_K.value, {f.value for f in CouplingForm})
    raw = sec.has("omega") or sec.has("coupling_g2N") or sec.has("G2")
    dimless = sec.has("n")
    if raw == dimless:
        raise ValidationError(f"{sec.name}: give either omega + coupling_g2N (or G2), or n + velocity_shift/omega_over_k0c")
    if raw:
        omega = sec.number("omega", _REQUIRED, nonneg=True)
        if sec.has("G2") and sec.has("coupling_g2N"):
            raise ValidationError(f"{sec.name}: give coupling_g2N or G2, not both")
        if sec.has("G2"):
            g2n = sec.number("G2", nonneg=True) * k0
        else:
            g2n = sec.number("coupling_g2N", _REQUIRED, nonneg=True)
        return MediumParams(omega=omega, coupling_g2N=g2n, coupling_form=form, k0=k0, c=c)
    return MediumParams.from_dimensionless(
        sec.number("n", nonneg=True),
        omega_over_k0c=sec.number("omega_over_k0c", None, nonneg=True),
        velocity_shift=sec.number("velocity_shift", None, nonneg=True),
        k0=k0,
        c=c,
        coupling_form=CouplingForm(form),
    )


def _pulse(sec: _Section, k0: float) -> GaussianPulse:
    if sec.has("k0"):
        pk0 = sec.number("k0", positive=True)
        if not math.isclose(pk0, k0, rel_tol=1e-12):
            raise ValidationError(f"pulse.k0 = {pk0:g} must equal medium.k0 = {k0:g}")
    amplitude = sec.number("amplitude", 1.0, positive=True)
    if sec.has("f") == sec.has("width_wavelengths"):
        raise ValidationError("pulse: give exactly one of f or width_wavelengths")
    if sec.has("f"):
        return GaussianPulse(k0=k0, f=sec.number("f", positive=True), amplitude=amplitude)
    return GaussianPulse.from_width(k0, sec.number("width_wavelengths", positive=True), amplitude)


def _grid(sec: _Section, pulse: GaussianPulse) -> ModeGrid:
    count = sec.integer("count", 2048, minimum=2)
    if sec.has("k_min") or sec.has("k_max"):
        return ModeGrid(sec.number("k_min", _REQUIRED), sec.number("k_max", _REQUIRED), count)
    return ModeGrid.for_pulse(pulse, count, sec.number("half_width", 8.0, positive=True))


def auto_x_window(medium: MediumParams, pulse: GaussianPulse, times: np.ndarray, samples: int = 512):
    """Window holding every packet at every time plus a few envelope widths."""
    v_plus, _, v_minus = group_velocities(medium)
    lo = min(0.0, v_minus * times.min(), v_minus * times.max(), medium.c * times.min())
    hi = max(0.0, v_plus * times.max(), medium.c * times.max())
    margin = X_MARGIN_WIDTHS * pulse.f
    return (lo - margin, hi + margin, samples)


@dataclass(frozen=True)
class MemoryConfig:
    value: int = 5
    length: int = 8
    shape: str = "cosine"
    rate: float = 5.0
    duration_theta: float = 1000.0
    durations_theta: tuple[float, ...] = (10.0, 100.0, 1000.0)
    omega_start_over_g: float = 100.0
    mode_spacing: float = 0.01
    start_in_dark_state: bool = False
    dt_theta: float | None = None
    record_points: int = 200


@dataclass(frozen=True)
class DistributionConfig:
    kind: str = "gaussian"
    n_peak: float = 1.0
    k: float | None = None


@dataclass(frozen=True)
class IntensityConfig:
    times: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 20.0, 401))
    spectrum_times: np.ndarray = field(default_factory=lambda: np.array([0.0]))
    omega: np.ndarray | None = None
    window: float | None = None


@dataclass(frozen=True)
class FockConfig:
    modes: int = 1
    cutoff: int = 3
    mode_spacing: float = 0.25
    per_mode_g: np.ndarray | None = None
    omega: float | None = None
    tolerance: float = 1e-10
    evolve_time: float = 7.0
    degeneracy_cutoffs: tuple[int, ...] = (1, 2, 3)


@dataclass(frozen=True)
class RunConfig:
    medium: MediumParams
    pulse: GaussianPulse
    grid: ModeGrid
    x_window: tuple[float, float, int]
    times: np.ndarray
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    distribution: DistributionConfig = field(default_factory=DistributionConfig)
    intensity: IntensityConfig = field(default_factory=IntensityConfig)
    fock: FockConfig = field(default_factory=FockConfig)
    name: str = ""

    @property
    def x(self) -> np.ndarray:
        lo, hi, n = self.x_window
        return np.linspace(lo, hi, n)


def _memory(sec: _Section) -> MemoryConfig:
    d = MemoryConfig()
    dur = sec.numbers("durations_theta", None)
    if dur is not None and np.any(dur <= 0):
        raise ValidationError("memory.durations_theta: entries must be > 0")
    cfg = MemoryConfig(
        value=sec.integer("value", d.value, minimum=0),
        length=sec.integer("length", d.length, minimum=1),
        shape=sec.string("shape", d.shape, {"linear", "cosine", "exponential", "step"}),
        rate=sec.number("rate", d.rate, positive=True),
        duration_theta=sec.number("duration_theta", d.duration_theta, positive=True),
        durations_theta=d.durations_theta if dur is None else tuple(float(v) for v in dur),
        omega_start_over_g=sec.number("omega_start_over_g", d.omega_start_over_g, positive=True),
        mode_spacing=sec.number("mode_spacing", d.mode_spacing, nonneg=True),
        start_in_dark_state=sec.boolean("start_in_dark_state", d.start_in_dark_state),
        dt_theta=sec.number("dt_theta", None, positive=True),
        record_points=sec.integer("record_points", d.record_points, minimum=1),
    )
    if cfg.value >= 2**cfg.length:
        raise ValidationError(f"memory.value: {cfg.value} does not fit in {cfg.length} bits")
    return cfg


def _distribution(sec: _Section) -> DistributionConfig:
    kind = sec.string("kind", "gaussian", {"gaussian", "single_mode"})
    cfg = DistributionConfig(
        kind=kind, n_peak=sec.number("n_peak", 1.0, nonneg=True), k=sec.number("k", None, positive=True)
    )
    return cfg


def _intensity(sec: _Section) -> IntensityConfig:
    d = IntensityConfig()
    times = d.times
    if sec.has("times"):
        times = _linspace(_table(sec, "times"))
    spectrum_times = sec.numbers("spectrum_times", d.spectrum_times.tolist())
    omega = _linspace(_table(sec, "omega")) if sec.has("omega") else None
    return IntensityConfig(
        times=times, spectrum_times=spectrum_times, omega=omega, window=sec.number("window", None, positive=True)
    )


def _fock(sec: _Section) -> FockConfig:
    d = FockConfig()
    cuts = sec.numbers("degeneracy_cutoffs", None)
    per = sec.numbers("per_mode_g", None)
    cfg = FockConfig(
        modes=sec.integer("modes", d.modes, minimum=1),
        cutoff=sec.integer("cutoff", d.cutoff, minimum=1),
        mode_spacing=sec.number("mode_spacing", d.mode_spacing, nonneg=True),
        per_mode_g=per,
        omega=sec.number("omega", None, nonneg=True),
        tolerance=sec.number("tolerance", d.tolerance, positive=True),
        evolve_time=sec.number("evolve_time", d.evolve_time, nonneg=True),
        degeneracy_cutoffs=d.degeneracy_cutoffs if cuts is None else tuple(int(v) for v in cuts),
    )
    if per is not None and per.size != cfg.modes:
        raise ValidationError(f"fock.per_mode_g: need {cfg.modes} entries, got {per.size}")
    if per is not None and np.any(per < 0):
        raise ValidationError("fock.per_mode_g: entries must be >= 0")
    return cfg


def _table(parent: _Section, key: str) -> _Section:
    parent.used.add(key)
    return _Section(f"{parent.name}.{key}", parent.data[key])


def from_dict(data: dict, name: str = "") -> RunConfig:
    root = _Section("config", data)
    sections = {}
    for key in ("medium", "pulse", "grid", "x_window", "times", "memory", "distribution", "intensity", "fock"):
        sections[key] = _table(root, key) if root.has(key) else _Section(key, {})
    root.string("description", "")
    root.finish()
    if not root.has("medium"):
        raise ValidationError("medium: required section missing")

    medium = _medium(sections["medium"])
    pulse = _pulse(sections["pulse"] if root.has("pulse") else _Section("pulse", {"width_wavelengths": 4.0}), medium.k0)
    grid = _grid(sections["grid"], pulse)
    times = _linspace(sections["times"]) if root.has("times") else np.linspace(0.0, 100.0, 20)
    if np.any(times < 0):
        raise ValidationError("times: entries must be >= 0")
    xs = sections["x_window"]
    if root.has("x_window") and (xs.has("min") or xs.has("max")):
        lo, hi = xs.number("min", _REQUIRED), xs.number("max", _REQUIRED)
        if hi <= lo:
            raise ValidationError("x_window.max: must exceed x_window.min")
        window = (lo, hi, xs.integer("samples", 512, minimum=3))
    else:
        window = auto_x_window(medium, pulse, times, xs.integer("samples", 512, minimum=3))
    memory = _memory(sections["memory"])
    dist = _distribution(sections["distribution"])
    inten = _intensity(sections["intensity"])
    fock = _fock(sections["fock"])
    for sec in sections.values():
        sec.finish()
    check_coverage(grid, pulse)
    return RunConfig(
        medium=medium,
        pulse=pulse,
        grid=grid,
        x_window=window,
        times=times,
        memory=memory,
        distribution=dist,
        intensity=inten,
        fock=fock,
        name=name,
    )


def resolve(path_or_name: str | Path) -> tuple[str, bytes]:
    """Read a config from a file path or a shipped config name such as ``fig2``."""
    p = Path(path_or_name)
    if p.is_file():
        return p.stem, p.read_bytes()
    name = str(path_or_name).removesuffix(".toml")
    if name in SHIPPED:
        return name, resources.files("eitprop.configs").joinpath(f"{name}.toml").read_bytes()
    raise ValidationError(f"config {str(path_or_name)!r}: no such file or shipped config ({', '.join(SHIPPED)})")


def load(path_or_name: str | Path) -> RunConfig:
    name, raw = resolve(path_or_name)
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"config {name}: invalid TOML: {exc}") from exc
    return from_dict(data, name)
