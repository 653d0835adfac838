"""Synthesis of the mean probe field and its three-packet decomposition.

The mean positive-frequency field is a mode sum of ``sqrt(k) alpha_k <a_k(t)>/a_k(0)
exp(ik(x - ct))``. Splitting ``cos(Theta t)`` into exponentials gives

* ``E_0``  with weight ``2 cos^2 theta_k`` and carrier ``exp(ik(x - ct))``,
* ``E_pm`` with weight ``sin^2 theta_k`` and carrier ``exp(ik(x - ct) -+ i Theta_k t)``.

All components share one scale, fixed so that ``max |E_0 + E_+ + E_-| = 1`` at
``t = 0``; only shapes and ratios carry meaning.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericalError, ValidationError
from .model import (
    CouplingForm,
    GaussianPulse,
    MediumParams,
    analytic_coefficients,
    mixing_arrays,
)

log = logging.getLogger(__name__)

COMPONENTS = ("e0", "e_plus", "e_minus")

# grid must reach this many 1/f spectral widths on each side of k0
COVERAGE_WIDTHS = 3.0
# largest tolerated alpha(0) / alpha(k0) before a pulse counts as too broad
MAX_ALPHA_AT_ZERO = 0.05


@dataclass(frozen=True)
class ModeGrid:
    k_min: float
    k_max: float
    count: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k_min) and math.isfinite(self.k_max)):
            raise ValidationError("grid bounds must be finite")
        if self.k_min <= 0:
            raise ValidationError(f"grid k_min must be > 0, got {self.k_min}")
        if self.k_max <= self.k_min:
            raise ValidationError("grid k_max must exceed k_min")
        if int(self.count) != self.count or self.count < 2:
            raise ValidationError(f"grid count must be an integer >= 2, got {self.count}")

    @classmethod
    def for_pulse(cls, pulse: GaussianPulse, count: int = 2048, half_width: float = 8.0) -> ModeGrid:
        """Grid spanning ``k0 +- half_width / f``, clipped just above zero."""
        lo = max(pulse.k0 - half_width / pulse.f, 1e-3 * pulse.k0)
        return cls(lo, pulse.k0 + half_width / pulse.f, count)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.count)

    @property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights."""
        w = np.full(self.count, (self.k_max - self.k_min) / (self.count - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def refined(self) -> ModeGrid:
        return ModeGrid(self.k_min, self.k_max, 2 * self.count - 1)


def check_coverage(grid: ModeGrid, pulse: GaussianPulse) -> None:
    """Reject grids that truncate the pulse spectrum and pulses reaching k <= 0."""
    alpha0 = math.exp(-((pulse.f * pulse.k0) ** 2))
    if alpha0 > MAX_ALPHA_AT_ZERO:
        raise ValidationError(
            f"pulse too broad: alpha(k=0)/alpha(k0) = {alpha0:.3g} exceeds {MAX_ALPHA_AT_ZERO}"
        )
    need_hi = pulse.k0 + COVERAGE_WIDTHS / pulse.f
    need_lo = pulse.k0 - COVERAGE_WIDTHS / pulse.f
    if grid.k_max < need_hi:
        raise ValidationError(f"grid k_max = {grid.k_max:.6g} must reach {need_hi:.6g}")
    if need_lo > 0 and grid.k_min > need_lo:
        raise ValidationError(f"grid k_min = {grid.k_min:.6g} must reach down to {need_lo:.6g}")
    if need_lo <= 0 and grid.k_min > 0.05 * pulse.k0:
        raise ValidationError(f"broad pulse: grid k_min = {grid.k_min:.6g} must be <= {0.05 * pulse.k0:.6g}")


@lru_cache(maxsize=64)
def field_scale(pulse: GaussianPulse) -> float:
    """``1 / (2 int_0^inf sqrt(k) alpha_k dk)``, the t = 0 peak of the total field."""
    lo = max(0.0, pulse.k0 - 12.0 / pulse.f)
    hi = pulse.k0 + 12.0 / pulse.f
    val, _ = integrate.quad(lambda k: math.sqrt(k) * float(pulse.alpha(k)), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
    return 1.0 / (2.0 * val)


@dataclass
class FieldSnapshot:
    x: np.ndarray
    e0: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    t: float

    def __post_init__(self) -> None:
        n = len(self.x)
        if not (len(self.e0) == len(self.e_plus) == len(self.e_minus) == n):
            raise ValidationError("snapshot arrays must have equal length")

    @property
    def total(self) -> np.ndarray:
        return self.e0 + self.e_plus + self.e_minus

    def component(self, name: str) -> np.ndarray:
        return getattr(self, name)


class QuadratureSynthesizer:
    """Trapezoid-rule synthesis on a fixed (x, k) grid, reused across times."""

    def __init__(self, params: MediumParams, pulse: GaussianPulse, grid: ModeGrid, x) -> None:
        if not math.isclose(pulse.k0, params.k0, rel_tol=1e-12):
            raise ValidationError("pulse.k0 must equal medium k0")
        check_coverage(grid, pulse)
        self.params = params
        self.x = np.asarray(x, dtype=float)
        k = grid.k
        cos2, sin2, big = mixing_arrays(params, k)
        base = field_scale(pulse) * grid.weights * np.sqrt(k) * pulse.alpha(k)
        self.k = k
        self.cos2 = cos2
        self.sin2 = sin2
        self.big_theta = big
        self.base = base
        self._w0 = 2.0 * cos2 * base
        self._wpm = sin2 * base
        self._phase = np.exp(1j * np.outer(self.x, k))

    def snapshot(self, t: float) -> FieldSnapshot:
        carrier = np.exp(-1j * self.k * self.params.c * t)
        dressed = np.exp(-1j * self.big_theta * t)
        e0 = self._phase @ (self._w0 * carrier)
        ep = self._phase @ (self._wpm * carrier * dressed)
        em = self._phase @ (self._wpm * carrier * dressed.conj())
        return FieldSnapshot(self.x, e0, ep, em, float(t))

    def undecomposed(self, t: float) -> np.ndarray:
        """Total field from the single integrand ``2 (cos^2 + sin^2 cos Theta t)``."""
        weight = 2.0 * (self.cos2 + self.sin2 * np.cos(self.big_theta * t)) * self.base
        return self._phase @ (weight * np.exp(-1j * self.k * self.params.c * t))

    def series(self, times, threads: int = 1) -> list[FieldSnapshot]:
        times = [float(t) for t in times]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(self.snapshot, times))
        return [self.snapshot(t) for t in times]


def synthesize_quadrature(params: MediumParams, pulse: GaussianPulse, grid: ModeGrid, x, t: float) -> FieldSnapshot:
    return QuadratureSynthesizer(params, pulse, grid, x).snapshot(t)


def synthesize_analytic(params: MediumParams, pulse: GaussianPulse, x, t: float) -> FieldSnapshot:
    """Closed-form packets from a first-order Taylor expansion about ``k0``.

    E_0 carries the same factor 2 as its quadrature weight, so both paths share
    one normalization.
    """
    if not math.isclose(pulse.k0, params.k0, rel_tol=1e-12):
        raise ValidationError("pulse.k0 must equal medium k0")
    co = analytic_coefficients(params)
    x = np.asarray(x, dtype=float)
    f, k0, c = pulse.f, params.k0, params.c
    ak = co.a_coef * k0
    pre = field_scale(pulse) * pulse.amplitude * math.sqrt(math.pi * k0) / (2.0 * f**3 * (1.0 + ak))

    def packet(slope, xi, carrier_speed):
        return (2.0 * f**2 + 1j * slope * xi) * np.exp(-(xi**2) / (4.0 * f**2)) * np.exp(1j * k0 * (x - carrier_speed * t))

    e0 = 2.0 * pre * packet(co.f0, x - c * t, c)
    ep = ak * pre * packet(co.d0, x - (c + co.e0) * t, co.c_plus)
    em = ak * pre * packet(co.d0, x - (c - co.e0) * t, co.c_minus)
    return FieldSnapshot(x, e0, ep, em, float(t))


def relative_l2(reference, other) -> float:
    """``||other - reference|| / ||reference||`` over stacked arrays."""
    ref = np.concatenate([np.ravel(r) for r in reference])
    oth = np.concatenate([np.ravel(o) for o in other])
    denom = np.linalg.norm(ref)
    if denom == 0:
        return 0.0 if np.linalg.norm(oth) == 0 else math.inf
    return float(np.linalg.norm(oth - ref) / denom)


def path_discrepancy(quad: list[FieldSnapshot], analytic: list[FieldSnapshot]) -> dict[str, float]:
    """Per-component relative L2 discrepancy across a whole time series."""
    return {
        name: relative_l2([s.component(name) for s in quad], [s.component(name) for s in analytic])
        for name in COMPONENTS
    }


def coherent_intensity(params: MediumParams, pulse: GaussianPulse, grid: ModeGrid, x, t: float) -> np.ndarray:
    """``<E^- E^+>`` for a multimode coherent input, interference terms included."""
    return intensity_terms(synthesize_quadrature(params, pulse, grid, x, t))[0]


def intensity_terms(snap: FieldSnapshot) -> tuple[np.ndarray, np.ndarray]:
    """``(intensity, interference)`` where interference is the pairwise cross part."""
    e0, ep, em = snap.e0, snap.e_plus, snap.e_minus
    direct = np.abs(e0) ** 2 + np.abs(ep) ** 2 + np.abs(em) ** 2
    cross = 2.0 * np.real(e0 * ep.conj() + ep * em.conj() + em * e0.conj())
    return direct + cross, cross


def _refined_peak(x: np.ndarray, env: np.ndarray) -> float:
    i = int(np.argmax(env))
    top = env[i]
    ties = np.flatnonzero(env >= top * (1.0 - 1e-12))
    if ties.size > 1 and np.any(np.diff(ties) > 1):
        raise NumericalError("ambiguous envelope maximum (separated equal peaks)")
    if ties.size > 1:
        i = int(ties[ties.size // 2])
    if i == 0 or i == len(x) - 1:
        raise NumericalError("envelope maximum on the window edge; widen the x window")
    y = np.log(env[i - 1 : i + 2])
    denom = y[0] - 2.0 * y[1] + y[2]
    if denom >= 0:
        return float(x[i])
    shift = 0.5 * (y[0] - y[2]) / denom
    return float(x[i] + shift * (x[i + 1] - x[i]))


@dataclass
class PacketTrack:
    times: np.ndarray
    peak_positions: dict[str, np.ndarray]
    fitted_velocity: dict[str, float | None]
    residual: dict[str, float | None] = field(default_factory=dict)


def track_velocities(snapshots: list[FieldSnapshot]) -> PacketTrack:
    """Least-squares velocity of each component's envelope maximum.

    Components that vanish identically have no packet and get ``None``.
    """
    if len(snapshots) < 3:
        raise ValidationError("velocity tracking needs at least 3 snapshots")
    times = np.array([s.t for s in snapshots])
    peaks: dict[str, np.ndarray] = {}
    vel: dict[str, float | None] = {}
    res: dict[str, float | None] = {}
    for name in COMPONENTS:
        envs = [np.abs(s.component(name)) for s in snapshots]
        if max(float(e.max()) for e in envs) == 0.0:
            peaks[name] = np.full(len(times), np.nan)
            vel[name] = None
            res[name] = None
            continue
        pos = np.array([_refined_peak(s.x, e) for s, e in zip(snapshots, envs)])
        slope, intercept = np.polyfit(times, pos, 1)
        peaks[name] = pos
        vel[name] = float(slope)
        res[name] = float(np.sqrt(np.mean((pos - (slope * times + intercept)) ** 2)))
    return PacketTrack(times=times, peak_positions=peaks, fitted_velocity=vel, residual=res)


def warn_if_dispersionless(params: MediumParams) -> None:
    if params.coupling_form is CouplingForm.CONSTANT_AT_K0 and params.coupling_g2N > 0:
        warnings.warn(
            "constant coupling gives k-independent Theta_k: packets will not split in the quadrature path",
            stacklevel=2,
        )
