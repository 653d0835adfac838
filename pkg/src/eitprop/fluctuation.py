"""Observables for a number-state probe: correlation, spectrum and mean intensity.

With Fock input the mean field vanishes, so the probe is described by
``<E^-(t) E^+(t + tau)> = sum_k w_k exp(i k c tau) P_k(t)^2`` with
``w_k = c |k| <n>_k`` (dimensional constants absorbed) and
``P_k(t) = cos^2 theta_k + sin^2 theta_k cos(Theta_k t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ValidationError
from .model import GaussianPulse, MediumParams, mixing_arrays
from .propagation import ModeGrid

# Hann window: most negative sidelobe of its transform relative to the peak
HANN_SIDELOBE = 0.02671


@dataclass(frozen=True)
class NumberDistribution:
    """Mean occupation ``<n>_k`` on a set of wave numbers."""

    k: np.ndarray
    mean_n: np.ndarray

    def __post_init__(self) -> None:
        k = np.asarray(self.k, dtype=float)
        n = np.asarray(self.mean_n, dtype=float)
        if k.shape != n.shape or k.ndim != 1 or k.size == 0:
            raise ValidationError("k and mean_n must be 1-d arrays of equal length")
        if np.any(k <= 0) or not np.all(np.isfinite(k)):
            raise ValidationError("wave numbers must be finite and > 0")
        if np.any(n < 0) or not np.all(np.isfinite(n)):
            raise ValidationError("mean occupations must be finite and >= 0")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "mean_n", n)

    @classmethod
    def gaussian(cls, grid: ModeGrid, pulse: GaussianPulse, n_peak: float = 1.0) -> NumberDistribution:
        """``<n>_k = n_peak exp(-2 f^2 (k - k0)^2)``, the occupation of the coherent profile."""
        k = grid.k
        return cls(k, n_peak * np.exp(-2.0 * pulse.f**2 * (k - pulse.k0) ** 2))

    @classmethod
    def single_mode(cls, k: float, n: float = 1.0) -> NumberDistribution:
        return cls(np.array([float(k)]), np.array([float(n)]))


def mode_weights(params: MediumParams, dist: NumberDistribution) -> np.ndarray:
    return params.c * np.abs(dist.k) * dist.mean_n


def _factors(params: MediumParams, dist: NumberDistribution, t) -> np.ndarray:
    cos2, sin2, big = mixing_arrays(params, dist.k)
    t = np.asarray(t, dtype=float)
    return cos2 + sin2 * np.cos(np.multiply.outer(t, big))


def correlation(params: MediumParams, dist: NumberDistribution, t: float, tau) -> np.ndarray:
    """Two-time correlation; scalar or array ``tau``. Independent of position."""
    w = mode_weights(params, dist) * _factors(params, dist, t) ** 2
    tau = np.asarray(tau, dtype=float)
    phase = np.exp(1j * params.c * np.multiply.outer(tau, dist.k))
    return phase @ w


def mean_intensity(params: MediumParams, dist: NumberDistribution, t) -> np.ndarray:
    """``<I(t)>``; scalar or array ``t``."""
    w = mode_weights(params, dist)
    return (_factors(params, dist, t) ** 2) @ w


def asymptotic_intensity(params: MediumParams, dist: NumberDistribution) -> float:
    """Long-time average of the mean intensity, ``sum_k w_k (cos^4 + sin^4 / 2)``."""
    cos2, sin2, _ = mixing_arrays(params, dist.k)
    return float(mode_weights(params, dist) @ (cos2**2 + 0.5 * sin2**2))


def modulation_frequency(params: MediumParams, k: float) -> float:
    """Intensity modulation frequency with the drive off, ``g_k sqrt(N)``."""
    return math.sqrt(params.g2N(k))


def required_window(omega_grid) -> float:
    """Shortest Hann window whose main-lobe half width equals the grid spacing."""
    om = np.sort(np.asarray(omega_grid, dtype=float))
    if om.size < 2:
        raise ValidationError("cannot infer resolution from fewer than two frequencies; pass window")
    spacing = float(np.min(np.diff(om)))
    if spacing <= 0:
        raise ValidationError("omega grid must not contain duplicates")
    return 4.0 * math.pi / spacing


def hann_transform(nu, window: float) -> np.ndarray:
    """Continuous transform of ``cos^2(pi tau / T)`` on ``[-T/2, T/2]`` at offset ``nu``."""
    nu = np.asarray(nu, dtype=float)
    shift = 2.0 * math.pi / window

    def box(v):
        return window * np.sinc(v * window / (2.0 * math.pi))

    return 0.5 * box(nu) + 0.25 * (box(nu - shift) + box(nu + shift))


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    power: np.ndarray
    window: float
    leakage_bound: float


def intensity_spectrum(
    params: MediumParams,
    dist: NumberDistribution,
    t: float,
    omega_grid,
    window: float | None = None,
) -> Spectrum:
    """Hann-windowed transform of the correlation over a symmetric tau window.

    Each mode contributes a line ``w_k P_k(t)^2 H(omega - k c)``; the result can
    dip to ``-leakage_bound`` through negative sidelobes of ``H``.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size == 0 or not np.all(np.isfinite(omega)):
        raise ValidationError("omega grid must be a finite 1-d array")
    need = required_window(omega) if omega.size > 1 else None
    if window is None:
        if need is None:
            raise ValidationError("a single-frequency request needs an explicit window")
        window = need
    elif need is not None and window < need * (1 - 1e-12):
        raise ValidationError(f"window {window:.6g} too short for the requested resolution; need >= {need:.6g}")
    top = max(float(np.max(np.abs(omega))), float(np.max(dist.k)) * params.c)
    dtau = math.pi / (2.0 * top)
    half = math.ceil(0.5 * window / dtau)
    dtau = 0.5 * window / half
    tau = dtau * np.arange(-half, half + 1)
    hann = np.cos(math.pi * tau / window) ** 2
    corr = correlation(params, dist, t, tau)
    kernel = np.exp(-1j * np.multiply.outer(omega, tau))
    power = (kernel @ (hann * corr)).real * dtau
    lines = mode_weights(params, dist) * _factors(params, dist, t) ** 2
    bound = HANN_SIDELOBE * 0.5 * window * float(np.sum(lines))
    return Spectrum(omega=omega, power=power, window=float(window), leakage_bound=bound)


def spectrum_lines(params: MediumParams, dist: NumberDistribution, t: float, omega, window: float) -> np.ndarray:
    """Direct sum of windowed lines; the closed-form counterpart of :func:`intensity_spectrum`."""
    lines = mode_weights(params, dist) * _factors(params, dist, t) ** 2
    nu = np.subtract.outer(np.asarray(omega, dtype=float), params.c * dist.k)
    return hann_transform(nu, window) @ lines


def modulation_depth(intensity) -> float:
    """Peak-to-peak excursion relative to the mean."""
    i = np.asarray(intensity, dtype=float)
    mean = float(np.mean(i))
    if mean == 0:
        raise ValidationError("intensity is identically zero")
    return float((i.max() - i.min()) / mean)


def intensity_period(t, intensity) -> float:
    """Fundamental period of a sampled periodic intensity from its maxima.

    Interior maxima are refined with a three-point parabola and their times fitted
    against their index; at least two maxima are required.
    """
    t = np.asarray(t, dtype=float)
    i = np.asarray(intensity, dtype=float)
    if t.shape != i.shape or t.size < 5:
        raise ValidationError("need matching t and intensity arrays with >= 5 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValidationError("intensity_period needs uniform sampling")
    idx, _ = signal.find_peaks(i, prominence=1e-6 * max(float(np.ptp(i)), 1e-300))
    if idx.size < 2:
        raise ValidationError("fewer than two intensity maxima in the sampled range")
    y0, y1, y2 = i[idx - 1], i[idx], i[idx + 1]
    shift = 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2)
    peaks = t[idx] + shift * dt[0]
    slope, _ = np.polyfit(np.arange(peaks.size), peaks, 1)
    return float(slope)
