"""Per-mode evolution of the expectation amplitudes <a_k>, <A_k>, <C_k>.

The basis ordering is (a, A, C) throughout: photon, excited-state exciton and
metastable exciton. Modes never couple, so every function acts on one mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .model import ModeMixing


@dataclass(frozen=True)
class ModeState:
    a: complex
    ex_a: complex
    ex_c: complex

    @classmethod
    def from_array(cls, y) -> ModeState:
        y = np.asarray(y, dtype=complex)
        return cls(complex(y[0]), complex(y[1]), complex(y[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.ex_a, self.ex_c], dtype=complex)

    @property
    def norm2(self) -> float:
        return abs(self.a) ** 2 + abs(self.ex_a) ** 2 + abs(self.ex_c) ** 2


@dataclass(frozen=True)
class PolaritonState:
    """Dark ``d``, bright ``b`` and excited-exciton ``ex_a`` amplitudes."""

    d: complex
    b: complex
    ex_a: complex


@dataclass(frozen=True)
class QLadderState:
    """Amplitudes of ``Q_pm = (A +- B) / sqrt(2)``."""

    q_plus: complex
    q_minus: complex


def evolution_matrix(mix: ModeMixing) -> np.ndarray:
    """Generator ``M`` with ``d(state)/dt = M state``; skew-Hermitian."""
    g, w = mix.coupling, mix.omega
    return -1j * np.array([[0.0, g, 0.0], [g, 0.0, w], [0.0, w, 0.0]])


def dark_vector(mix: ModeMixing) -> np.ndarray:
    """Null vector of the generator, ``(cos theta, 0, -sin theta)``."""
    return np.array([mix.cos, 0.0, -mix.sin])


def to_polariton(state: ModeState, mix: ModeMixing) -> PolaritonState:
    cs, sn = mix.cos, mix.sin
    return PolaritonState(
        d=state.a * cs - state.ex_c * sn,
        b=state.a * sn + state.ex_c * cs,
        ex_a=state.ex_a,
    )


def from_polariton(p: PolaritonState, mix: ModeMixing) -> ModeState:
    cs, sn = mix.cos, mix.sin
    return ModeState(a=p.d * cs + p.b * sn, ex_a=p.ex_a, ex_c=-p.d * sn + p.b * cs)


def to_ladder(p: PolaritonState) -> QLadderState:
    r = 1.0 / math.sqrt(2.0)
    return QLadderState(q_plus=r * (p.ex_a + p.b), q_minus=r * (p.ex_a - p.b))


def evolve_exact(state: ModeState, mix: ModeMixing, t: float) -> ModeState:
    """Closed-form propagation by ``t`` (negative ``t`` runs backwards).

    The dark amplitude is constant; ``(b, A)`` rotate as ``A +- B ~ exp(-+ i Theta t)``.
    """
    p = to_polariton(state, mix)
    phase = mix.big_theta * t
    cs, sn = math.cos(phase), math.sin(phase)
    b = p.b * cs - 1j * p.ex_a * sn
    ex_a = p.ex_a * cs - 1j * p.b * sn
    return from_polariton(PolaritonState(d=p.d, b=b, ex_a=ex_a), mix)


def evolve_numeric(state: ModeState, mix: ModeMixing, t: float, dt: float) -> ModeState:
    """Fixed-step RK4 integration; an oracle for :func:`evolve_exact`.

    The step is shrunk to ``t / ceil(t / dt)`` so that the run ends exactly at ``t``.
    """
    if not dt > 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if not t >= 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    nsteps = math.ceil(t / dt - 1e-9) if t > 0 else 0
    h = t / nsteps if nsteps else 0.0
    y, ok = _kernels.rk4_constant(mix.coupling, mix.omega, state.as_array(), h, nsteps)
    if not ok:
        raise NumericalError(f"RK4 produced non-finite amplitudes (t={t}, dt={dt})")
    return ModeState.from_array(y)


def mean_photon_amplitude(a0: complex, mix: ModeMixing, t) -> complex:
    """``<a_k(t)>`` for a coherent field over the collective ground state."""
    return a0 * (mix.cos**2 + mix.sin**2 * np.cos(mix.big_theta * t))
