"""Multi-bit storage of photons as collective metastable excitations.

An integer ``n < 2**L`` is written little-endian into ``L`` probe modes, one
photon per set bit. Each occupied mode lives in the single-excitation space
spanned by (photon, A exciton, C exciton); the empty modes are the vacuum,
which the Hamiltonian leaves alone. Sweeping the drive from large to zero
carries every photon along the instantaneous dark state into its C exciton.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .model import MediumParams

MAX_STEP_PHASE = 0.1
OMEGA_START_CAP = 1e3


class SweepShape(str, enum.Enum):
    LINEAR = "linear"
    COSINE = "cosine"
    EXPONENTIAL = "exponential"
    # instantaneous jump to omega_end; the probe of the static Rabi problem
    STEP = "step"


_SHAPE_CODES = {
    SweepShape.LINEAR: _kernels.SHAPE_LINEAR,
    SweepShape.COSINE: _kernels.SHAPE_COSINE,
    SweepShape.EXPONENTIAL: _kernels.SHAPE_EXPONENTIAL,
    SweepShape.STEP: _kernels.SHAPE_STEP,
}


@dataclass(frozen=True)
class BitRegister:
    """Bits in little-endian order: ``bits[i]`` weighs ``2**i``."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValidationError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def occupied(self) -> list[int]:
        return [i for i, b in enumerate(self.bits) if b]


def encode(n: int, length: int) -> BitRegister:
    if length < 1:
        raise ValidationError("register length must be >= 1")
    if n < 0 or int(n) != n:
        raise ValidationError(f"n must be a non-negative integer, got {n}")
    n = int(n)
    if n >= 2**length:
        raise ValidationError(f"{n} does not fit in {length} bits")
    return BitRegister(tuple((n >> i) & 1 for i in range(length)))


def decode(reg: BitRegister) -> int:
    return sum(b << i for i, b in enumerate(reg.bits))


@dataclass(frozen=True)
class SweepProfile:
    omega_start: float
    omega_end: float
    duration: float
    shape: SweepShape = SweepShape.COSINE
    rate: float = 5.0

    def __post_init__(self) -> None:
        if not (self.omega_start >= 0 and self.omega_end >= 0):
            raise ValidationError("sweep drive values must be >= 0")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValidationError("sweep duration must be finite and > 0")
        if not self.rate > 0:
            raise ValidationError("exponential rate must be > 0")
        object.__setattr__(self, "shape", SweepShape(self.shape))

    def omega(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        code = _SHAPE_CODES[self.shape]
        return np.array(
            [_kernels.omega_at(code, self.omega_start, self.omega_end, self.duration, self.rate, s) for s in t]
        )


def mode_wavenumbers(params: MediumParams, length: int, spacing: float = 0.01) -> np.ndarray:
    """Bit modes centred on ``k0`` with relative spacing ``spacing``."""
    return params.k0 * (1.0 + spacing * (np.arange(length) - 0.5 * (length - 1)))


def dark_state_overlap(state, mix) -> float:
    """Squared overlap of a normalized (a, A, C) state with ``(cos theta, 0, -sin theta)``."""
    y = np.asarray(state, dtype=complex)
    norm = float(np.vdot(y, y).real)
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"state must be normalized (norm^2 = {norm!r})")
    d = np.array([mix.cos, 0.0, -mix.sin])
    return float(abs(np.vdot(d, y)) ** 2)


def _dark(coupling: np.ndarray, omega: float) -> np.ndarray:
    big = np.hypot(coupling, omega)
    return np.stack([omega / big, np.zeros_like(coupling), -coupling / big], axis=1)


@dataclass
class TransferReport:
    """Outcome of a sweep for the occupied modes of a register.

    ``fidelity`` is the product over occupied modes of the squared overlap
    with the target; empty registers give exactly 1.
    """

    fidelity: float
    leakage_a: float
    mode_index: list[int]
    mode_k: list[float]
    mode_fidelity: list[float]
    mode_leakage_a: list[float]
    mode_dark_overlap: list[float]
    final_states: np.ndarray
    times: np.ndarray
    populations: np.ndarray
    steps: int
    dt: float

    @property
    def losses(self) -> float:
        return 1.0 - self.fidelity

    def summary(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "leakage_a": self.leakage_a,
            "steps": self.steps,
            "dt": self.dt,
            "modes": [
                {"index": i, "k": k, "fidelity": f, "leakage_a": la, "dark_overlap": do}
                for i, k, f, la, do in zip(
                    self.mode_index, self.mode_k, self.mode_fidelity, self.mode_leakage_a, self.mode_dark_overlap
                )
            ],
        }


def _empty_report(sweep: SweepProfile) -> TransferReport:
    return TransferReport(
        fidelity=1.0,
        leakage_a=0.0,
        mode_index=[],
        mode_k=[],
        mode_fidelity=[],
        mode_leakage_a=[],
        mode_dark_overlap=[],
        final_states=np.zeros((0, 3), dtype=complex),
        times=np.array([0.0, sweep.duration]),
        populations=np.zeros((2, 0, 3)),
        steps=0,
        dt=0.0,
    )


def run_sweep(
    coupling: np.ndarray,
    initial: np.ndarray,
    sweep: SweepProfile,
    dt: float | None = None,
    record_points: int = 1000,
    max_step_phase: float = MAX_STEP_PHASE,
):
    """Integrate ``(modes, 3)`` states through ``sweep``.

    Returns ``(final, times, records, peak_a, dt, steps)``. The step bound
    ``Theta_max dt < max_step_phase`` is enforced.
    """
    coupling = np.ascontiguousarray(coupling, dtype=float)
    initial = np.ascontiguousarray(initial, dtype=complex)
    top = float(np.hypot(coupling.max(), max(sweep.omega_start, sweep.omega_end)))
    if dt is None:
        dt = 0.5 * max_step_phase / top
    if not dt > 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if top * dt >= max_step_phase:
        raise ValidationError(
            f"dt = {dt:.3g} too coarse: Theta_max dt = {top * dt:.3g} must stay below {max_step_phase}"
        )
    steps = max(1, math.ceil(sweep.duration / dt))
    h = sweep.duration / steps
    every = max(1, steps // max(1, record_points))
    final, records, peak_a, ok = _kernels.magnus4_sweep(
        coupling,
        initial,
        _SHAPE_CODES[sweep.shape],
        float(sweep.omega_start),
        float(sweep.omega_end),
        float(sweep.duration),
        float(sweep.rate),
        h,
        steps,
        every,
    )
    if not ok:
        raise NumericalError("sweep produced non-finite amplitudes")
    times = h * every * np.arange(records.shape[0])
    return final, times, records, peak_a, h, steps


def _couplings(params: MediumParams, k: np.ndarray) -> np.ndarray:
    return np.sqrt(np.asarray(params.g2N(k), dtype=float) * np.ones_like(k))


def _capped(params: MediumParams, sweep: SweepProfile, k: np.ndarray) -> SweepProfile:
    cap = OMEGA_START_CAP * float(_couplings(params, k).max())
    if max(sweep.omega_start, sweep.omega_end) > cap:
        warnings.warn(f"drive capped at {cap:.6g} ({OMEGA_START_CAP:g} g sqrt(N))", stacklevel=3)
        return SweepProfile(
            min(sweep.omega_start, cap), min(sweep.omega_end, cap), sweep.duration, sweep.shape, sweep.rate
        )
    return sweep


def _transfer(
    reg: BitRegister,
    params: MediumParams,
    sweep: SweepProfile,
    dt: float | None,
    mode_k,
    initial_of,
    target_of,
    record_points: int,
) -> TransferReport:
    occupied = reg.occupied
    if not occupied:
        return _empty_report(sweep)
    all_k = mode_wavenumbers(params, len(reg)) if mode_k is None else np.asarray(mode_k, dtype=float)
    if all_k.shape != (len(reg),):
        raise ValidationError("need one wave number per register bit")
    k = all_k[occupied]
    coupling = _couplings(params, k)
    if np.any(coupling == 0):
        raise ValidationError("storage needs nonzero coupling on every occupied mode")
    sweep = _capped(params, sweep, k)
    initial = initial_of(coupling, sweep)
    final, times, records, peak_a, h, steps = run_sweep(coupling, initial, sweep, dt, record_points)
    target = target_of(coupling, sweep)
    fid = np.abs(np.einsum("mi,mi->m", target.conj(), final)) ** 2
    dark = np.abs(np.einsum("mi,mi->m", _dark(coupling, sweep.omega_end), final)) ** 2
    return TransferReport(
        fidelity=float(np.prod(fid)),
        leakage_a=float(peak_a.max()),
        mode_index=list(occupied),
        mode_k=[float(v) for v in k],
        mode_fidelity=[float(v) for v in fid],
        mode_leakage_a=[float(v) for v in peak_a],
        mode_dark_overlap=[float(v) for v in dark],
        final_states=final,
        times=times,
        populations=np.abs(records) ** 2,
        steps=steps,
        dt=h,
    )


def _photon(coupling, sweep):
    y = np.zeros((coupling.size, 3), dtype=complex)
    y[:, 0] = 1.0
    return y


def _exciton(coupling, sweep):
    y = np.zeros((coupling.size, 3), dtype=complex)
    y[:, 2] = 1.0
    return y


def write_sweep(
    reg: BitRegister,
    params: MediumParams,
    sweep: SweepProfile,
    dt: float | None = None,
    *,
    mode_k=None,
    start_in_dark_state: bool = False,
    record_points: int = 1000,
) -> TransferReport:
    """Store photons into C excitons by lowering the drive to zero.

    The initial state is a bare photon; with ``start_in_dark_state`` it is the
    dark state at ``omega_start`` instead, which removes the O((g/Omega_start)^2)
    mismatch from the finite starting drive. Fidelity is measured against the
    dark state at ``omega_end = 0``, i.e. ``-|1>_C``.
    """
    if sweep.omega_end != 0:
        raise ValidationError("a write sweep must end at omega = 0")

    def initial(coupling, sw):
        return _dark(coupling, sw.omega_start).astype(complex) if start_in_dark_state else _photon(coupling, sw)

    def target(coupling, sw):
        return _dark(coupling, 0.0).astype(complex)

    return _transfer(reg, params, sweep, dt, mode_k, initial, target, record_points)


def read_sweep(
    reg: BitRegister,
    params: MediumParams,
    sweep: SweepProfile,
    dt: float | None = None,
    *,
    mode_k=None,
    initial_states=None,
    record_points: int = 1000,
) -> TransferReport:
    """Release stored C excitons into photons by raising the drive from zero.

    ``initial_states`` (modes, 3) overrides the default ``|1>_C`` per occupied mode.
    """
    if sweep.omega_start != 0:
        raise ValidationError("a read sweep must start at omega = 0")

    def initial(coupling, sw):
        if initial_states is None:
            return _exciton(coupling, sw)
        y = np.asarray(initial_states, dtype=complex)
        if y.shape != (coupling.size, 3):
            raise ValidationError("initial_states must have shape (occupied modes, 3)")
        return y

    return _transfer(reg, params, sweep, dt, mode_k, initial, _photon, record_points)


def round_trip(
    reg: BitRegister,
    params: MediumParams,
    write: SweepProfile,
    read: SweepProfile,
    dt: float | None = None,
    *,
    mode_k=None,
    record_points: int = 1000,
) -> tuple[TransferReport, TransferReport]:
    """Write then read, feeding the stored state into the read-out unchanged."""
    stored = write_sweep(reg, params, write, dt, mode_k=mode_k, record_points=record_points)
    out = read_sweep(
        reg, params, read, dt, mode_k=mode_k, initial_states=stored.final_states, record_points=record_points
    )
    return stored, out


def theta_min(params: MediumParams, reg_length: int, omega_floor: float = 0.0, mode_k=None) -> float:
    """Smallest dressed frequency met by any register mode during a sweep to ``omega_floor``."""
    k = mode_wavenumbers(params, reg_length) if mode_k is None else np.asarray(mode_k, dtype=float)
    return float(np.hypot(_couplings(params, k).min(), omega_floor))
