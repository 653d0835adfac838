"""Medium parameters and closed-form per-mode quantities of the bosonized Λ model.

Units are normalized so that ``c = 1`` and ``k0 = 1`` unless overridden. Every
quantity here is a pure function of immutable value types.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


class CouplingForm(str, enum.Enum):
    """How the collective coupling ``g_k^2 N`` depends on the wave number."""

    CONSTANT_AT_K0 = "constant_at_k0"
    LINEAR_IN_K = "linear_in_k"


class Regime(str, enum.Enum):
    SUBLUMINAL = "subluminal"
    NEGATIVE_VELOCITY = "negative_velocity"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MediumParams:
    """Drive strength, collective coupling and propagation constants.

    ``coupling_g2N`` is ``g_k^2 N`` evaluated at ``k0``. With
    ``CouplingForm.LINEAR_IN_K`` the coupling scales as ``G^2 k`` with
    ``G^2 = coupling_g2N / k0``, which is what produces the dispersion of the
    dressed frequency and hence the velocity split.
    """

    omega: float
    coupling_g2N: float
    coupling_form: CouplingForm = CouplingForm.LINEAR_IN_K
    k0: float = 1.0
    c: float = 1.0

    def __post_init__(self) -> None:
        omega = _finite("omega", self.omega)
        g2n = _finite("coupling_g2N", self.coupling_g2N)
        k0 = _finite("k0", self.k0)
        c = _finite("c", self.c)
        if omega < 0:
            raise ValidationError(f"omega must be >= 0, got {omega}")
        if g2n < 0:
            raise ValidationError(f"coupling_g2N must be >= 0, got {g2n}")
        if omega == 0 and g2n == 0:
            raise ValidationError("omega and coupling_g2N cannot both be zero (mixing angle undefined)")
        if k0 <= 0:
            raise ValidationError(f"k0 must be > 0, got {k0}")
        if c <= 0:
            raise ValidationError(f"c must be > 0, got {c}")
        object.__setattr__(self, "coupling_form", CouplingForm(self.coupling_form))

    @classmethod
    def from_G2(cls, omega: float, G2: float, k0: float = 1.0, c: float = 1.0) -> MediumParams:
        """Build from ``G^2`` in ``g_k^2 N = G^2 k``."""
        return cls(omega=omega, coupling_g2N=G2 * k0, coupling_form=CouplingForm.LINEAR_IN_K, k0=k0, c=c)

    @classmethod
    def from_dimensionless(
        cls,
        n: float,
        *,
        omega_over_k0c: float | None = None,
        velocity_shift: float | None = None,
        k0: float = 1.0,
        c: float = 1.0,
        coupling_form: CouplingForm = CouplingForm.LINEAR_IN_K,
    ) -> MediumParams:
        """Build from ``n = g^2 N / Omega^2`` plus either ``Omega/(k0 c)`` or the shift ``F``.

        ``F`` is the fractional group-velocity shift, ``v_pm = c (1 +- F)``.
        """
        if (omega_over_k0c is None) == (velocity_shift is None):
            raise ValidationError("give exactly one of omega_over_k0c or velocity_shift")
        n = _finite("n", n)
        if n < 0:
            raise ValidationError(f"n must be >= 0, got {n}")
        if omega_over_k0c is not None:
            omega = _finite("omega_over_k0c", omega_over_k0c) * k0 * c
        else:
            shift = _finite("velocity_shift", velocity_shift)
            if n == 0:
                if shift != 0:
                    raise ValidationError("a nonzero velocity_shift needs n > 0")
                raise ValidationError("velocity_shift does not determine omega when n = 0; give omega_over_k0c")
            omega = 2.0 * k0 * c * shift * math.sqrt(1.0 + n) / n
        return cls(omega=omega, coupling_g2N=n * omega**2, coupling_form=coupling_form, k0=k0, c=c)

    @property
    def G2(self) -> float:
        return self.coupling_g2N / self.k0

    @property
    def n(self) -> float:
        """``g_{k0}^2 N / Omega^2``; ``inf`` when the drive is off."""
        if self.omega == 0:
            return math.inf
        return self.coupling_g2N / self.omega**2

    def g2N(self, k):
        """``g_k^2 N`` for scalar or array ``k`` according to ``coupling_form``."""
        k = np.asarray(k, dtype=float)
        if self.coupling_form is CouplingForm.LINEAR_IN_K:
            out = self.G2 * k
        else:
            out = np.full_like(k, self.coupling_g2N)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class GaussianPulse:
    """Spectral amplitudes ``alpha_k = amplitude * exp(-f^2 (k - k0)^2)``.

    The spatial envelope of the field is ``exp(-x^2 / 4 f^2)``; the width ``d``
    quoted in wavelengths is taken to be ``f`` itself.
    """

    k0: float
    f: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        for name in ("k0", "f", "amplitude"):
            if _finite(name, getattr(self, name)) <= 0:
                raise ValidationError(f"pulse {name} must be > 0")

    @classmethod
    def from_width(cls, k0: float, width_wavelengths: float, amplitude: float = 1.0) -> GaussianPulse:
        return cls(k0=k0, f=width_wavelengths * 2.0 * math.pi / k0, amplitude=amplitude)

    @property
    def width_wavelengths(self) -> float:
        return self.f * self.k0 / (2.0 * math.pi)

    def alpha(self, k):
        k = np.asarray(k, dtype=float)
        return self.amplitude * np.exp(-self.f**2 * (k - self.k0) ** 2)


@dataclass(frozen=True)
class ModeMixing:
    """Mixing angle and dressed Rabi frequency of one mode.

    ``coupling`` is ``g_k sqrt(N)`` and ``omega`` the drive, kept alongside the
    derived angles so generators can be rebuilt without trigonometric round-off.
    """

    k: float
    theta: float
    big_theta: float
    n_dimensionless: float
    coupling: float
    omega: float

    @classmethod
    def from_couplings(cls, coupling: float, omega: float, k: float = 1.0) -> ModeMixing:
        if coupling < 0 or omega < 0:
            raise ValidationError("coupling and omega must be >= 0")
        if coupling == 0 and omega == 0:
            raise ValidationError("mixing angle undefined for zero coupling and zero drive")
        n = math.inf if omega == 0 else (coupling / omega) ** 2
        return cls(
            k=k,
            theta=math.atan2(coupling, omega),
            big_theta=math.hypot(coupling, omega),
            n_dimensionless=n,
            coupling=coupling,
            omega=omega,
        )

    @property
    def cos(self) -> float:
        return self.omega / self.big_theta

    @property
    def sin(self) -> float:
        return self.coupling / self.big_theta


def mixing(params: MediumParams, k: float) -> ModeMixing:
    """Per-mode mixing for wave number ``k`` (``tan theta = g_k sqrt(N) / Omega``)."""
    k = _finite("k", k)
    if k <= 0:
        raise ValidationError(f"k must be > 0, got {k}")
    return ModeMixing.from_couplings(math.sqrt(params.g2N(k)), params.omega, k)


def mixing_arrays(params: MediumParams, k):
    """Vectorized ``(cos^2 theta, sin^2 theta, Theta)`` over an array of wave numbers."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValidationError("wave numbers must be > 0")
    g2n = np.broadcast_to(params.g2N(k), k.shape)
    theta2 = g2n + params.omega**2
    return params.omega**2 / theta2, g2n / theta2, np.sqrt(theta2)


def velocity_shift(params: MediumParams) -> float:
    """Fractional shift ``F = (Omega / 2 k0 c) n / sqrt(1 + n)``.

    Written as ``g^2 N / (2 k0 c Theta_0)``, which is algebraically identical
    for ``Omega > 0`` and gives the ``Omega -> 0`` limit ``g sqrt(N) / 2 k0 c``.
    """
    g2n = params.coupling_g2N
    return g2n / (2.0 * params.k0 * params.c * math.sqrt(g2n + params.omega**2))


def group_velocities(params: MediumParams) -> tuple[float, float, float]:
    """``(v_plus, v0, v_minus)`` of the three packet components."""
    shift = velocity_shift(params)
    c = params.c
    return c * (1.0 + shift), c, c * (1.0 - shift)


def split_regime(params: MediumParams) -> Regime:
    shift = velocity_shift(params)
    if shift == 1.0:
        warnings.warn("F = 1: slow component is stationary; classified as subluminal", stacklevel=2)
    return Regime.NEGATIVE_VELOCITY if shift > 1.0 else Regime.SUBLUMINAL


def amplitude_ratio(params: MediumParams) -> float:
    """Approximate ``|E_pm| / |E_0|`` peak ratio, ``n / 2``."""
    if params.omega == 0:
        raise ValidationError("amplitude ratio diverges for omega = 0")
    return params.n / 2.0


@dataclass(frozen=True)
class AnalyticCoefficients:
    a_coef: float
    omega0: float
    d0: float
    e0: float
    f0: float
    c_plus: float
    c_minus: float


def analytic_coefficients(params: MediumParams) -> AnalyticCoefficients:
    """Coefficients of the first-order Taylor approximation of the packets."""
    if params.omega == 0:
        raise ValidationError("analytic packet coefficients need omega > 0")
    om, k0, c = params.omega, params.k0, params.c
    a = params.G2 / om**2
    ak = a * k0
    omega0 = om * math.sqrt(1.0 + ak)
    return AnalyticCoefficients(
        a_coef=a,
        omega0=omega0,
        d0=(3.0 + ak) / (2.0 * k0 * (1.0 + ak)),
        e0=omega0 * a / (2.0 * (1.0 + ak)),
        f0=(1.0 - ak) / (2.0 * k0 * (1.0 + ak)),
        c_plus=c + omega0 / k0,
        c_minus=c - omega0 / k0,
    )
