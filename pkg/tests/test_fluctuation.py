import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from eitprop.errors import ValidationError
from eitprop.fluctuation import (
    HANN_SIDELOBE,
    NumberDistribution,
    asymptotic_intensity,
    correlation,
    hann_transform,
    intensity_period,
    intensity_spectrum,
    mean_intensity,
    modulation_depth,
    modulation_frequency,
    mode_weights,
    required_window,
    spectrum_lines,
)
from eitprop.model import GaussianPulse, MediumParams, mixing
from eitprop.propagation import ModeGrid


@pytest.fixture
def medium():
    return MediumParams.from_dimensionless(2.0, omega_over_k0c=0.5)


@pytest.fixture
def gaussian(long_pulse):
    return NumberDistribution.gaussian(ModeGrid.for_pulse(long_pulse, 257), long_pulse)


def test_zero_lag_correlation_is_intensity(medium, gaussian):
    for t in (0.0, 3.3, 51.0):
        assert correlation(medium, gaussian, t, 0.0) == pytest.approx(mean_intensity(medium, gaussian, t), rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0, 100), tau=st.floats(-100, 100))
def test_correlation_conjugate_symmetry(t, tau):
    medium = MediumParams(omega=0.7, coupling_g2N=1.1)
    dist = NumberDistribution(np.array([0.9, 1.0, 1.2]), np.array([0.5, 1.0, 2.0]))
    assert correlation(medium, dist, t, -tau) == pytest.approx(np.conj(correlation(medium, dist, t, tau)), abs=1e-12)


def test_free_field_is_stationary(gaussian):
    free = MediumParams(omega=1.0, coupling_g2N=0.0)
    i = mean_intensity(free, gaussian, np.linspace(0, 50, 11))
    np.testing.assert_allclose(i, i[0], rtol=1e-14)
    assert i[0] == pytest.approx(mode_weights(free, gaussian).sum())


def test_intensity_bounded_by_initial(medium, gaussian):
    i = mean_intensity(medium, gaussian, np.linspace(0, 200, 2001))
    assert np.all(i >= 0)
    assert np.all(i <= i[0] * (1 + 1e-14))


def test_single_mode_revival(medium):
    k = 1.3
    dist = NumberDistribution.single_mode(k, 2.0)
    period = 2 * math.pi / mixing(medium, k).big_theta
    t = np.linspace(0, 5, 37)
    np.testing.assert_allclose(mean_intensity(medium, dist, t + period), mean_intensity(medium, dist, t), rtol=0, atol=1e-12 * mean_intensity(medium, dist, 0.0))


def test_drive_off_gives_cos_squared():
    medium = MediumParams(omega=0.0, coupling_g2N=2.0)
    k = 1.0
    dist = NumberDistribution.single_mode(k)
    wm = modulation_frequency(medium, k)
    assert wm == pytest.approx(math.sqrt(2.0))
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(mean_intensity(medium, dist, t), k * np.cos(wm * t) ** 2, atol=1e-14)
    assert mean_intensity(medium, dist, math.pi / (2 * wm)) == pytest.approx(0.0, abs=1e-28)


def test_strong_drive_is_nearly_constant(gaussian):
    medium = MediumParams(omega=100.0, coupling_g2N=1.0)
    i = mean_intensity(medium, gaussian, np.linspace(0, 100, 5001))
    assert modulation_depth(i) < 1e-3


def test_long_time_average(medium, gaussian):
    t = np.linspace(0, 4000, 200001)
    i = mean_intensity(medium, gaussian, t)
    assert i.mean() == pytest.approx(asymptotic_intensity(medium, gaussian), rel=2e-3)


def test_hann_transform_closed_form():
    window = 40.0
    for nu in (0.0, 0.1, 0.33, 1.0):
        re = integrate.quad(lambda s: math.cos(math.pi * s / window) ** 2 * math.cos(nu * s), -window / 2, window / 2,
                            limit=200)[0]
        assert hann_transform(nu, window) == pytest.approx(re, rel=1e-10, abs=1e-12)


def test_hann_sidelobe_constant():
    window = 1.0
    res = optimize.minimize_scalar(lambda v: float(hann_transform(v, window)), bounds=(4 * math.pi, 6 * math.pi),
                                   method="bounded", options={"xatol": 1e-10})
    assert -res.fun / float(hann_transform(0.0, window)) == pytest.approx(HANN_SIDELOBE, abs=1e-5)


def test_spectrum_matches_line_oracle(medium, gaussian):
    omega = np.linspace(0.85, 1.15, 121)
    for t in (0.0, 7.0):
        spec = intensity_spectrum(medium, gaussian, t, omega)
        ref = spectrum_lines(medium, gaussian, t, omega, spec.window)
        np.testing.assert_allclose(spec.power, ref, rtol=0, atol=1e-9 * np.abs(ref).max())
        assert spec.power.min() >= -spec.leakage_bound


def test_single_line_position(medium):
    dist = NumberDistribution.single_mode(1.1, 3.0)
    omega = np.linspace(1.0, 1.2, 201)
    spec = intensity_spectrum(medium, dist, 0.0, omega)
    assert omega[np.argmax(spec.power)] == pytest.approx(1.1, abs=1e-12)


def test_gaussian_spectrum_follows_weights():
    # dense modes and a smooth window: S(omega) ~ (2 pi / (c dk)) w(omega / c) at t = 0
    pulse = GaussianPulse.from_width(1.0, 1.0)
    grid = ModeGrid.for_pulse(pulse, 2049)
    dist = NumberDistribution.gaussian(grid, pulse)
    medium = MediumParams(omega=1.0, coupling_g2N=0.3)
    dk = grid.k[1] - grid.k[0]
    omega = np.linspace(0.9, 1.1, 21)
    spec = intensity_spectrum(medium, dist, 0.0, omega, window=1500.0)
    w = np.interp(omega, dist.k, mode_weights(medium, dist))
    np.testing.assert_allclose(spec.power * dk / (2 * math.pi), w, rtol=1e-3)


def test_spectrum_window_validation(medium, gaussian):
    omega = np.linspace(0.9, 1.1, 201)
    need = required_window(omega)
    assert need == pytest.approx(4 * math.pi / 0.001)
    with pytest.raises(ValidationError, match="need >="):
        intensity_spectrum(medium, gaussian, 0.0, omega, window=need / 2)
    with pytest.raises(ValidationError):
        intensity_spectrum(medium, gaussian, 0.0, [1.0])
    with pytest.raises(ValidationError):
        required_window([1.0, 1.0])


def test_distribution_validation():
    with pytest.raises(ValidationError):
        NumberDistribution(np.array([1.0]), np.array([-1.0]))
    with pytest.raises(ValidationError):
        NumberDistribution(np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValidationError):
        NumberDistribution(np.array([1.0, 2.0]), np.array([1.0]))


def test_period_measurement():
    t = np.linspace(0, 30, 3001)
    assert intensity_period(t, np.cos(1.7 * t) ** 2) == pytest.approx(math.pi / 1.7, rel=1e-7)
    with pytest.raises(ValidationError):
        intensity_period(t[:100], np.cos(0.01 * t[:100]))
    with pytest.raises(ValidationError):
        modulation_depth(np.zeros(4))
