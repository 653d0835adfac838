"""Compiled time-stepping loops for the per-mode (a, A, C) system.

The single-excitation Hamiltonian of mode k is the real tridiagonal matrix
``[[0, g, 0], [g, 0, W], [0, W, 0]]`` with ``g = g_k sqrt(N)`` and drive ``W``;
states evolve as ``dy/dt = -i H y``.
"""

import math

import numpy as np
from numba import njit

SHAPE_CONSTANT = 0
SHAPE_LINEAR = 1
SHAPE_COSINE = 2
SHAPE_EXPONENTIAL = 3
SHAPE_STEP = 4


@njit(cache=True)
def omega_at(shape, w_start, w_end, duration, rate, t):
    if shape == SHAPE_CONSTANT:
        return w_start
    if shape == SHAPE_STEP:
        return w_end
    s = t / duration
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    if shape == SHAPE_LINEAR:
        u = s
    elif shape == SHAPE_COSINE:
        u = 0.5 * (1.0 - math.cos(math.pi * s))
    else:
        # exponentially slow near the low-drive end, so read is the time reverse of write
        lo, hi = min(w_start, w_end), max(w_start, w_end)
        sigma = 1.0 - s if w_start >= w_end else s
        return lo + (hi - lo) * math.expm1(rate * sigma) / math.expm1(rate)
    return w_start + (w_end - w_start) * u


@njit(cache=True)
def _rhs(g, w, y0, y1, y2):
    return -1j * g * y1, -1j * (g * y0 + w * y2), -1j * w * y1


@njit(cache=True)
def rk4_constant(g, w, y, h, nsteps):
    """Classic RK4 with constant drive. Returns (state, finite_flag)."""
    y0, y1, y2 = y[0], y[1], y[2]
    for _ in range(nsteps):
        k10, k11, k12 = _rhs(g, w, y0, y1, y2)
        k20, k21, k22 = _rhs(g, w, y0 + 0.5 * h * k10, y1 + 0.5 * h * k11, y2 + 0.5 * h * k12)
        k30, k31, k32 = _rhs(g, w, y0 + 0.5 * h * k20, y1 + 0.5 * h * k21, y2 + 0.5 * h * k22)
        k40, k41, k42 = _rhs(g, w, y0 + h * k30, y1 + h * k31, y2 + h * k32)
        y0 = y0 + h / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
        y1 = y1 + h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        y2 = y2 + h / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
    out = np.empty(3, dtype=np.complex128)
    out[0], out[1], out[2] = y0, y1, y2
    ok = math.isfinite(abs(y0) + abs(y1) + abs(y2))
    return out, ok


@njit(cache=True)
def _apply_exp(g, w, tau, y0, y1, y2):
    # exp(-i tau H) = I - (1 - cos(T tau)) H^2 / T^2 - i sin(T tau) H / T
    big = math.sqrt(g * g + w * w)
    if big == 0.0:
        return y0, y1, y2
    cs = math.cos(big * tau)
    sn = math.sin(big * tau)
    h0 = g * y1
    h1 = g * y0 + w * y2
    h2 = w * y1
    hh0 = g * h1
    hh1 = g * h0 + w * h2
    hh2 = w * h1
    a = (1.0 - cs) / (big * big)
    b = sn / big
    return y0 - a * hh0 - 1j * b * h0, y1 - a * hh1 - 1j * b * h1, y2 - a * hh2 - 1j * b * h2


@njit(cache=True)
def magnus4_sweep(g, y, shape, w_start, w_end, duration, rate, h, nsteps, record_every):
    """Commutator-free 4th-order Magnus integration of all modes through a sweep.

    ``g`` has shape (modes,), ``y`` shape (modes, 3). Returns the final states,
    the recorded states every ``record_every`` steps, the per-mode maximum of
    the A population and a finiteness flag.
    """
    modes = g.shape[0]
    sq3 = math.sqrt(3.0)
    c1 = 0.5 - sq3 / 6.0
    c2 = 0.5 + sq3 / 6.0
    a1 = (3.0 - 2.0 * sq3) / 12.0
    a2 = (3.0 + 2.0 * sq3) / 12.0
    nrec = nsteps // record_every + 1
    records = np.empty((nrec, modes, 3), dtype=np.complex128)
    peak_a = np.empty(modes)
    out = y.copy()
    for m in range(modes):
        peak_a[m] = abs(out[m, 1]) ** 2
    records[0] = out
    rec = 1
    for step in range(nsteps):
        t = step * h
        w1 = omega_at(shape, w_start, w_end, duration, rate, t + c1 * h)
        w2 = omega_at(shape, w_start, w_end, duration, rate, t + c2 * h)
        wa = (a2 * w1 + a1 * w2) / 0.5
        wb = (a1 * w1 + a2 * w2) / 0.5
        for m in range(modes):
            y0, y1, y2 = out[m, 0], out[m, 1], out[m, 2]
            # exponent h (a2 H1 + a1 H2) acts first, then h (a1 H1 + a2 H2)
            y0, y1, y2 = _apply_exp(g[m], wa, 0.5 * h, y0, y1, y2)
            y0, y1, y2 = _apply_exp(g[m], wb, 0.5 * h, y0, y1, y2)
            out[m, 0], out[m, 1], out[m, 2] = y0, y1, y2
            pa = abs(y1) ** 2
            if pa > peak_a[m]:
                peak_a[m] = pa
        if (step + 1) % record_every == 0:
            records[rec] = out
            rec += 1
    ok = True
    for m in range(modes):
        if not math.isfinite(abs(out[m, 0]) + abs(out[m, 1]) + abs(out[m, 2])):
            ok = False
    return out, records[:rec], peak_a, ok
