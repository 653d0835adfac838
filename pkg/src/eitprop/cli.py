"""Command-line front end: ``eitprop <command> --config <file|name> --out <dir>``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import fluctuation as fl
from . import fock
from . import memory as mem
from .errors import NumericalError, ValidationError
from .model import amplitude_ratio, analytic_coefficients, group_velocities, split_regime, velocity_shift
from .output import write_csv, write_json
from .propagation import (
    COMPONENTS,
    QuadratureSynthesizer,
    path_discrepancy,
    synthesize_analytic,
    track_velocities,
    warn_if_dispersionless,
)

log = logging.getLogger("eitprop")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _medium_summary(cfg: cfgmod.RunConfig) -> dict:
    m = cfg.medium
    return {
        "omega": m.omega,
        "coupling_g2N": m.coupling_g2N,
        "coupling_form": m.coupling_form.value,
        "k0": m.k0,
        "c": m.c,
        "n": m.n,
    }


def cmd_velocities(cfg: cfgmod.RunConfig, out: Path, threads: int = 1, seed: int = 0) -> dict:
    m = cfg.medium
    v_plus, v0, v_minus = group_velocities(m)
    payload = {
        "command": "velocities",
        "config": cfg.name,
        "medium": _medium_summary(cfg),
        "velocity_shift": velocity_shift(m),
        "v_plus": v_plus,
        "v0": v0,
        "v_minus": v_minus,
        "regime": split_regime(m).value,
        "amplitude_ratio": amplitude_ratio(m) if m.omega > 0 else None,
    }
    if m.omega > 0:
        co = analytic_coefficients(m)
        payload["analytic_coefficients"] = {
            "a_coef": co.a_coef,
            "omega0": co.omega0,
            "d0": co.d0,
            "e0": co.e0,
            "f0": co.f0,
            "c_plus": co.c_plus,
            "c_minus": co.c_minus,
        }
    write_json(out / "velocities.json", payload)
    return payload


def cmd_propagate(cfg: cfgmod.RunConfig, out: Path, threads: int = 1, seed: int = 0) -> dict:
    m = cfg.medium
    warn_if_dispersionless(m)
    x = cfg.x
    syn = QuadratureSynthesizer(m, cfg.pulse, cfg.grid, x)
    snaps = syn.series(cfg.times, threads)
    t_col = np.repeat(cfg.times, x.size)
    x_col = np.tile(x, len(snaps))
    cols = [t_col, x_col]
    header = ["t", "x"]
    for name in COMPONENTS:
        vals = np.concatenate([s.component(name) for s in snaps])
        cols += [vals.real, vals.imag, np.abs(vals)]
        header += [f"{name}_re", f"{name}_im", f"{name}_abs"]
    total = np.concatenate([s.total for s in snaps])
    cols.append(np.abs(total))
    header.append("total_abs")
    write_csv(out / "snapshots.csv", header, cols)

    v_plus, v0, v_minus = group_velocities(m)
    payload = {
        "command": "propagate",
        "config": cfg.name,
        "medium": _medium_summary(cfg),
        "times": cfg.times,
        "x_window": list(cfg.x_window),
        "modes": cfg.grid.count,
        "formula_velocity": {"e0": v0, "e_plus": v_plus, "e_minus": v_minus},
        "regime": split_regime(m).value,
    }
    if len(snaps) >= 3:
        track = track_velocities(snaps)
        payload["track"] = {
            "peak_positions": track.peak_positions,
            "fitted_velocity": track.fitted_velocity,
            "residual": track.residual,
        }
    else:
        payload["track"] = None
    if m.omega > 0:
        analytic = [synthesize_analytic(m, cfg.pulse, x, t) for t in cfg.times]
        payload["l2_discrepancy"] = path_discrepancy(snaps, analytic)
    else:
        payload["l2_discrepancy"] = None
    write_json(out / "track.json", payload)
    return payload


def _distribution(cfg: cfgmod.RunConfig) -> fl.NumberDistribution:
    d = cfg.distribution
    if d.kind == "single_mode":
        return fl.NumberDistribution.single_mode(cfg.medium.k0 if d.k is None else d.k, d.n_peak)
    return fl.NumberDistribution.gaussian(cfg.grid, cfg.pulse, d.n_peak)


def cmd_intensity(cfg: cfgmod.RunConfig, out: Path, threads: int = 1, seed: int = 0) -> dict:
    m = cfg.medium
    dist = _distribution(cfg)
    ic = cfg.intensity
    t = ic.times
    intensity = fl.mean_intensity(m, dist, t)
    write_csv(out / "intensity.csv", ["t", "mean_intensity"], [t, intensity])

    if ic.omega is not None:
        omega = ic.omega
    elif dist.k.size > 1:
        omega = np.linspace(m.c * dist.k.min(), m.c * dist.k.max(), 512)
    else:
        omega = m.c * dist.k[0] + np.linspace(-1.0, 1.0, 201)
    rows_t, rows_w, rows_s = [], [], []
    window = None
    bound = 0.0
    for ts in ic.spectrum_times:
        spec = fl.intensity_spectrum(m, dist, float(ts), omega, ic.window)
        window = spec.window
        bound = max(bound, spec.leakage_bound)
        rows_t.append(np.full(omega.size, ts))
        rows_w.append(omega)
        rows_s.append(spec.power)
    write_csv(out / "spectrum.csv", ["t", "omega", "power"], [np.concatenate(rows_t), np.concatenate(rows_w), np.concatenate(rows_s)])

    k_mod = m.k0 if dist.k.size > 1 else float(dist.k[0])
    payload = {
        "command": "intensity",
        "config": cfg.name,
        "medium": _medium_summary(cfg),
        "modes": int(dist.k.size),
        "mean_intensity_t0": float(fl.mean_intensity(m, dist, 0.0)),
        "asymptotic_intensity": fl.asymptotic_intensity(m, dist),
        "modulation_depth": fl.modulation_depth(intensity),
        "modulation_frequency": fl.modulation_frequency(m, k_mod),
        "spectrum_window": window,
        "leakage_bound": bound,
    }
    payload["intensity_period"] = None
    if dist.k.size == 1:
        try:
            payload["intensity_period"] = fl.intensity_period(t, intensity)
        except ValidationError:
            pass
    write_json(out / "intensity.json", payload)
    return payload


def cmd_memory(cfg: cfgmod.RunConfig, out: Path, threads: int = 1, seed: int = 0) -> dict:
    m = cfg.medium
    mc = cfg.memory
    reg = mem.encode(mc.value, mc.length)
    k = mem.mode_wavenumbers(m, mc.length, mc.mode_spacing)
    th_min = mem.theta_min(m, mc.length, mode_k=k)
    if th_min == 0:
        raise ValidationError("memory: coupling vanishes on a register mode")
    g_max = float(np.sqrt(np.max(m.g2N(k) * np.ones_like(k))))
    omega_start = mc.omega_start_over_g * g_max
    theta_max = math.hypot(g_max, omega_start)
    dt = None if mc.dt_theta is None else mc.dt_theta / theta_max

    def sweeps(duration_theta):
        dur = duration_theta / th_min
        return (
            mem.SweepProfile(omega_start, 0.0, dur, mc.shape, mc.rate),
            mem.SweepProfile(0.0, omega_start, dur, mc.shape, mc.rate),
        )

    write, read = sweeps(mc.duration_theta)
    stored, released = mem.round_trip(reg, m, write, read, dt, mode_k=k, record_points=mc.record_points)
    scan = []
    for dtheta in mc.durations_theta:
        w, _ = sweeps(dtheta)
        rep = mem.write_sweep(
            reg, m, w, dt, mode_k=k, start_in_dark_state=mc.start_in_dark_state, record_points=mc.record_points
        )
        scan.append(
            {
                "duration_theta": dtheta,
                "fidelity": rep.fidelity,
                "min_mode_fidelity": min(rep.mode_fidelity, default=1.0),
                "leakage_a": rep.leakage_a,
            }
        )
    fids = [s["min_mode_fidelity"] for s in scan]
    payload = {
        "command": "memory",
        "config": cfg.name,
        "medium": _medium_summary(cfg),
        "value": mc.value,
        "bits": list(reg.bits),
        "decoded": mem.decode(reg),
        "theta_min": th_min,
        "omega_start": omega_start,
        "shape": mc.shape,
        "duration_theta": mc.duration_theta,
        "write": stored.summary(),
        "read": released.summary(),
        "round_trip_fidelity": released.fidelity,
        "round_trip_mode_fidelity": released.mode_fidelity,
        "duration_scan": scan,
        "monotone": bool(all(b >= a for a, b in zip(fids, fids[1:]))),
    }
    if stored.times.size:
        pops = stored.populations
        cols = [stored.times]
        header = ["t"]
        for j, idx in enumerate(stored.mode_index):
            for s, name in enumerate(("a", "A", "C")):
                cols.append(pops[:, j, s])
                header.append(f"bit{idx}_{name}")
        write_csv(out / "write_populations.csv", header, cols)
    write_json(out / "memory.json", payload)
    return payload


def cmd_verify(cfg: cfgmod.RunConfig, out: Path, threads: int = 1, seed: int = 0) -> dict:
    fc = cfg.fock
    space = fock.FockSpace(fc.modes, fc.cutoff)
    g = (
        fock.default_couplings(cfg.medium, fc.modes, fc.mode_spacing)
        if fc.per_mode_g is None
        else np.asarray(fc.per_mode_g, dtype=float)
    )
    omega = cfg.medium.omega if fc.omega is None else fc.omega
    rng = np.random.default_rng(seed)
    comms = fock.check_commutators(space, omega, g, fc.tolerance)
    spectrum = fock.verify_spectrum(space, omega, g, fc.tolerance)
    sub = fock.verify_subdynamics(space, omega, g, rng, fc.tolerance)
    oracle = None
    if np.any(g > 0) or omega > 0:
        small = fock.FockSpace(fc.modes, 1)
        amps = rng.normal(size=(fc.modes, 3)) + 1j * rng.normal(size=(fc.modes, 3))
        amps /= np.linalg.norm(amps)
        oracle = fock.single_excitation_evolution(small, omega, g, amps, fc.evolve_time)
    degeneracy = {}
    for cut in fc.degeneracy_cutoffs:
        sp = fock.FockSpace(fc.modes, cut)
        degeneracy[str(cut)] = sum(fock.zero_degeneracy(sp, omega, g).values())
    passed = (
        all(c.passed for c in comms)
        and spectrum.passed
        and all(r.passed for r in sub)
        and (oracle is None or oracle <= fc.tolerance)
    )
    payload = {
        "command": "verify",
        "config": cfg.name,
        "modes": fc.modes,
        "cutoff": fc.cutoff,
        "dim": space.dim,
        "omega": omega,
        "per_mode_g": g,
        "seed": seed,
        "commutators": [c.as_dict() for c in comms],
        "spectrum": spectrum.as_dict(),
        "subdynamics": [r.as_dict() for r in sub],
        "oracle_evolution_residual": oracle,
        "zero_degeneracy_by_cutoff": degeneracy,
        "passed": passed,
    }
    write_json(out / "verify.json", payload)
    return payload


COMMANDS = {
    "velocities": cmd_velocities,
    "propagate": cmd_propagate,
    "intensity": cmd_intensity,
    "memory": cmd_memory,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eitprop", description="Polariton propagation, intensity, memory and Fock checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help=f"TOML file or shipped name ({', '.join(cfgmod.SHIPPED)})")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (verify)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    warnings.simplefilter("default")
    try:
        if args.threads < 1:
            raise ValidationError(f"--threads must be >= 1, got {args.threads}")
        cfg = cfgmod.load(args.config)
        COMMANDS[args.command](cfg, Path(args.out), args.threads, args.seed)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("wrote %s output to %s", args.command, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
