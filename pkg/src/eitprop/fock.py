"""Brute-force check of the bosonized model on a truncated multimode Fock space.

Each mode carries three boson species (a, A, C), each capped at ``cutoff``
quanta. Truncated operator algebra is exact only away from the cap, so every
identity is tested on "interior" basis states whose per-mode excitation totals
leave room for the operators involved; the masked fraction is reported.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .dynamics import ModeState, evolve_exact
from .errors import ValidationError
from .model import MediumParams, ModeMixing

SPECIES = ("a", "A", "C")
MAX_DIM = 10_000
DENSE_LIMIT = 2000


@dataclass
class FockSpace:
    modes: int
    cutoff: int

    def __post_init__(self) -> None:
        if self.modes < 1 or self.cutoff < 1:
            raise ValidationError("modes and cutoff must be >= 1")
        if self.dim > MAX_DIM:
            raise ValidationError(f"Fock dimension {self.dim} exceeds {MAX_DIM}")
        levels = self.cutoff + 1
        occ = np.array(list(itertools.product(range(levels), repeat=3 * self.modes)), dtype=int)
        self.occupations = occ.reshape(-1, self.modes, 3)
        self.totals = self.occupations.sum(axis=2)
        low = sparse.diags(np.sqrt(np.arange(1, levels, dtype=float)), 1, format="csr")
        eye = sparse.identity(levels, format="csr")
        self._ops = {}
        for k in range(self.modes):
            for s, name in enumerate(SPECIES):
                slot = 3 * k + s
                factors = [low if i == slot else eye for i in range(3 * self.modes)]
                op = factors[0]
                for fac in factors[1:]:
                    op = sparse.kron(op, fac, format="csr")
                self._ops[name, k] = op

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** (3 * self.modes)

    def op(self, species: str, k: int):
        """Annihilation operator of ``species`` in mode ``k``."""
        return self._ops[species, k]

    def identity(self):
        return sparse.identity(self.dim, format="csr", dtype=complex)

    def interior(self, degree: int) -> np.ndarray:
        """Basis indices whose per-mode totals are all ``<= cutoff - degree``."""
        return np.flatnonzero(np.all(self.totals <= self.cutoff - degree, axis=1))

    def index(self, occupation) -> int:
        flat = np.asarray(occupation, dtype=int).ravel()
        idx = 0
        for n in flat:
            idx = idx * (self.cutoff + 1) + int(n)
        return idx

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


def _drive(params) -> float:
    """Drive from a :class:`MediumParams` or a bare number (allows the trivial g = Omega = 0 case)."""
    return float(params.omega if isinstance(params, MediumParams) else params)


def _dag(m):
    return m.conj().T.tocsr()


def _comm(x, y):
    return (x @ y - y @ x).tocsr()


def build_hamiltonian(space: FockSpace, params: MediumParams | float, per_mode_g) -> sparse.csr_matrix:
    """``sum_k g_k (a_k A_k^+ + h.c.) + Omega (A_k^+ C_k + h.c.)``.

    ``per_mode_g`` holds the collective couplings ``g_k sqrt(N)``.
    """
    omega = _drive(params)
    g = np.asarray(per_mode_g, dtype=float)
    if g.shape != (space.modes,):
        raise ValidationError(f"per_mode_g must have length {space.modes}")
    h = sparse.csr_matrix((space.dim, space.dim), dtype=complex)
    for k in range(space.modes):
        a, ex_a, ex_c = (space.op(s, k) for s in SPECIES)
        h = h + g[k] * (a @ _dag(ex_a) + _dag(a) @ ex_a) + omega * (_dag(ex_a) @ ex_c + _dag(ex_c) @ ex_a)
    return h.tocsr()


def default_couplings(params: MediumParams, modes: int, spacing: float = 0.25) -> np.ndarray:
    """``g_k sqrt(N)`` on ``modes`` wave numbers ``k0 (1 + spacing j)``."""
    k = params.k0 * (1.0 + spacing * np.arange(modes))
    return np.sqrt(np.asarray(params.g2N(k), dtype=float) * np.ones(modes))


def _mixes(params, g) -> list[ModeMixing | None]:
    omega = _drive(params)
    return [None if gk == 0 and omega == 0 else ModeMixing.from_couplings(float(gk), omega) for gk in g]


def _couplings_for(space: FockSpace, params, per_mode_g) -> np.ndarray:
    if per_mode_g is None:
        if not isinstance(params, MediumParams):
            raise ValidationError("per_mode_g is required when params is a bare drive value")
        return default_couplings(params, space.modes)
    g = np.asarray(per_mode_g, dtype=float)
    if g.shape != (space.modes,):
        raise ValidationError(f"per_mode_g must have length {space.modes}")
    return g


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    masked_fraction: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "masked_fraction": self.masked_fraction,
            "passed": self.passed,
        }


def _residual(space: FockSpace, lhs, rhs, degree: int) -> tuple[float, float]:
    cols = space.interior(degree)
    if cols.size == 0:
        return 0.0, 1.0
    diff = (lhs - rhs).tocsc()[:, cols]
    res = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    return res, 1.0 - cols.size / space.dim


def polariton_ops(space: FockSpace, mix: ModeMixing, k: int) -> dict:
    """Annihilators D, B, Q+ and Q- of mode ``k``."""
    a, ex_a, ex_c = (space.op(s, k) for s in SPECIES)
    d = mix.cos * a - mix.sin * ex_c
    b = mix.sin * a + mix.cos * ex_c
    r = 1.0 / math.sqrt(2.0)
    return {"D": d.tocsr(), "B": b.tocsr(), "Q+": (r * (ex_a + b)).tocsr(), "Q-": (r * (ex_a - b)).tocsr()}


def check_commutators(space: FockSpace, params: MediumParams, per_mode_g=None, tol: float = 1e-10) -> list[Check]:
    """Boson algebra, Heisenberg commutators and the polariton ladder relations."""
    g = _couplings_for(space, params, per_mode_g)
    omega = _drive(params)
    h = build_hamiltonian(space, params, g)
    eye = space.identity()
    zero = sparse.csr_matrix((space.dim, space.dim), dtype=complex)
    checks: list[Check] = []

    def add(name, lhs, rhs, degree):
        res, masked = _residual(space, lhs, rhs, degree)
        checks.append(Check(name, res, tol, masked))

    for k, kp in itertools.product(range(space.modes), repeat=2):
        for s1, s2 in itertools.product(SPECIES, repeat=2):
            x, y = space.op(s1, k), space.op(s2, kp)
            delta = eye if (k == kp and s1 == s2) else zero
            add(f"[{s1}_{k}, {s2}_{kp}^+] = delta", _comm(x, _dag(y)), delta, 1)
            add(f"[{s1}_{k}, {s2}_{kp}] = 0", _comm(x, y), zero, 0)

    add("H hermitian", h, _dag(h), 0)
    for k in range(space.modes):
        a, ex_a, ex_c = (space.op(s, k) for s in SPECIES)
        add(f"[a_{k}, H] = g A_{k}", _comm(a, h), g[k] * ex_a, 1)
        add(f"[A_{k}, H] = g a_{k} + Omega C_{k}", _comm(ex_a, h), g[k] * a + omega * ex_c, 1)
        add(f"[C_{k}, H] = Omega A_{k}", _comm(ex_c, h), omega * ex_a, 1)
        number = _dag(a) @ a + _dag(ex_a) @ ex_a + _dag(ex_c) @ ex_c
        add(f"[N_{k}, H] = 0", _comm(number, h), zero, 0)

    for k, mix in enumerate(_mixes(params, g)):
        if mix is None:
            continue
        ops = polariton_ops(space, mix, k)
        d, b, qp, qm = ops["D"], ops["B"], ops["Q+"], ops["Q-"]
        ex_a_dag = _dag(space.op("A", k))
        big = mix.big_theta
        add(f"[D_{k}, H] = 0", _comm(d, h), zero, 1)
        add(f"[D_{k}, B_{k}] = 0", _comm(d, b), zero, 0)
        add(f"[D_{k}, D_{k}^+] = 1", _comm(d, _dag(d)), eye, 1)
        add(f"[H, B_{k}^+] = Theta A_{k}^+", _comm(h, _dag(b)), big * ex_a_dag, 1)
        add(f"[H, A_{k}^+] = Theta B_{k}^+", _comm(h, ex_a_dag), big * _dag(b), 1)
        add(f"[H, Q+_{k}^+] = +Theta Q+_{k}^+", _comm(h, _dag(qp)), big * _dag(qp), 1)
        add(f"[H, Q-_{k}^+] = -Theta Q-_{k}^+", _comm(h, _dag(qm)), -big * _dag(qm), 1)
        add(f"[H, Q+_{k}^+ Q-_{k}^+] = 0", _comm(h, (_dag(qp) @ _dag(qm)).tocsr()), zero, 2)
    return checks


def _sector_spectrum(theta: float, total: int) -> list[float]:
    return [(m - s) * theta for m in range(total + 1) for s in range(total + 1 - m)]


def predicted_block_spectrum(thetas, totals) -> np.ndarray:
    """Multiset ``{sum_k (m_k - s_k) Theta_k}`` over all ``m_k + s_k + n_k = N_k``."""
    values = [0.0]
    for th, n in zip(thetas, totals):
        values = [v + e for v in values for e in _sector_spectrum(th, int(n))]
    return np.sort(np.array(values))


@dataclass
class SpectrumReport:
    ladder_residual: float
    ladder_states: int
    excluded_states: int
    block_residual: float
    blocks: int
    symmetric_residual: float
    zero_modes: int
    dark_single_excitation: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.ladder_residual <= self.tolerance
            and self.block_residual <= self.tolerance
            and self.symmetric_residual <= self.tolerance
        )

    def as_dict(self) -> dict:
        return {
            "ladder_residual": self.ladder_residual,
            "ladder_states": self.ladder_states,
            "excluded_states": self.excluded_states,
            "block_residual": self.block_residual,
            "blocks": self.blocks,
            "symmetric_residual": self.symmetric_residual,
            "zero_modes": self.zero_modes,
            "dark_single_excitation": self.dark_single_excitation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def ladder_state(space: FockSpace, mixes, m, s, n, ops=None) -> np.ndarray:
    """Normalized ``prod_k Q+^{+m} Q-^{+s} D^{+n} |0>``."""
    if ops is None:
        ops = [polariton_ops(space, mix, k) for k, mix in enumerate(mixes)]
    vec = space.vacuum()
    for k in range(space.modes):
        for name, power in (("D", n[k]), ("Q-", s[k]), ("Q+", m[k])):
            raise_op = _dag(ops[k][name])
            for _ in range(power):
                vec = raise_op @ vec
    return vec / np.linalg.norm(vec)


def verify_spectrum(space: FockSpace, params: MediumParams, per_mode_g=None, tol: float = 1e-10) -> SpectrumReport:
    g = _couplings_for(space, params, per_mode_g)
    mixes = _mixes(params, g)
    h = build_hamiltonian(space, params, g)
    # a mode with g = Omega = 0 has no polaritons and contributes zero energy
    thetas = [0.0 if m is None else m.big_theta for m in mixes]
    ladders = all(m is not None for m in mixes)

    levels = range(space.cutoff + 1)
    inside = [t for t in itertools.product(levels, repeat=3) if sum(t) <= space.cutoff]
    # basis states whose block is cut by the truncation
    excluded = int(space.dim - space.interior(0).size)
    ops = [polariton_ops(space, mix, k) for k, mix in enumerate(mixes)] if ladders else []
    ladder_res = 0.0
    count = 0
    for combo in itertools.product(inside, repeat=space.modes) if ladders else ():
        m = [c[0] for c in combo]
        s = [c[1] for c in combo]
        n = [c[2] for c in combo]
        vec = ladder_state(space, mixes, m, s, n, ops)
        energy = sum((mk - sk) * th for mk, sk, th in zip(m, s, thetas))
        ladder_res = max(ladder_res, float(np.linalg.norm(h @ vec - energy * vec)))
        count += 1

    block_res = 0.0
    sym_res = 0.0
    zero_modes = 0
    blocks = 0
    for totals in itertools.product(range(space.cutoff + 1), repeat=space.modes):
        idx = np.flatnonzero(np.all(space.totals == np.array(totals), axis=1))
        block = h[idx][:, idx].toarray()
        if block.shape[0] > DENSE_LIMIT:
            raise ValidationError("block too large for dense diagonalization")
        evals = np.linalg.eigvalsh(block)
        predicted = predicted_block_spectrum(thetas, totals)
        block_res = max(block_res, float(np.max(np.abs(evals - predicted))))
        sym_res = max(sym_res, float(np.max(np.abs(evals + evals[::-1]))))
        zero_modes += int(np.sum(np.abs(evals) < 1e-9))
        blocks += 1

    single = np.flatnonzero(space.totals.sum(axis=1) == 1)
    # null-space dimension of the single-excitation block
    dark_single = int(single.size - np.linalg.matrix_rank(h[single][:, single].toarray(), tol=1e-9))
    return SpectrumReport(
        ladder_residual=ladder_res,
        ladder_states=count,
        excluded_states=excluded,
        block_residual=block_res,
        blocks=blocks,
        symmetric_residual=sym_res,
        zero_modes=zero_modes,
        dark_single_excitation=dark_single,
        tolerance=tol,
    )


def zero_degeneracy(space: FockSpace, params: MediumParams, per_mode_g=None) -> Counter:
    """Zero-eigenvalue multiplicity per per-mode-total block; grows with the cutoff."""
    g = _couplings_for(space, params, per_mode_g)
    h = build_hamiltonian(space, params, g)
    out: Counter = Counter()
    for totals in itertools.product(range(space.cutoff + 1), repeat=space.modes):
        idx = np.flatnonzero(np.all(space.totals == np.array(totals), axis=1))
        evals = np.linalg.eigvalsh(h[idx][:, idx].toarray())
        out[totals] = int(np.sum(np.abs(evals) < 1e-9))
    return out


@dataclass
class ExpansionResult:
    name: str
    coefficients: dict
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        coeffs = {k: [v.real, v.imag] for k, v in self.coefficients.items() if abs(v) > 1e-12}
        return {"name": self.name, "coefficients": coeffs, "residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}


def _generators(space: FockSpace) -> dict:
    gens = {}
    for k in range(space.modes):
        for s in SPECIES:
            op = space.op(s, k)
            gens[f"{s}_{k}"] = op
            gens[f"{s}_{k}^+"] = _dag(op)
    gens["1"] = space.identity()
    return gens


def _flatten(op, cols) -> sparse.csr_matrix:
    sub = op.tocsc()[:, cols].tocoo()
    return sparse.csr_matrix(
        (sub.data, (np.zeros(sub.nnz, dtype=int), sub.col * op.shape[0] + sub.row)), shape=(1, op.shape[0] * cols.size)
    )


def expand_commutator(space: FockSpace, h, x, name: str, tol: float = 1e-10) -> ExpansionResult:
    """Least-squares expansion of ``[x, H]`` in ``{a, A, C, adjoints, 1}`` on the interior."""
    cols = space.interior(1)
    gens = _generators(space)
    names = list(gens)
    # least squares over the union of nonzero entries only; every other row is 0 = 0
    flat = [_flatten(gens[n], cols) for n in names]
    tflat = _flatten(_comm(x, h), cols)
    support = np.unique(np.concatenate([f.indices for f in flat] + [tflat.indices]))
    basis = np.column_stack([f[:, support].toarray().ravel() for f in flat])
    target = tflat[:, support].toarray().ravel()
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    scale = max(1.0, float(np.linalg.norm(target)))
    residual = float(np.linalg.norm(basis @ coef - target)) / scale
    return ExpansionResult(name, dict(zip(names, coef)), residual, tol)


def verify_subdynamics(
    space: FockSpace, params: MediumParams, per_mode_g=None, rng: np.random.Generator | None = None, tol: float = 1e-10
) -> list[ExpansionResult]:
    """Check that commutators with H close on the (a, A, C) boson algebra."""
    g = _couplings_for(space, params, per_mode_g)
    h = build_hamiltonian(space, params, g)
    rng = np.random.default_rng(0) if rng is None else rng
    results = []
    gens = _generators(space)
    for name, op in gens.items():
        if name == "1":
            continue
        results.append(expand_commutator(space, h, op, name, tol))
    coeff = rng.normal(size=3 * space.modes) + 1j * rng.normal(size=3 * space.modes)
    combo = sum(c * space.op(s, k) for c, (k, s) in zip(coeff, itertools.product(range(space.modes), SPECIES)))
    results.append(expand_commutator(space, h, combo.tocsr(), "random polariton combination", tol))
    return results


def single_excitation_evolution(space: FockSpace, params: MediumParams, per_mode_g, amplitudes, t: float) -> float:
    """Max deviation between Fock-space ``exp(-iHt)`` and :func:`evolve_exact`.

    ``amplitudes`` has shape (modes, 3): coefficients of ``a_k^+|0>, A_k^+|0>, C_k^+|0>``.
    """
    g = np.asarray(per_mode_g, dtype=float)
    amps = np.asarray(amplitudes, dtype=complex)
    h = build_hamiltonian(space, params, g)
    vec = np.zeros(space.dim, dtype=complex)
    slots = {}
    for k in range(space.modes):
        for s in range(3):
            occ = np.zeros((space.modes, 3), dtype=int)
            occ[k, s] = 1
            slots[k, s] = space.index(occ)
            vec[slots[k, s]] = amps[k, s]
    out = expm_multiply(-1j * t * h.tocsc(), vec)
    worst = 0.0
    for k, mix in enumerate(_mixes(params, g)):
        ref = evolve_exact(ModeState.from_array(amps[k]), mix, t).as_array()
        got = np.array([out[slots[k, s]] for s in range(3)])
        worst = max(worst, float(np.max(np.abs(ref - got))))
    return worst
