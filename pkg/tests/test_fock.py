import math

import numpy as np
import pytest

from eitprop.dynamics import evolution_matrix
from eitprop.errors import ValidationError
from eitprop.fock import (
    FockSpace,
    build_hamiltonian,
    check_commutators,
    expand_commutator,
    ladder_state,
    polariton_ops,
    predicted_block_spectrum,
    single_excitation_evolution,
    verify_spectrum,
    verify_subdynamics,
    zero_degeneracy,
    _mixes,
)
from eitprop.model import MediumParams, ModeMixing


@pytest.fixture(scope="module")
def one_mode():
    return FockSpace(1, 3)


@pytest.fixture(scope="module")
def medium345():
    # g sqrt(N) = 3 at k0, Omega = 4: Theta = 5
    return MediumParams(omega=4.0, coupling_g2N=9.0)


def single_block(space):
    idx = np.flatnonzero(space.totals.sum(axis=1) == 1)
    return idx


def test_dimension_and_cap():
    assert FockSpace(2, 2).dim == 3**6
    with pytest.raises(ValidationError, match="exceeds"):
        FockSpace(3, 3)
    with pytest.raises(ValidationError):
        FockSpace(0, 2)


def test_vanishing_couplings_give_zero_hamiltonian():
    space = FockSpace(2, 1)
    h = build_hamiltonian(space, 0.0, [0.0, 0.0])
    assert h.nnz == 0 or np.abs(h.toarray()).max() == 0.0
    assert verify_spectrum(space, 0.0, [0.0, 0.0]).passed


def test_single_excitation_block_is_mode_generator():
    space = FockSpace(1, 1)
    g, w = 1.7, 0.6
    h = build_hamiltonian(space, w, [g]).toarray()
    order = [space.index([[1, 0, 0]]), space.index([[0, 1, 0]]), space.index([[0, 0, 1]])]
    block = h[np.ix_(order, order)]
    np.testing.assert_allclose(block, 1j * evolution_matrix(ModeMixing.from_couplings(g, w)), atol=1e-15)


def test_single_excitation_eigenvalues_345(one_mode):
    h = build_hamiltonian(one_mode, 4.0, [3.0]).toarray()
    idx = single_block(one_mode)
    np.testing.assert_allclose(np.linalg.eigvalsh(h[np.ix_(idx, idx)]), [-5.0, 0.0, 5.0], atol=1e-13)


def test_dark_ladder_has_zero_energy(one_mode):
    mixes = [ModeMixing.from_couplings(3.0, 4.0)]
    h = build_hamiltonian(one_mode, 4.0, [3.0])
    for n in range(4):
        vec = ladder_state(one_mode, mixes, [0], [0], [n])
        assert np.linalg.norm(h @ vec) < 1e-12
    up = ladder_state(one_mode, mixes, [1], [0], [0])
    assert np.linalg.norm(h @ up - 5.0 * up) < 1e-12


def test_two_mode_ladder_energy():
    space = FockSpace(2, 2)
    g = [1.0, 2.0]
    mixes = _mixes(0.5, g)
    h = build_hamiltonian(space, 0.5, g)
    vec = ladder_state(space, mixes, [1, 0], [0, 1], [0, 0])
    energy = mixes[0].big_theta - mixes[1].big_theta
    assert np.linalg.norm(h @ vec - energy * vec) < 1e-12


def test_adjoint_pairs_and_hermiticity():
    space = FockSpace(2, 2)
    g = [0.8, 1.3]
    h = build_hamiltonian(space, 0.9, g)
    assert abs(h - h.conj().T).max() < 1e-13
    for k in range(2):
        for s in ("a", "A", "C"):
            op = space.op(s, k).toarray()
            # <m|a|n> = sqrt(n) delta_{m, n-1}: the creation operator is its transpose
            assert np.all(op >= 0)
            assert op.max() == pytest.approx(math.sqrt(space.cutoff), abs=1e-14)
    mix = ModeMixing.from_couplings(g[0], 0.9)
    ops = polariton_ops(space, mix, 0)
    d = ops["D"]
    dd = (d @ d.conj().T - d.conj().T @ d).toarray()
    inner = space.interior(1)
    np.testing.assert_allclose(dd[np.ix_(inner, inner)], np.eye(inner.size), atol=1e-14)


@pytest.mark.parametrize("modes, cutoff", [(1, 3), (2, 2)])
def test_commutator_suite(medium345, modes, cutoff):
    checks = check_commutators(FockSpace(modes, cutoff), medium345)
    names = {c.name for c in checks}
    assert {"H hermitian", "[D_0, H] = 0", "[H, Q-_0^+] = -Theta Q-_0^+"} <= names
    for c in checks:
        assert c.passed, c.as_dict()
        assert 0.0 <= c.masked_fraction < 1.0


@pytest.mark.parametrize("modes, cutoff", [(1, 3), (2, 2)])
def test_spectrum_matches_polariton_prediction(medium345, modes, cutoff):
    rep = verify_spectrum(FockSpace(modes, cutoff), medium345)
    assert rep.passed, rep.as_dict()
    assert rep.blocks == (cutoff + 1) ** modes
    # one dark state per mode in the single-excitation sector
    assert rep.dark_single_excitation == modes
    assert rep.excluded_states > 0


def test_predicted_spectrum_counts():
    # N quanta in three ladders: (N + 1)(N + 2) / 2 states
    for n in range(4):
        assert predicted_block_spectrum([2.0], [n]).size == (n + 1) * (n + 2) // 2
    np.testing.assert_allclose(predicted_block_spectrum([5.0], [1]), [-5.0, 0.0, 5.0])


def test_zero_degeneracy_grows_with_cutoff(medium345):
    counts = [sum(zero_degeneracy(FockSpace(1, c), medium345).values()) for c in (1, 2, 3)]
    assert counts[0] < counts[1] < counts[2]


def test_subdynamics_closes_on_boson_algebra(medium345):
    space = FockSpace(1, 2)
    results = verify_subdynamics(space, medium345, rng=np.random.default_rng(3))
    assert all(r.passed for r in results)
    by_name = {r.name: r for r in results}
    g = math.sqrt(9.0)
    coef = by_name["a_0"].coefficients
    assert coef["A_0"] == pytest.approx(g, abs=1e-12)
    coef = by_name["C_0"].coefficients
    assert coef["A_0"] == pytest.approx(4.0, abs=1e-12)
    assert abs(coef["a_0"]) < 1e-12


def test_expansion_flags_non_linear_operator(medium345):
    # needs two-quantum interior states, where a^+ a a acts non-trivially
    space = FockSpace(1, 3)
    h = build_hamiltonian(space, medium345.omega, [3.0])
    a = space.op("a", 0)
    res = expand_commutator(space, h, (a.conj().T @ a @ a).tocsr(), "a+aa")
    assert not res.passed


def test_fock_evolution_agrees_with_mode_solution(rng):
    space = FockSpace(2, 2)
    amps = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    amps /= np.linalg.norm(amps)
    assert single_excitation_evolution(space, 0.7, [1.0, 1.6], amps, 7.0) < 1e-10


def test_per_mode_g_shape_validated(medium345):
    with pytest.raises(ValidationError):
        build_hamiltonian(FockSpace(2, 1), 1.0, [1.0])
    with pytest.raises(ValidationError):
        verify_spectrum(FockSpace(1, 1), 1.0)
