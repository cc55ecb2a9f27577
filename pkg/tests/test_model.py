import math

import numpy as np
import pytest
import scipy.sparse as sparse

import blockade as bl
from conftest import random_hermitian
from oracles import expm_propagate


def test_coupling_phase_relation():
    p = bl.SystemParams(g=4.0, phi_z=0.0)
    assert p.g1 == 4.0 and p.g2 == 4.0
    assert bl.SystemParams(g=4.0, phi_z=math.pi).g2 == -4.0
    assert bl.SystemParams(g=4.0, phi_z=math.pi / 2).g2 == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kwargs", [
    {"g": -1.0},
    {"g": 1.0, "eta": -0.5},
    {"g": 1.0, "gamma": -2.0},
    {"g": 1.0, "kappa": 2.0},
    {"g": float("nan")},
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        bl.SystemParams(**kwargs)


def test_at_detuning_sets_both():
    p = bl.SystemParams(g=1.0).at_detuning(-3.5)
    assert p.delta_a == -3.5 and p.delta_cav == -3.5


def test_diagonal_hamiltonian_entries(small_space):
    p = bl.SystemParams(g=0.0, eta=0.0, delta_a=0.7, delta_cav=-1.3)
    h = bl.build_hamiltonian(small_space, p).mat
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    for n in range(3):
        idx = bl.basis_index(small_space, n, 1, 0)  # |n; e, g>
        assert h[idx, idx].real == pytest.approx(0.7 + n * (-1.3), abs=1e-14)


def test_one_excitation_splitting():
    # single-excitation eigenvalues -sqrt(2) g, 0, +sqrt(2) g at zero detuning
    g = 15.0
    space = bl.make_space(3)
    p = bl.SystemParams(g=g, phi_z=0.0, eta=0.0)
    h = bl.build_hamiltonian(space, p).mat
    idx = [
        bl.basis_index(space, 1, 0, 0),
        bl.basis_index(space, 0, 1, 0),
        bl.basis_index(space, 0, 0, 1),
    ]
    sub = h[np.ix_(idx, idx)]
    values = np.sort(np.linalg.eigvalsh(sub))
    assert np.allclose(values, [-math.sqrt(2) * g, 0.0, math.sqrt(2) * g], atol=1e-10)


def test_out_of_phase_coupling_sign(small_space):
    p = bl.SystemParams(g=2.0, phi_z=math.pi)
    h = bl.build_hamiltonian(small_space, p).mat
    row = bl.basis_index(small_space, 0, 0, 1)  # |0; g, e>
    col = bl.basis_index(small_space, 1, 0, 0)  # |1; g, g>
    assert h[row, col].real == pytest.approx(-2.0)
    row1 = bl.basis_index(small_space, 0, 1, 0)
    assert h[row1, col].real == pytest.approx(2.0)


def test_hamiltonian_hermitian_for_random_params(small_space, rng):
    for _ in range(20):
        p = bl.SystemParams(
            g=float(rng.uniform(0, 20)),
            phi_z=float(rng.uniform(-math.pi, math.pi)),
            eta=float(rng.uniform(0, 5)),
            delta_a=float(rng.uniform(-30, 30)),
            delta_cav=float(rng.uniform(-30, 30)),
            gamma=float(rng.uniform(0, 3)),
        )
        h = bl.build_hamiltonian(small_space, p).mat
        assert np.abs(h - h.conj().T).max() <= 1e-12


def test_liouvillian_rejects_non_hermitian(small_space):
    p = bl.SystemParams(g=1.0)
    bad = bl.Operator(small_space, np.triu(np.ones((small_space.dim,) * 2)))
    with pytest.raises(ValueError, match="Hermitian"):
        bl.build_liouvillian(bad, p)


@pytest.fixture(scope="module")
def toy_liouvillian():
    space = bl.make_space(2)
    p = bl.SystemParams(g=3.0, phi_z=0.4, eta=0.7, delta_a=1.2, delta_cav=-0.8, gamma=0.6)
    return space, bl.build_liouvillian(bl.build_hamiltonian(space, p), p)


def test_generator_annihilates_trace(toy_liouvillian, rng):
    space, lv = toy_liouvillian
    for _ in range(100):
        rho = random_hermitian(space.dim, rng)
        assert abs(np.trace(lv.apply(rho))) <= 1e-10


def test_generator_preserves_hermiticity(toy_liouvillian, rng):
    space, lv = toy_liouvillian
    for _ in range(25):
        out = lv.apply(random_hermitian(space.dim, rng))
        assert np.abs(out - out.conj().T).max() <= 1e-10


def test_generator_has_zero_mode(toy_liouvillian):
    _, lv = toy_liouvillian
    values = np.linalg.eigvals(np.asarray(lv.matrix.todense()))
    assert np.abs(values).min() <= 1e-8


def test_photon_decay_rate_convention():
    # with no Hamiltonian and no atomic decay, <a+a>(t) = exp(-2 kappa t)
    space = bl.make_space(2)
    p = bl.SystemParams(g=0.0, eta=0.0, gamma=0.0)
    lv = bl.build_liouvillian(bl.build_hamiltonian(space, p), p)
    rho0 = bl.pure_state(space, 1, 0, 0)
    n_op = bl.number_operator(space)
    for t in (0.3, 1.0, 2.5):
        rho_t = expm_propagate(lv.matrix, rho0.mat, t)
        measured = np.einsum("ij,ji->", n_op.mat, rho_t).real
        assert measured == pytest.approx(math.exp(-2.0 * t), rel=1e-10)


def test_vectorization_convention(rng):
    dim = 6
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    direct = bl.vectorize(a @ rho @ b)
    via_kron = sparse.kron(b.T, a) @ bl.vectorize(rho)
    assert np.allclose(direct, via_kron, atol=1e-12)
    assert np.array_equal(bl.unvectorize(bl.vectorize(rho), dim), rho)


def test_liouvillian_apply_matches_matrix_form(toy_liouvillian, rng):
    space, lv = toy_liouvillian
    rho = random_hermitian(space.dim, rng)
    via_matrix = bl.unvectorize(lv.matrix @ bl.vectorize(rho), space.dim)
    assert np.allclose(lv.apply(rho), via_matrix, atol=1e-14)
