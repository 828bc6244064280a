import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import chain_model
from utils.chain_functions import (
    ChainSpec,
    Custom,
    MlFamily,
    build_couplings,
    build_hamiltonian,
    dense_hamiltonian,
    hamiltonian_matrix,
    reflection_permutation,
    symmetry_from_pairs,
    uniform_couplings,
)
from utils.errors import NumericalFailure, ValidationError
from utils.packet_functions import WavePacket, localized_packet
from utils.spectral_functions import (
    SOLVER_CONFIG,
    diagonalize,
    eigen_residual,
    evolve,
    half_time_deviation,
    parity_labels,
    propagator,
    with_parities,
)


def test_christandl_eigenvalues(christandl4):
    _, decomp, _ = christandl4
    np.testing.assert_allclose(decomp.eigenvalues, [-3, -1, 1, 3], atol=1e-13)


def test_ml12_eigenvalues(ml12_4):
    _, decomp, _ = ml12_4
    np.testing.assert_allclose(decomp.eigenvalues, [-13 / 3, -7 / 3, 7 / 3, 13 / 3], atol=1e-13)


def test_two_site_chain():
    decomp = diagonalize(build_hamiltonian(uniform_couplings(2)))
    np.testing.assert_allclose(decomp.eigenvalues, [-1, 1], atol=1e-15)
    assert parity_labels(decomp, reflection_permutation(2)) == [-1, 1]


@pytest.mark.parametrize("n", [4, 16, 64, 200])
def test_eigenvectors_orthonormal_with_sign_convention(n):
    h, decomp, _ = chain_model(n, MlFamily(1, 1))
    w = decomp.eigenvectors
    np.testing.assert_allclose(w.T @ w, np.eye(n), atol=1e-12)
    assert eigen_residual(h, decomp) <= 1e-10 * max(1.0, np.max(np.abs(decomp.eigenvalues)))
    assert np.all(np.diff(decomp.eigenvalues) > 0)
    for col in range(n):
        column = w[:, col]
        assert column[np.flatnonzero(np.abs(column) > 1e-12)[0]] > 0


def test_eigensolver_agrees_with_numpy(rng):
    couplings = rng.uniform(0.2, 2.0, size=30)
    h = build_hamiltonian(build_couplings(ChainSpec(31, 1.0, Custom(tuple(couplings)))))
    decomp = diagonalize(h)
    np.testing.assert_allclose(decomp.eigenvalues, np.linalg.eigvalsh(hamiltonian_matrix(h)), atol=1e-12)


def test_dense_path(rng):
    block = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    matrix = block + block.conj().T
    np.fill_diagonal(matrix, 0.0)
    h = dense_hamiltonian(matrix)
    decomp = diagonalize(h)
    assert eigen_residual(h, decomp) <= 1e-12
    np.testing.assert_allclose(decomp.eigenvectors.conj().T @ decomp.eigenvectors, np.eye(6), atol=1e-12)


def test_sweep_budget_exhaustion(monkeypatch):
    monkeypatch.setitem(SOLVER_CONFIG, "max_sweeps", 0)
    with pytest.raises(NumericalFailure) as info:
        diagonalize(build_hamiltonian(uniform_couplings(6)))
    assert info.value.exit_code == 3
    assert info.value.residual > 0


def test_propagator_identity_at_zero(ml12_4):
    _, decomp, _ = ml12_4
    np.testing.assert_allclose(propagator(decomp, 0.0).entries, np.eye(4), atol=1e-14)


def test_propagator_christandl_transfer(christandl4):
    _, decomp, s = christandl4
    u = propagator(decomp, math.pi / 2).entries
    np.testing.assert_allclose(u, 1j * np.fliplr(np.eye(4)), atol=1e-12)


def test_propagator_two_sites():
    decomp = diagonalize(build_hamiltonian(uniform_couplings(2)))
    u = propagator(decomp, math.pi / 2).entries
    np.testing.assert_allclose(np.abs(u), [[0, 1], [1, 0]], atol=1e-15)


@seed(3)
@settings(max_examples=50, deadline=None)
@given(t1=st.floats(0, 30), t2=st.floats(0, 30))
def test_unitarity_and_group_law(t1, t2):
    _, decomp, _ = chain_model(8, MlFamily(1, 2))
    u1 = propagator(decomp, t1).entries
    u2 = propagator(decomp, t2).entries
    np.testing.assert_allclose(u1.conj().T @ u1, np.eye(8), atol=1e-10)
    np.testing.assert_allclose(u1 @ u2, propagator(decomp, t1 + t2).entries, atol=1e-9)


def test_evolve_closed_form(christandl4):
    _, decomp, _ = christandl4
    psi0 = localized_packet(4)
    at_tau = evolve(decomp, psi0, math.pi / 2)
    np.testing.assert_allclose(np.abs(at_tau.amplitudes), [0, 0, 0, 1], atol=1e-12)
    quarter = evolve(decomp, psi0, math.pi / 4)
    np.testing.assert_allclose(np.abs(quarter.amplitudes), np.array([1, math.sqrt(3), math.sqrt(3), 1]) / (2 * math.sqrt(2)),
                               atol=1e-12)
    np.testing.assert_allclose(evolve(decomp, psi0, 0.0).amplitudes, psi0.amplitudes, atol=1e-15)


@seed(11)
@settings(max_examples=40, deadline=None)
@given(
    real=arrays(np.float64, (6,), elements=st.floats(-1, 1)),
    imag=arrays(np.float64, (6,), elements=st.floats(-1, 1)),
    t=st.floats(0, 20),
)
def test_evolve_matches_propagator_and_keeps_norm(real, imag, t):
    values = real + 1j * imag
    if np.linalg.norm(values) < 1e-3:
        return
    psi0 = WavePacket(values / np.linalg.norm(values))
    _, decomp, _ = chain_model(6, MlFamily(2, 1))
    evolved = evolve(decomp, psi0, t)
    assert abs(np.linalg.norm(evolved.amplitudes) - 1) <= 1e-10
    np.testing.assert_allclose(evolved.amplitudes, propagator(decomp, t).entries @ psi0.amplitudes, atol=1e-12)


def test_evolve_dimension_mismatch(christandl4):
    _, decomp, _ = christandl4
    with pytest.raises(ValidationError):
        evolve(decomp, localized_packet(5), 1.0)


def test_half_time_identity(christandl4, ml12_4):
    _, decomp, _ = christandl4
    tau = math.pi / 2
    assert half_time_deviation(decomp, tau, tau / 2) <= 1e-9
    assert half_time_deviation(decomp, tau, tau / 3) > 1e-3
    _, decomp, _ = ml12_4
    assert half_time_deviation(decomp, 3 * math.pi / 2, 3 * math.pi / 4) <= 1e-9


@pytest.mark.parametrize("model", ["christandl4", "ml12_4"])
def test_parity_labels_alternate(model, request):
    _, decomp, s = request.getfixturevalue(model)
    assert parity_labels(decomp, s) == [-1, 1, -1, 1]


@pytest.mark.parametrize("n", [5, 9, 32])
def test_parity_labels_complete(n):
    _, decomp, s = chain_model(n)
    labels = parity_labels(decomp, s)
    assert None not in labels
    assert labels[-1] == 1


def test_degenerate_block_is_rotated_into_parity_states():
    # Two disconnected dimers: every level is doubly degenerate.
    matrix = np.zeros((4, 4))
    matrix[0, 1] = matrix[1, 0] = matrix[2, 3] = matrix[3, 2] = 1.0
    h = dense_hamiltonian(matrix)
    s = symmetry_from_pairs(4, [(1, 3), (2, 4)])
    labelled = with_parities(diagonalize(h), s)
    assert None not in labelled.parities
    assert sorted(labelled.parities) == [-1, -1, 1, 1]
    w = labelled.eigenvectors
    np.testing.assert_allclose(matrix @ w, w * labelled.eigenvalues, atol=1e-12)
