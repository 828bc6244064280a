"""
Number-conserving fermionic sectors on bitmask bases.

Site j (1-based) is bit j - 1. Creation and annihilation operators pick up
(-1) to the number of occupied modes below them, so every sign in this
module follows the site ordering.
"""
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Sequence, Tuple

import numpy as np

from utils.chain_functions import Hamiltonian, SymmetryPermutation, hamiltonian_matrix
from utils.errors import CapacityError, ValidationError
from utils.packet_functions import NORM_TOLERANCE, WavePacket

MAX_MODES = 14


@dataclass(frozen=True)
class FockBasis:
    n_modes: int
    particle_number: int
    states: Tuple[int, ...]

    @cached_property
    def index(self) -> Dict[int, int]:
        return {state: i for i, state in enumerate(self.states)}

    @property
    def size(self) -> int:
        return len(self.states)

    def occupations(self, state: int) -> str:
        """Occupation string n_1 n_2 ... n_N."""
        return "".join(str((state >> q) & 1) for q in range(self.n_modes))


@dataclass(frozen=True, eq=False)
class FockState:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != self.basis.size:
            raise ValidationError(f"expected {self.basis.size} amplitudes, got {amplitudes.size}")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"Fock state is not normalized (norm^2 = {norm:.12g})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes


def _check_capacity(n_modes: int):
    if n_modes > MAX_MODES:
        raise CapacityError(f"Fock sectors are capped at {MAX_MODES} modes, got {n_modes}")


def enumerate_sector(n_modes: int, particle_number: int) -> FockBasis:
    """
    All occupation bitmasks with particle_number bits set, ascending.

    Raises:
        CapacityError: If n_modes exceeds the cap
        ValidationError: If particle_number is outside 0..n_modes
    """
    _check_capacity(n_modes)
    if not 0 <= particle_number <= n_modes:
        raise ValidationError(f"particle number {particle_number} outside 0..{n_modes}")
    states = sorted(
        sum(1 << q for q in modes) for modes in itertools.combinations(range(n_modes), particle_number)
    )
    return FockBasis(n_modes, particle_number, tuple(states))


def fock_state(basis: FockBasis, amplitudes: Sequence[complex]) -> FockState:
    return FockState(basis, np.asarray(amplitudes, dtype=complex))


def basis_state(basis: FockBasis, sites: Sequence[int]) -> FockState:
    """Product state a_{s1}^dag ... |0> with the listed 1-based sites occupied."""
    mask = sum(1 << (site - 1) for site in set(sites))
    if mask not in basis.index:
        raise ValidationError(f"occupation {sorted(sites)} is not in the sector")
    amplitudes = np.zeros(basis.size, dtype=complex)
    amplitudes[basis.index[mask]] = 1.0
    return FockState(basis, amplitudes)


def embed_single_particle(psi: WavePacket) -> FockState:
    """The p = 1 sector is ordered by site, so amplitudes carry over unchanged."""
    return FockState(enumerate_sector(psi.n_sites, 1), psi.amplitudes)


# =============================================================================
# FERMIONIC OPERATORS
# =============================================================================


def _below(state: int, q: int) -> int:
    return bin(state & ((1 << q) - 1)).count("1")


def apply_hop(state: int, i: int, j: int) -> Tuple[int, int]:
    """
    a_i^dag a_j on a bitmask (0-based modes).

    Returns:
        (new_state, sign), sign = 0 when the term annihilates the state
    """
    if i == j:
        return (state, 1) if (state >> j) & 1 else (state, 0)
    if not (state >> j) & 1 or (state >> i) & 1:
        return state, 0
    sign = (-1) ** _below(state, j)
    state ^= 1 << j
    sign *= (-1) ** _below(state, i)
    return state | (1 << i), sign


def correlator(state: FockState, j: int, l: int) -> complex:
    """<a_j^dag a_l> for 1-based sites."""
    n = state.n_modes
    if not (1 <= j <= n and 1 <= l <= n):
        raise ValidationError(f"sites ({j}, {l}) outside 1..{n}")
    index = state.basis.index
    amplitudes = state.amplitudes
    total = 0j
    for k, mask in enumerate(state.basis.states):
        target, sign = apply_hop(mask, j - 1, l - 1)
        if sign:
            total += sign * np.conj(amplitudes[index[target]]) * amplitudes[k]
    return complex(total)


def occupation_matrix(state: FockState) -> np.ndarray:
    """Boolean (basis size x N) table of occupied modes."""
    masks = np.asarray(state.basis.states, dtype=np.int64)
    return ((masks[:, None] >> np.arange(state.n_modes)) & 1).astype(bool)


def sector_hamiltonian(h: Hamiltonian, basis: FockBasis) -> np.ndarray:
    """
    <s'|H|s> for H = sum_{i != j} J_ij a_i^dag a_j restricted to the sector.

    Args:
        h: Single-particle hopping Hamiltonian
        basis: Sector basis

    Returns:
        Dense Hermitian matrix of the basis size
    """
    if h.n_sites != basis.n_modes:
        raise ValidationError(f"Hamiltonian has {h.n_sites} sites, basis {basis.n_modes} modes")
    hopping = hamiltonian_matrix(h)
    matrix = np.zeros((basis.size, basis.size), dtype=hopping.dtype)
    links = [(i, j) for i, j in zip(*np.nonzero(hopping)) if i != j]
    for col, mask in enumerate(basis.states):
        for i, j in links:
            target, sign = apply_hop(mask, i, j)
            if sign:
                matrix[basis.index[target], col] += sign * hopping[i, j]
    return matrix


def symmetry_sector_matrix(s: SymmetryPermutation, basis: FockBasis) -> np.ndarray:
    """Representation of a_j^dag -> phase a_{S(j)}^dag on the sector."""
    if s.n_sites != basis.n_modes:
        raise ValidationError(f"symmetry has {s.n_sites} sites, basis {basis.n_modes} modes")
    partners = s.index_array()
    matrix = np.zeros((basis.size, basis.size), dtype=complex)
    for col, mask in enumerate(basis.states):
        images = [int(partners[q]) for q in range(basis.n_modes) if (mask >> q) & 1]
        inversions = sum(1 for a, b in itertools.combinations(images, 2) if a > b)
        target = sum(1 << q for q in images)
        matrix[basis.index[target], col] = (-1) ** inversions * s.parity_phase ** len(images)
    return matrix


# =============================================================================
# EVOLUTION
# =============================================================================


def evolve_fock_series(h: Hamiltonian, state: FockState, times: Sequence[float]) -> list:
    """States U(t) |state> for every t, diagonalizing the sector once."""
    _check_capacity(state.n_modes)
    energies, vectors = np.linalg.eigh(sector_hamiltonian(h, state.basis))
    coefficients = vectors.conj().T @ state.amplitudes
    evolved = []
    for t in times:
        amplitudes = vectors @ (np.exp(-1j * energies * t) * coefficients)
        norm = np.sqrt(np.vdot(amplitudes, amplitudes).real)
        evolved.append(FockState(state.basis, amplitudes / norm))
    return evolved


def evolve_fock(h: Hamiltonian, state: FockState, t: float) -> FockState:
    """
    Spectral evolution inside the particle-number sector.

    Raises:
        CapacityError: Past the mode cap
    """
    return evolve_fock_series(h, state, [t])[0]
