import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from utils.chain_functions import (
    DenseHamiltonian,
    Hamiltonian,
    SymmetryPermutation,
    hamiltonian_matrix,
)
from utils.errors import NumericalFailure, ValidationError
from utils.packet_functions import NORM_TOLERANCE, WavePacket

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

SOLVER_CONFIG = {
    "max_sweeps": 60,  # implicit QL iterations allowed per eigenvalue
    "degeneracy_gap": 1e-9,  # relative to max |eps|
    "sign_threshold": 1e-12,  # smallest component treated as nonzero
}

Parity = Optional[int]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues, eigenvectors as columns of W, optional parity labels."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    parities: Tuple[Parity, ...] = ()

    @property
    def n_sites(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True, eq=False)
class PropagatorMatrix:
    entries: np.ndarray
    time: float


# =============================================================================
# EIGENSOLVER
# =============================================================================


def _tridiagonal_ql(diagonal: np.ndarray, off_diagonal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Implicit-shift QL iteration for a real symmetric tridiagonal matrix.

    Args:
        diagonal: Diagonal entries (length N)
        off_diagonal: Entries (j, j+1) (length N - 1)

    Returns:
        (eigenvalues unsorted, eigenvector matrix with vectors as rows)

    Raises:
        NumericalFailure: If an eigenvalue does not converge in the sweep budget
    """
    n = diagonal.size
    d = diagonal.astype(float).copy()
    e = np.zeros(n)
    e[: n - 1] = off_diagonal
    # Rows of z are accumulated eigenvectors; row updates keep memory contiguous.
    z = np.eye(n)
    eps = np.finfo(float).eps

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if sweeps == SOLVER_CONFIG["max_sweeps"]:
                residual = float(np.max(np.abs(e[: n - 1])))
                raise NumericalFailure(f"QL iteration did not converge for eigenvalue {l + 1}", residual)
            sweeps += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b

                upper = z[i + 1].copy()
                z[i + 1] = s * z[i] + c * upper
                z[i] = c * z[i] - s * upper
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """First nonzero component of every column made real and positive."""
    vectors = vectors.copy()
    threshold = SOLVER_CONFIG["sign_threshold"]
    for col in range(vectors.shape[1]):
        column = vectors[:, col]
        nonzero = np.flatnonzero(np.abs(column) > threshold)
        if nonzero.size == 0:
            continue
        pivot = column[nonzero[0]]
        vectors[:, col] = column * (abs(pivot) / pivot)
    if np.iscomplexobj(vectors) and np.max(np.abs(vectors.imag)) == 0.0:
        vectors = vectors.real
    return vectors


def diagonalize(h: Hamiltonian) -> SpectralDecomposition:
    """
    Eigen-decomposition H = W diag(eps) W^dag with ascending eps.

    Tridiagonal chains go through the in-repo QL solver; dense hopping
    matrices (general symmetries, Fock sectors) through numpy.linalg.eigh.

    Raises:
        NumericalFailure: If the QL iteration does not converge
    """
    if isinstance(h, DenseHamiltonian):
        eigenvalues, vectors = np.linalg.eigh(h.matrix)
    else:
        n = h.n_sites
        values, rows = _tridiagonal_ql(np.zeros(n), h.couplings.as_array())
        order = np.argsort(values, kind="stable")
        eigenvalues = values[order]
        vectors = rows[order].T
    vectors = _fix_signs(vectors)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    eigenvalues.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(eigenvalues, vectors)


def eigen_residual(h: Hamiltonian, decomp: SpectralDecomposition) -> float:
    """max |H W - W diag(eps)|."""
    matrix = hamiltonian_matrix(h)
    w = decomp.eigenvectors
    return float(np.max(np.abs(matrix @ w - w * decomp.eigenvalues)))


# =============================================================================
# PROPAGATOR
# =============================================================================


def propagator(decomp: SpectralDecomposition, t: float) -> PropagatorMatrix:
    """U(t) = W diag(exp(-i eps t)) W^dag."""
    w = decomp.eigenvectors
    phases = np.exp(-1j * decomp.eigenvalues * t)
    return PropagatorMatrix((w * phases) @ w.conj().T, float(t))


def evolve(decomp: SpectralDecomposition, psi0: WavePacket, t: float) -> WavePacket:
    """
    psi(t) = U(t) psi0, applied in the eigenbasis.

    Raises:
        ValidationError: If psi0 has the wrong length
    """
    if psi0.n_sites != decomp.n_sites:
        raise ValidationError(f"packet has {psi0.n_sites} sites, Hamiltonian {decomp.n_sites}")
    w = decomp.eigenvectors
    coefficients = w.conj().T @ psi0.amplitudes
    evolved = w @ (np.exp(-1j * decomp.eigenvalues * t) * coefficients)
    # Roundoff drift is renormalized; a real loss means a broken decomposition.
    norm = np.sqrt(np.vdot(evolved, evolved).real)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ValidationError(f"evolution lost normalization ({norm:.3e})")
    return WavePacket(evolved / norm)


def half_time_deviation(decomp: SpectralDecomposition, tau: float, t: float) -> float:
    """max |U^dag(t) U(tau) - U(t)|; vanishes at t = tau / 2."""
    u_t = propagator(decomp, t).entries
    u_tau = propagator(decomp, tau).entries
    return float(np.max(np.abs(u_t.conj().T @ u_tau - u_t)))


# =============================================================================
# PARITY
# =============================================================================


def _degenerate_groups(eigenvalues: np.ndarray) -> List[List[int]]:
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    gap = SOLVER_CONFIG["degeneracy_gap"] * scale
    groups = [[0]]
    for n in range(1, eigenvalues.size):
        if eigenvalues[n] - eigenvalues[n - 1] < gap:
            groups[-1].append(n)
        else:
            groups.append([n])
    return groups


def with_parities(decomp: SpectralDecomposition, s: SymmetryPermutation,
                  tol: float = 1e-8) -> SpectralDecomposition:
    """
    Copy of decomp whose degenerate blocks are rotated into eigenvectors
    of S and whose parity labels are filled in.
    """
    if s.n_sites != decomp.n_sites:
        raise ValidationError(f"symmetry has {s.n_sites} sites, spectrum {decomp.n_sites}")
    vectors = np.array(decomp.eigenvectors)
    for group in _degenerate_groups(decomp.eigenvalues):
        if len(group) < 2:
            continue
        block = vectors[:, group]
        overlap = block.conj().T @ s.apply(block)
        _, rotation = np.linalg.eigh(0.5 * (overlap + overlap.conj().T))
        vectors[:, group] = block @ rotation
    vectors = _fix_signs(vectors)

    labels: List[Parity] = []
    for col in range(vectors.shape[1]):
        v = vectors[:, col]
        mirrored = s.apply(v)
        if np.max(np.abs(mirrored - v)) <= tol:
            labels.append(1)
        elif np.max(np.abs(mirrored + v)) <= tol:
            labels.append(-1)
        else:
            labels.append(None)
    vectors.setflags(write=False)
    return replace(decomp, eigenvectors=vectors, parities=tuple(labels))


def parity_labels(decomp: SpectralDecomposition, s: SymmetryPermutation, tol: float = 1e-8) -> List[Parity]:
    """Parity (+1, -1 or None) of each eigenvector under S, ascending energy."""
    return list(with_parities(decomp, s, tol).parities)
