import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from utils.errors import ConfigurationError, ValidationError

# =============================================================================
# COUPLING FAMILIES
# =============================================================================


@dataclass(frozen=True)
class Christandl:
    """J_j = J0 * sqrt(j (N - j))."""

    @property
    def label(self) -> str:
        return "christandl"


@dataclass(frozen=True)
class KFamily:
    """Odd bonds shifted by theta_j * k with theta_j = 1 - (-1)^j."""

    k: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ConfigurationError("k must be a non-negative integer", "chain.k")

    @property
    def label(self) -> str:
        return f"k={self.k}"


@dataclass(frozen=True)
class MlFamily:
    """Odd bonds shifted by [1 - (-1)^j] * l / (2m + 1)."""

    m: int = 0
    l: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ConfigurationError("m must be a non-negative integer", "chain.m")
        if int(self.l) != self.l or self.l < 0:
            raise ConfigurationError("l must be a non-negative integer", "chain.l")

    @property
    def lowest_terms(self) -> bool:
        # Recorded only; the closed-form spectrum refuses reducible fractions.
        return self.l == 0 or math.gcd(self.l, 2 * self.m + 1) == 1

    @property
    def label(self) -> str:
        return f"m={self.m},l={self.l}"


@dataclass(frozen=True)
class Custom:
    """Caller-supplied couplings J_1..J_{N-1}."""

    values: Tuple[float, ...] = ()

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError("custom couplings must be finite reals", "chain.couplings")
        object.__setattr__(self, "values", values)

    @property
    def label(self) -> str:
        return "custom"


CouplingFamily = Union[Christandl, KFamily, MlFamily, Custom]


def family_shift(family: CouplingFamily) -> float:
    """Shift applied to odd bonds (zero for Christandl and Custom)."""
    if isinstance(family, KFamily):
        return 2.0 * family.k
    if isinstance(family, MlFamily):
        return 2.0 * family.l / (2 * family.m + 1)
    return 0.0


# =============================================================================
# CHAIN TYPES
# =============================================================================


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    j0: float = 1.0
    family: CouplingFamily = field(default_factory=Christandl)

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ConfigurationError("N must be an integer >= 2", "chain.n_sites")
        if not (math.isfinite(self.j0) and self.j0 > 0):
            raise ConfigurationError("j0 must be a positive real", "chain.j0")
        # A shifted family is only mirror symmetric when j and N - j share parity.
        if self.n_sites % 2 == 1 and family_shift(self.family) != 0.0:
            raise ConfigurationError(
                f"family {self.family.label} needs an even number of sites: with odd N the shifted "
                "couplings J_j and J_{N-j} differ, so the chain is not mirror symmetric", "chain.n_sites"
            )


@dataclass(frozen=True)
class CouplingSequence:
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 1:
            raise ConfigurationError("a chain needs at least one coupling", "chain.couplings")

    @property
    def n_sites(self) -> int:
        return len(self.values) + 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SymmetryPermutation:
    """Involutive site map; image is 1-based, image[j-1] is the partner of site j."""

    image: Tuple[int, ...]
    parity_phase: complex = 1.0

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        n = len(image)
        if sorted(image) != list(range(1, n + 1)):
            raise ValidationError("symmetry image must be a permutation of 1..N")
        if any(image[image[j] - 1] != j + 1 for j in range(n)):
            raise ValidationError("symmetry map must be an involution")
        if abs(abs(self.parity_phase) - 1.0) > 1e-12:
            raise ValidationError("parity phase must have unit modulus")
        object.__setattr__(self, "image", image)

    @property
    def n_sites(self) -> int:
        return len(self.image)

    @property
    def fixed_points(self) -> Tuple[int, ...]:
        return tuple(j for j, i in enumerate(self.image, start=1) if i == j)

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Mode pairs (j, image[j]) with j < image[j], 1-based."""
        return tuple((j, i) for j, i in enumerate(self.image, start=1) if j < i)

    def index_array(self) -> np.ndarray:
        """0-based partner indices."""
        return np.asarray(self.image, dtype=int) - 1

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """S acting on amplitudes: (S psi)_j = phase * psi_image[j]."""
        vector = np.asarray(vector)
        return self.parity_phase * vector[self.index_array()]


# =============================================================================
# HAMILTONIANS
# =============================================================================


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    couplings: CouplingSequence

    @property
    def n_sites(self) -> int:
        return self.couplings.n_sites


@dataclass(frozen=True, eq=False)
class DenseHamiltonian:
    matrix: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]


Hamiltonian = Union[TridiagonalHamiltonian, DenseHamiltonian]


def build_couplings(spec: ChainSpec) -> CouplingSequence:
    """
    Engineered couplings J_j = J0 * sqrt((j + xi_j)(N - j + xi_j)).

    Args:
        spec: Chain specification

    Returns:
        CouplingSequence of length N - 1

    Raises:
        ConfigurationError: If a custom list has the wrong length
    """
    n = spec.n_sites
    if isinstance(spec.family, Custom):
        if len(spec.family.values) != n - 1:
            raise ConfigurationError(
                f"expected {n - 1} couplings, got {len(spec.family.values)}", "chain.couplings"
            )
        return CouplingSequence(spec.family.values)

    j = np.arange(1, n, dtype=float)
    theta = 1.0 - (-1.0) ** j
    xi = theta * (family_shift(spec.family) / 2.0)
    values = spec.j0 * np.sqrt((j + xi) * (n - j + xi))
    return CouplingSequence(tuple(values.tolist()))


def uniform_couplings(n_sites: int, j0: float = 1.0) -> CouplingSequence:
    return CouplingSequence((float(j0),) * (n_sites - 1))


def build_hamiltonian(couplings: CouplingSequence) -> TridiagonalHamiltonian:
    return TridiagonalHamiltonian(couplings)


def dense_hamiltonian(matrix: Sequence[Sequence[complex]], tol: float = 1e-12) -> DenseHamiltonian:
    """
    Validated general hopping Hamiltonian H = sum_{i != j} J_ij a_i^dag a_j.

    Raises:
        ValidationError: If the matrix is not square Hermitian with zero diagonal
    """
    matrix = np.array(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 2:
        raise ValidationError("hopping matrix must be square with N >= 2")
    if np.max(np.abs(matrix - matrix.conj().T)) > tol:
        raise ValidationError("hopping matrix must be Hermitian")
    if np.max(np.abs(np.diag(matrix))) > tol:
        raise ValidationError("hopping matrix must have a zero diagonal")
    if np.isrealobj(matrix) or np.max(np.abs(matrix.imag)) == 0.0:
        matrix = matrix.real.astype(float)
    matrix.setflags(write=False)
    return DenseHamiltonian(matrix)


def hamiltonian_matrix(h: Hamiltonian) -> np.ndarray:
    """Dense N x N view of either Hamiltonian kind."""
    if isinstance(h, DenseHamiltonian):
        return np.array(h.matrix)
    values = h.couplings.as_array()
    return np.diag(values, 1) + np.diag(values, -1)


# =============================================================================
# SYMMETRIES
# =============================================================================


def reflection_permutation(n_sites: int) -> SymmetryPermutation:
    """Mirror reflection R|j> = |N + 1 - j>."""
    if n_sites < 2:
        raise ValidationError("reflection needs N >= 2")
    return SymmetryPermutation(tuple(range(n_sites, 0, -1)))


def symmetry_from_pairs(n_sites: int, pairs: Sequence[Tuple[int, int]],
                        parity_phase: complex = 1.0) -> SymmetryPermutation:
    """
    General involution pairing |n_j> with |m_j>; unlisted sites are fixed.

    Args:
        n_sites: Number of modes
        pairs: 1-based (n_j, m_j) pairs, each site used at most once
        parity_phase: Unit-modulus phase carried by S
    """
    image = list(range(1, n_sites + 1))
    seen = set()
    for a, b in pairs:
        if a in seen or b in seen or not (1 <= a <= n_sites and 1 <= b <= n_sites):
            raise ValidationError(f"invalid or repeated pair ({a}, {b})")
        seen.update((a, b))
        image[a - 1], image[b - 1] = b, a
    return SymmetryPermutation(tuple(image), parity_phase)


def compose(first: SymmetryPermutation, second: SymmetryPermutation) -> Tuple[int, ...]:
    """Image of the site map first(second(j)), 1-based."""
    return tuple(first.image[i - 1] for i in second.image)


def permutation_matrix(s: SymmetryPermutation) -> np.ndarray:
    """Matrix of S with S|j> = phase |image[j]>."""
    n = s.n_sites
    matrix = np.zeros((n, n), dtype=complex if np.iscomplexobj(s.parity_phase) else float)
    matrix[s.index_array(), np.arange(n)] = s.parity_phase
    return matrix


def check_symmetry(h: Hamiltonian, s: SymmetryPermutation, tol: float = 1e-12) -> bool:
    """
    True iff max |S H - H S| <= tol.

    Raises:
        ValidationError: If the dimensions disagree
    """
    if h.n_sites != s.n_sites:
        raise ValidationError(f"Hamiltonian has {h.n_sites} sites, symmetry {s.n_sites}")
    matrix = hamiltonian_matrix(h)
    perm = permutation_matrix(s)
    return float(np.max(np.abs(perm @ matrix - matrix @ perm))) <= tol
