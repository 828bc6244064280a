from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from utils.chain_functions import SymmetryPermutation
from utils.errors import ValidationError
from utils.fock_functions import FockState, correlator, occupation_matrix
from utils.packet_functions import WavePacket

TIGHTNESS_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TwoModeRdm:
    x_plus: float
    x_minus: float
    y_plus: float
    y_minus: float
    z: complex
    sites: Tuple[int, int]

    @property
    def trace(self) -> float:
        return self.x_plus + self.x_minus + self.y_plus + self.y_minus


@dataclass(frozen=True)
class EntanglementRecord:
    mmc: float
    overlap_bound: float
    pairwise: Tuple[Tuple[Tuple[int, int], float], ...]


@dataclass(frozen=True)
class GeneralConcurrence:
    value: float
    warnings: Tuple[str, ...] = ()


def _check_site(site: int, n_sites: int):
    if not 1 <= site <= n_sites:
        raise ValidationError(f"site {site} outside 1..{n_sites}")


def z_correlator(psi: WavePacket, j: int, l: int) -> complex:
    """<a_j^dag a_l> = conj(psi_j) psi_l in the single-particle sector."""
    _check_site(j, psi.n_sites)
    _check_site(l, psi.n_sites)
    return complex(np.conj(psi.amplitudes[j - 1]) * psi.amplitudes[l - 1])


def two_mode_rdm(state: Union[FockState, WavePacket], j: int, l: int) -> TwoModeRdm:
    """
    Reduced state of the mode pair (j, l) from occupation correlators.

    Args:
        state: Fock state, or a WavePacket read directly in the p = 1 sector
        j: First site (1-based)
        l: Second site (1-based), distinct from j

    Returns:
        TwoModeRdm with X+-, Y+- and Z = <a_j^dag a_l>

    Raises:
        ValidationError: If j == l or a site is out of range
    """
    if j == l:
        raise ValidationError("a two-mode reduced state needs two distinct modes")
    if isinstance(state, WavePacket):
        z = z_correlator(state, j, l)
        weights = np.abs(state.amplitudes) ** 2
        y_plus, y_minus = float(weights[j - 1]), float(weights[l - 1])
        return TwoModeRdm(
            x_plus=0.0,
            x_minus=max(0.0, 1.0 - y_plus - y_minus),
            y_plus=y_plus,
            y_minus=y_minus,
            z=z,
            sites=(j, l),
        )
    _check_site(j, state.n_modes)
    _check_site(l, state.n_modes)
    occupied = occupation_matrix(state)
    weights = np.abs(state.amplitudes) ** 2
    n_j, n_l = occupied[:, j - 1], occupied[:, l - 1]
    return TwoModeRdm(
        x_plus=float(weights[n_j & n_l].sum()),
        x_minus=float(weights[~n_j & ~n_l].sum()),
        y_plus=float(weights[n_j & ~n_l].sum()),
        y_minus=float(weights[~n_j & n_l].sum()),
        z=correlator(state, j, l),
        sites=(j, l),
    )


def two_mode_rdm_matrix(rdm: TwoModeRdm) -> np.ndarray:
    """4 x 4 density matrix in the occupation basis |n_j n_l> = 00, 01, 10, 11."""
    matrix = np.diag([rdm.x_minus, rdm.y_minus, rdm.y_plus, rdm.x_plus]).astype(complex)
    matrix[1, 2] = rdm.z
    matrix[2, 1] = np.conj(rdm.z)
    return matrix


def pairwise_concurrence(rdm: TwoModeRdm) -> float:
    """C_jl = 2 max{0, |Z| - sqrt(X+ X-)}."""
    return 2.0 * max(0.0, abs(rdm.z) - float(np.sqrt(max(rdm.x_plus * rdm.x_minus, 0.0))))


def mirror_mode_concurrence(psi: WavePacket, s: SymmetryPermutation) -> EntanglementRecord:
    """
    C = sum_j |psi_j| |psi_S(j)| over all N sites.

    Fixed points of S contribute |psi_j|^2; the pairwise list only holds
    true pairs j < S(j).
    """
    if psi.n_sites != s.n_sites:
        raise ValidationError(f"packet has {psi.n_sites} sites, symmetry {s.n_sites}")
    amplitudes = psi.amplitudes
    magnitudes = np.abs(amplitudes)
    partners = s.index_array()
    mmc = float(np.sum(magnitudes * magnitudes[partners]))
    pairwise = tuple(
        ((j, i), 2.0 * float(magnitudes[j - 1] * magnitudes[i - 1])) for j, i in s.pairs
    )
    bound = float(abs(np.vdot(amplitudes, s.apply(amplitudes))))
    return EntanglementRecord(mmc, bound, pairwise)


def overlap_bound_check(psi: WavePacket, s: SymmetryPermutation) -> Tuple[float, bool]:
    """(|<psi|S|psi>|, whether the MMC lower bound is saturated)."""
    record = mirror_mode_concurrence(psi, s)
    return record.overlap_bound, record.mmc - record.overlap_bound <= TIGHTNESS_TOLERANCE


def mirror_products_share_sign(psi: WavePacket, s: SymmetryPermutation, tol: float = 1e-12) -> bool:
    """Every psi_j psi_S(j) real and all nonzero ones of one sign."""
    amplitudes = psi.amplitudes
    products = amplitudes * amplitudes[s.index_array()]
    if np.max(np.abs(products.imag)) > tol:
        return False
    real = products.real[np.abs(products.real) > tol]
    return bool(np.all(real > 0) or np.all(real < 0))


def total_concurrence_general(state: Union[FockState, WavePacket], s: SymmetryPermutation) -> GeneralConcurrence:
    """
    sum over symmetry pairs (n_j, m_j) of 2 |<a_{n_j}^dag a_{m_j}>|.

    Fixed points of S are left out; occupied ones are reported in warnings.
    A WavePacket is read in the p = 1 sector without building a Fock basis.
    """
    single = isinstance(state, WavePacket)
    n_modes = state.n_sites if single else state.n_modes
    if n_modes != s.n_sites:
        raise ValidationError(f"state has {n_modes} modes, symmetry {s.n_sites}")
    pair_correlator = z_correlator if single else correlator
    value = sum(2.0 * abs(pair_correlator(state, j, i)) for j, i in s.pairs)
    notes = []
    if s.fixed_points:
        weights = np.abs(state.amplitudes) ** 2
        if single:
            occupations = weights
        else:
            occupations = weights @ occupation_matrix(state).astype(float)
        for site in s.fixed_points:
            occupation = float(occupations[site - 1])
            if occupation > 1e-12:
                notes.append(f"fixed-point mode {site} has occupation {occupation:.6g} and is excluded")
    return GeneralConcurrence(float(value), tuple(notes))
