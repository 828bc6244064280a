import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from utils.chain_functions import (
    Christandl,
    CouplingFamily,
    KFamily,
    MlFamily,
    SymmetryPermutation,
    permutation_matrix,
)
from utils.errors import UnsupportedError, ValidationError
from utils.packet_functions import WavePacket
from utils.spectral_functions import SpectralDecomposition, propagator

CERTIFICATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PstCertificate:
    tau: float
    global_phase: complex
    max_deviation: float
    certified: bool
    tolerance: float = CERTIFICATION_TOLERANCE

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "global_phase": {"re": self.global_phase.real, "im": self.global_phase.imag},
            "max_deviation": self.max_deviation,
            "certified": self.certified,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True, eq=False)
class TauScan:
    times: np.ndarray
    fidelities: np.ndarray
    best_time: float
    best_fidelity: float


def _check_dimensions(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation):
    if not decomp.n_sites == psi0.n_sites == s.n_sites:
        raise ValidationError(
            f"dimension mismatch: spectrum {decomp.n_sites}, packet {psi0.n_sites}, symmetry {s.n_sites}"
        )


def fidelity_series(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation,
                    times: Sequence[float]) -> np.ndarray:
    """F(t) = |<S psi0| U(t) |psi0>| on a whole grid at once."""
    _check_dimensions(decomp, psi0, s)
    w = decomp.eigenvectors
    weights = (w.conj().T @ s.apply(psi0.amplitudes)).conj() * (w.conj().T @ psi0.amplitudes)
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), decomp.eigenvalues))
    return np.abs(phases @ weights)


def fidelity_at(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation, t: float) -> float:
    """
    Transfer fidelity |<S psi0| U(t) |psi0>|.

    Args:
        decomp: Spectral decomposition of H
        psi0: Initial packet
        s: Symmetry playing the role of the mirror (reflection for chains)
        t: Time

    Returns:
        Fidelity in [0, 1]

    Raises:
        ValidationError: On a dimension mismatch
    """
    return float(fidelity_series(decomp, psi0, s, [t])[0])


def characteristic_time(family: CouplingFamily, j0: float = 1.0) -> float:
    """
    tau = pi / E0 with E0 = 2 J0 / (2m + 1).

    Raises:
        UnsupportedError: For custom chains (use tau_scan instead)
    """
    if isinstance(family, MlFamily):
        return math.pi * (2 * family.m + 1) / (2.0 * j0)
    if isinstance(family, (Christandl, KFamily)):
        return math.pi / (2.0 * j0)
    raise UnsupportedError("custom chains have no closed-form tau; scan for fidelity maxima instead")


def expected_global_phase(family: CouplingFamily) -> complex:
    """The (-1)^l phase quoted for U(tau); reported next to the measured one."""
    if isinstance(family, MlFamily):
        return complex((-1) ** family.l)
    if isinstance(family, KFamily):
        return complex((-1) ** family.k)
    return 1.0 + 0j


def certify_pst(decomp: SpectralDecomposition, s: SymmetryPermutation, tau: float,
                tol: float = CERTIFICATION_TOLERANCE) -> PstCertificate:
    """
    Check U(tau) = phi * S for a unit-modulus phi.

    phi is read from the largest diagonal entry of U(tau) S^-1, which stays
    well conditioned when some entries of U(tau) are close to zero.
    """
    if s.n_sites != decomp.n_sites:
        raise ValidationError(f"symmetry has {s.n_sites} sites, spectrum {decomp.n_sites}")
    u_tau = propagator(decomp, tau).entries
    symmetry = permutation_matrix(s)
    matched = np.diag(u_tau @ symmetry.conj().T)
    pivot = matched[np.argmax(np.abs(matched))]
    phase = complex(pivot / abs(pivot)) if abs(pivot) > 0 else 1.0 + 0j
    deviation = float(np.max(np.abs(u_tau - phase * symmetry)))
    return PstCertificate(float(tau), phase, deviation, deviation <= tol, tol)


def tau_scan(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation,
             t_max: float, steps: int = 4001) -> TauScan:
    """Grid search for the first best fidelity on (0, t_max]."""
    if steps < 2 or t_max <= 0:
        raise ValidationError("tau scan needs t_max > 0 and at least two grid points")
    times = np.linspace(0.0, t_max, steps)
    fidelities = fidelity_series(decomp, psi0, s, times)
    best = 1 + int(np.argmax(fidelities[1:]))
    return TauScan(times, fidelities, float(times[best]), float(fidelities[best]))
