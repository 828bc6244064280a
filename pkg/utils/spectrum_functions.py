import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.chain_functions import SymmetryPermutation
from utils.errors import UnsupportedError, ValidationError
from utils.spectral_functions import SpectralDecomposition, with_parities

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

COMMENSURABILITY_CONFIG = {
    "denominator_cap": 10 ** 6,
    # A convergent p/q of a gap ratio only counts when q^2 * tolerance stays
    # below this, otherwise any irrational ratio would look rational.
    "significance": 1e-2,
    "relative_floor": 1e-9,
}


@dataclass(frozen=True)
class SpectrumModel:
    """eps_n = N_n * E0 + offset; m and l are None for empirically fitted models."""

    e0: float
    offset: float
    integers: Tuple[int, ...]
    m: Optional[int] = None
    l: Optional[int] = None

    def energies(self) -> np.ndarray:
        return np.asarray(self.integers, dtype=float) * self.e0 + self.offset


@dataclass(frozen=True)
class CommensurabilityReport:
    found: bool
    quantum: float
    base: float
    integers: Tuple[int, ...] = ()
    max_residual: float = float("inf")
    notes: Tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "quantum": self.quantum,
            "base": self.base,
            "integers": list(self.integers),
            "max_residual": self.max_residual,
            "notes": list(self.notes),
        }


# =============================================================================
# CLOSED FORM
# =============================================================================


def closed_form_model(m: int, l: int, n_sites: int, j0: float = 1.0) -> SpectrumModel:
    """
    Commensurate spectrum of the (m, l) family.

    N_n = n(2m+1) - l for n <= N/2 and n(2m+1) + l above, E0 = 2 J0 / (2m+1),
    offset -(N+1) J0.

    Raises:
        ValidationError: If N is odd
        UnsupportedError: If l > 2m or l / (2m+1) is reducible
    """
    if n_sites % 2 or n_sites < 2:
        raise ValidationError("the closed-form spectrum needs an even number of sites")
    if l > 2 * m:
        raise UnsupportedError(f"closed form only verified for l <= 2m (got m={m}, l={l})")
    if l > 0 and math.gcd(l, 2 * m + 1) != 1:
        raise UnsupportedError(f"l/(2m+1) = {l}/{2 * m + 1} is not in lowest terms")
    width = 2 * m + 1
    half = n_sites // 2
    integers = tuple(n * width - l if n <= half else n * width + l for n in range(1, n_sites + 1))
    return SpectrumModel(2.0 * j0 / width, -(n_sites + 1) * j0, integers, m, l)


def closed_form_spectrum(m: int, l: int, n_sites: int, j0: float = 1.0) -> List[float]:
    return sorted(closed_form_model(m, l, n_sites, j0).energies().tolist())


def closed_form_parities(model: SpectrumModel) -> List[int]:
    """(-1)^{N_n}, defined up to one global sign."""
    return [(-1) ** (n % 2) for n in model.integers]


# =============================================================================
# COMMENSURABILITY
# =============================================================================


def _best_convergent(x: float, tol: float, max_denominator: int) -> Optional[Fraction]:
    """First continued-fraction convergent within tol of x, or None."""
    whole = math.floor(x)
    h_prev, h = 1, whole
    k_prev, k = 0, 1
    rest = x - whole
    while abs(x - h / k) > tol:
        if rest <= 0.0:
            return None
        inverse = 1.0 / rest
        a = math.floor(inverse)
        rest = inverse - a
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        if k > max_denominator:
            return None
    return Fraction(h, k)


def detect_commensurability(eigenvalues: Sequence[float], tol: float = 1e-9) -> CommensurabilityReport:
    """
    Fit eps_n = nu_n * E' + eps_1 with the largest quantum E'.

    Gap ratios against the smallest gap are rationalized by continued
    fractions; the common denominator gives E' and the integer increments.

    Args:
        eigenvalues: Real spectrum (sorted on entry)
        tol: Absolute fit tolerance

    Returns:
        CommensurabilityReport (found=False when no significant fit exists)

    Raises:
        ValidationError: With fewer than two distinct eigenvalues
    """
    values = np.sort(np.asarray(eigenvalues, dtype=float))
    if values.size < 2:
        raise ValidationError("commensurability needs at least two eigenvalues")
    spread = float(values[-1] - values[0])
    fit_tol = max(tol, COMMENSURABILITY_CONFIG["relative_floor"] * spread)
    if spread <= fit_tol:
        raise ValidationError("commensurability needs at least two distinct eigenvalues")
    base = float(values[0])

    gaps = np.diff(values)
    resolved = gaps[gaps > fit_tol]
    if resolved.size == 0:
        return CommensurabilityReport(
            False, 0.0, base, notes=(f"no level gap exceeds the fit tolerance {fit_tol:.3g}",)
        )
    reference = float(np.min(resolved))
    ratio_tol = fit_tol / reference
    cap = COMMENSURABILITY_CONFIG["denominator_cap"]
    significant = int(math.sqrt(COMMENSURABILITY_CONFIG["significance"] / ratio_tol))
    max_denominator = max(1, min(cap, significant))

    ratios = []
    for gap in gaps:
        if gap <= fit_tol:
            ratios.append(Fraction(0))
            continue
        ratio = _best_convergent(gap / reference, ratio_tol, max_denominator)
        if ratio is None:
            return CommensurabilityReport(
                False, 0.0, base, notes=(f"gap ratio {gap / reference:.15g} has no significant rational fit",)
            )
        ratios.append(ratio)

    common = reduce(lambda a, b: a * b // math.gcd(a, b), (r.denominator for r in ratios), 1)
    if common > cap:
        return CommensurabilityReport(False, 0.0, base, notes=("common denominator exceeds the cap",))
    increments = [int(r * common) for r in ratios]
    divisor = reduce(math.gcd, increments)
    increments = [step // divisor for step in increments]
    integers = np.concatenate([[0], np.cumsum(increments)]).astype(int)

    # Least squares for E' with the base pinned at eps_1.
    shifted = values - base
    quantum = float(integers @ shifted / (integers @ integers))
    residual = float(np.max(np.abs(shifted - integers * quantum)))
    found = residual <= fit_tol and quantum >= tol * spread
    return CommensurabilityReport(found, quantum, base, tuple(int(v) for v in integers), residual)


def empirical_model(report: CommensurabilityReport) -> SpectrumModel:
    """SpectrumModel built from a successful commensurability fit."""
    if not report.found:
        raise ValidationError("no commensurate structure to build a model from")
    return SpectrumModel(report.quantum, report.base, report.integers)


# =============================================================================
# PARITY AND TRANSFER CONDITIONS
# =============================================================================


def parity_pattern_check(decomp: SpectralDecomposition, model: SpectrumModel,
                         tol: float = 1e-8, s: SymmetryPermutation = None) -> bool:
    """
    True iff the measured parities equal (-1)^{N_n} up to one global sign.

    Args:
        decomp: Decomposition carrying parities (or pass s to label it here)
        model: Closed-form or empirical spectrum model
        tol: Parity labelling tolerance when s is given
        s: Symmetry used to label decomp when it has no parities yet

    Raises:
        ValidationError: If any parity label is undefined
    """
    if s is not None:
        decomp = with_parities(decomp, s, tol)
    parities = decomp.parities
    if len(parities) != len(model.integers):
        raise ValidationError("parity labels and spectrum model differ in length")
    if any(p is None for p in parities):
        raise ValidationError("parity labels are undefined for some eigenstates")
    expected = closed_form_parities(model)
    sign = parities[0] * expected[0]
    return all(p == sign * e for p, e in zip(parities, expected))


def pst_spectral_condition(decomp: SpectralDecomposition, s: SymmetryPermutation,
                           tol: float = 1e-9) -> Tuple[bool, Optional[float]]:
    """
    Perfect transfer from the spectrum alone: commensurate levels whose
    phases exp(-i eps_n tau) times p_n collapse to one value at tau = pi / E'.

    Returns:
        (holds, tau); tau is None when the spectrum is not commensurate
    """
    report = detect_commensurability(decomp.eigenvalues, tol)
    if not report.found:
        return False, None
    tau = math.pi / report.quantum
    labelled = with_parities(decomp, s, tol)
    if any(p is None for p in labelled.parities):
        return False, tau
    parities = np.asarray(labelled.parities, dtype=float)
    phases = np.exp(-1j * decomp.eigenvalues * tau) * parities
    holds = float(np.max(np.abs(phases - phases[0]))) <= tol
    return holds, tau
