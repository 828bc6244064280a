from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from utils.chain_functions import (
    ChainSpec,
    Christandl,
    KFamily,
    MlFamily,
    SymmetryPermutation,
    build_couplings,
    build_hamiltonian,
    check_symmetry,
    dense_hamiltonian,
    hamiltonian_matrix,
    reflection_permutation,
    symmetry_from_pairs,
)
from utils.entanglement_functions import mirror_mode_concurrence, total_concurrence_general
from utils.logging_functions import write_json
from utils.packet_functions import WavePacket
from utils.scan_functions import evaluate_series, time_grid
from utils.spectral_functions import diagonalize, evolve
from utils.transfer_functions import certify_pst, characteristic_time, fidelity_at

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

THEOREM_CONFIG = {
    "forward_tol": 1e-8,
    "converse_mmc_tol": 1e-8,
    "converse_fidelity_tol": 1e-7,
    "converse_steps": 800,
}

THEOREM_MODELS = (
    [ChainSpec(n, 1.0, Christandl()) for n in (4, 8, 16)]
    + [ChainSpec(n, 1.0, KFamily(k)) for k in (1, 4) for n in (4, 8)]
    + [ChainSpec(n, 1.0, MlFamily(m, l)) for m, l in ((1, 1), (1, 2), (2, 1), (2, 3)) for n in (4, 8, 16)]
)


@dataclass(frozen=True)
class ModelOutcome:
    label: str
    n_sites: int
    tau: float
    forward_fidelity_gap: float
    forward_mmc_gap: float
    converse_hits: int
    converse_violations: int
    general_gap: float

    @property
    def passed(self) -> bool:
        tol = THEOREM_CONFIG["forward_tol"]
        return (self.forward_fidelity_gap <= tol and self.forward_mmc_gap <= tol
                and self.converse_hits > 0 and self.converse_violations == 0
                and self.general_gap <= tol)


def random_real_packet(rng: np.random.Generator, n_sites: int) -> WavePacket:
    values = rng.standard_normal(n_sites)
    return WavePacket(values / np.linalg.norm(values))


def relabel_sites(h, s: SymmetryPermutation, psi: WavePacket, order: np.ndarray):
    """
    Same model on shuffled site labels: site j becomes order[j - 1] + 1.

    Returns:
        (DenseHamiltonian, SymmetryPermutation, WavePacket) on the new labels
    """
    matrix = hamiltonian_matrix(h)
    n = matrix.shape[0]
    shuffled = np.zeros_like(matrix)
    shuffled[np.ix_(order, order)] = matrix
    pairs = [(int(order[j - 1]) + 1, int(order[i - 1]) + 1) for j, i in s.pairs]
    amplitudes = np.zeros(n, dtype=complex)
    amplitudes[order] = psi.amplitudes
    return dense_hamiltonian(shuffled), symmetry_from_pairs(n, pairs, s.parity_phase), WavePacket(amplitudes)


def converse_check(decomp, psi: WavePacket, s: SymmetryPermutation, tau: float, steps: int = None):
    """
    Grid points on [0, 2 tau] where C(t) = 1, and how many of them lack F(2t) = 1.

    Returns:
        (hits, violations)
    """
    steps = steps or THEOREM_CONFIG["converse_steps"]
    series = evaluate_series(decomp, psi, s, time_grid(2.0 * tau, steps))
    hits = np.flatnonzero(np.abs(series.mmc - 1.0) <= THEOREM_CONFIG["converse_mmc_tol"])
    violations = sum(
        1 for k in hits
        if abs(fidelity_at(decomp, psi, s, 2.0 * series.t[k]) - 1.0) > THEOREM_CONFIG["converse_fidelity_tol"]
    )
    return int(hits.size), int(violations)


def check_model(chain: ChainSpec, packets: int, rng: np.random.Generator) -> ModelOutcome:
    """
    F(tau) = 1 and C(tau/2) = 1 for random real packets, the converse on a
    coarse grid, and the total concurrence on a relabelled copy of the chain.
    """
    h = build_hamiltonian(build_couplings(chain))
    decomp = diagonalize(h)
    s = reflection_permutation(chain.n_sites)
    tau = characteristic_time(chain.family, chain.j0)

    fidelity_gap = mmc_gap = 0.0
    hits = violations = 0
    for index in range(packets):
        psi = random_real_packet(rng, chain.n_sites)
        fidelity_gap = max(fidelity_gap, abs(fidelity_at(decomp, psi, s, tau) - 1.0))
        half = evolve(decomp, psi, tau / 2)
        mmc_gap = max(mmc_gap, abs(mirror_mode_concurrence(half, s).mmc - 1.0))
        if index == 0:
            hits, violations = converse_check(decomp, psi, s, tau)

    psi = random_real_packet(rng, chain.n_sites)
    dense, s_general, psi_general = relabel_sites(h, s, psi, rng.permutation(chain.n_sites))
    general_gap = 1.0
    if check_symmetry(dense, s_general):
        dense_decomp = diagonalize(dense)
        if certify_pst(dense_decomp, s_general, tau).certified:
            half = evolve(dense_decomp, psi_general, tau / 2)
            general_gap = abs(total_concurrence_general(half, s_general).value - 1.0)

    return ModelOutcome(
        label=chain.family.label,
        n_sites=chain.n_sites,
        tau=tau,
        forward_fidelity_gap=fidelity_gap,
        forward_mmc_gap=mmc_gap,
        converse_hits=hits,
        converse_violations=violations,
        general_gap=general_gap,
    )


def run_theorem_suite(packets: int = 100, seed: int = 0, models=None) -> list:
    rng = np.random.default_rng(seed)
    return [check_model(chain, packets, rng) for chain in (models or THEOREM_MODELS)]


def run_theorem_command(out_dir, packets=100, seed=0):
    """Pantalla del teorema F(tau) = 1 <=> C(tau/2) = 1"""
    outcomes = run_theorem_suite(packets, seed)
    for outcome in outcomes:
        mark = "ok" if outcome.passed else "FAIL"
        click.echo(
            f"[{mark}] {outcome.label:<10} N={outcome.n_sites:<3} "
            f"|F(tau)-1| = {outcome.forward_fidelity_gap:.2e}  |C(tau/2)-1| = {outcome.forward_mmc_gap:.2e}  "
            f"converse {outcome.converse_hits - outcome.converse_violations}/{outcome.converse_hits}  "
            f"general {outcome.general_gap:.2e}"
        )
    document = {
        "packets": packets,
        "seed": seed,
        "passed": all(o.passed for o in outcomes),
        "models": [dict(vars(o), passed=o.passed) for o in outcomes],
    }
    path = write_json(document, Path(out_dir) / "theorem.json")
    click.echo(f"theorem -> {path}")
    return document
