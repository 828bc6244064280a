from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from utils.chain_functions import (
    Custom,
    Hamiltonian,
    SymmetryPermutation,
    build_couplings,
    build_hamiltonian,
    reflection_permutation,
)
from utils.config_functions import ScenarioConfig
from utils.errors import ValidationError
from utils.packet_functions import WavePacket
from utils.spectral_functions import SpectralDecomposition, diagonalize
from utils.transfer_functions import characteristic_time

SERIES_COLUMNS = ["t", "fidelity", "mmc", "overlap_bound"]
BOUND_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t: np.ndarray
    fidelity: np.ndarray
    mmc: np.ndarray
    overlap_bound: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: getattr(self, name) for name in SERIES_COLUMNS}, columns=SERIES_COLUMNS)


def time_grid(t_max: float, steps: int) -> np.ndarray:
    """steps + 1 uniform points; k / steps is formed first so quarter points are exact."""
    return t_max * (np.arange(steps + 1) / steps)


def _series_chunk(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation,
                  times: np.ndarray) -> np.ndarray:
    w = decomp.eigenvectors
    coefficients = w.conj().T @ psi0.amplitudes
    # Rows must not depend on the chunk shape.
    states = np.einsum("tn,jn->tj", np.exp(-1j * np.outer(times, decomp.eigenvalues)) * coefficients, w)
    partners = s.index_array()
    mirror_initial = s.apply(psi0.amplitudes)
    magnitudes = np.abs(states)
    fidelity = np.abs(np.einsum("tj,j->t", states, mirror_initial.conj()))
    mmc = np.sum(magnitudes * magnitudes[:, partners], axis=1)
    bound = np.abs(np.sum(states.conj() * s.parity_phase * states[:, partners], axis=1))
    return np.column_stack([times, fidelity, mmc, bound])


def evaluate_series(decomp: SpectralDecomposition, psi0: WavePacket, s: SymmetryPermutation,
                    times: np.ndarray, threads: int = 1) -> TimeSeries:
    """
    Fidelity, MMC and overlap bound on a time grid.

    The grid is split into contiguous chunks for the worker threads and
    reassembled in order, so the output does not depend on threads.
    """
    if not decomp.n_sites == psi0.n_sites == s.n_sites:
        raise ValidationError("spectrum, packet and symmetry sizes differ")
    times = np.asarray(times, dtype=float)
    if threads <= 1:
        rows = _series_chunk(decomp, psi0, s, times)
    else:
        chunks = np.array_split(times, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda chunk: _series_chunk(decomp, psi0, s, chunk), chunks))
        rows = np.vstack(parts)
    return TimeSeries(*(rows[:, i].real.copy() for i in range(4)))


def scenario_tau(config: ScenarioConfig) -> Optional[float]:
    """Closed-form tau of the scenario's chain, None for custom chains."""
    if isinstance(config.chain.family, Custom):
        return None
    return characteristic_time(config.chain.family, config.chain.j0)


@dataclass(frozen=True, eq=False)
class PreparedScenario:
    hamiltonian: Hamiltonian
    decomp: SpectralDecomposition
    symmetry: SymmetryPermutation
    packet: WavePacket
    tau: Optional[float]


def prepare_scenario(config: ScenarioConfig) -> PreparedScenario:
    """Chain, spectrum, reflection and initial packet of a scenario."""
    h = build_hamiltonian(build_couplings(config.chain))
    return PreparedScenario(
        hamiltonian=h,
        decomp=diagonalize(h),
        symmetry=reflection_permutation(config.chain.n_sites),
        packet=config.packet(),
        tau=scenario_tau(config),
    )


def run_scan(config: ScenarioConfig, threads: int = 1, prepared: PreparedScenario = None) -> TimeSeries:
    """
    Time scan of a scenario on [0, t_max] with steps + 1 points.

    Args:
        config: Scenario
        threads: Worker threads for the grid
        prepared: Reuse an already diagonalized scenario

    Returns:
        TimeSeries with fidelity, MMC and overlap bound per grid point
    """
    prepared = prepared or prepare_scenario(config)
    times = time_grid(config.t_max, config.steps)
    return evaluate_series(prepared.decomp, prepared.packet, prepared.symmetry, times, threads)


# =============================================================================
# RELATIONS
# =============================================================================


def _grid_index(series: TimeSeries, t: float) -> int:
    index = int(np.argmin(np.abs(series.t - t)))
    if abs(series.t[index] - t) > 1e-12 * max(1.0, abs(t)):
        raise ValidationError(
            f"t = {t:.12g} is not on the grid; use t_max = 2tau with steps divisible by 4"
        )
    return index


def _mirror_deviation(values: np.ndarray, center: int) -> float:
    reach = min(center, values.size - 1 - center)
    if reach <= 0:
        return 0.0
    left = values[center - reach: center][::-1]
    right = values[center + 1: center + 1 + reach]
    return float(np.max(np.abs(left - right)))


def verify_relations(series: TimeSeries, tau: float, tol: float = 1e-9) -> dict:
    """
    Symmetry of C(t) about tau/2 and tau, bounds, and complementarity checkpoints.

    Args:
        series: Scan on a grid holding 0, tau/2 and tau, reaching at least 2 tau
        tau: Characteristic time
        tol: Tolerance for the pass/fail flags

    Returns:
        Report dictionary (JSON-ready)

    Raises:
        ValidationError: If tau/2 or tau is off the grid, or the grid stops short of 2 tau
    """
    span = 2.0 * tau
    if series.t[-1] < span - 1e-12 * max(1.0, span):
        raise ValidationError(
            f"the grid ends at t = {series.t[-1]:.12g}; the symmetry about tau needs t_max >= 2tau"
        )
    half = _grid_index(series, tau / 2)
    full = _grid_index(series, tau)
    start = _grid_index(series, 0.0)

    mmc, fidelity, bound = series.mmc, series.fidelity, series.overlap_bound
    half_dev = _mirror_deviation(mmc, half)
    full_dev = _mirror_deviation(mmc, full)
    violations = int(np.sum(
        (bound > mmc + BOUND_SLACK) | (mmc > 1 + BOUND_SLACK)
        | (fidelity > 1 + BOUND_SLACK) | (fidelity < -BOUND_SLACK)
    ))
    peak = int(np.argmax(mmc))
    checkpoints = {
        "F_tau": float(fidelity[full]),
        "C_half_tau": float(mmc[half]),
        "C_0": float(mmc[start]),
        "C_tau": float(mmc[full]),
    }
    return {
        "tau": float(tau),
        "tolerance": tol,
        "half_tau_symmetry_deviation": half_dev,
        "tau_symmetry_deviation": full_dev,
        "bound_violations": violations,
        "checkpoints": checkpoints,
        "max_mmc": float(mmc[peak]),
        "t_at_max_mmc": float(series.t[peak]),
        "symmetric": half_dev <= tol and full_dev <= tol,
        "complementarity": (
            abs(checkpoints["F_tau"] - 1) <= tol
            and abs(checkpoints["C_half_tau"] - 1) <= tol
            and checkpoints["C_0"] <= tol
            and checkpoints["C_tau"] <= tol
        ),
    }
