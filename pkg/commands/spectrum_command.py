from pathlib import Path

import click
import numpy as np
import pandas as pd

from utils.chain_functions import ChainSpec, MlFamily, build_couplings, build_hamiltonian, reflection_permutation
from utils.config_functions import ScenarioConfig
from utils.spectral_functions import diagonalize, with_parities
from utils.spectrum_functions import (
    closed_form_model,
    detect_commensurability,
    parity_pattern_check,
)
from utils.transfer_functions import certify_pst, characteristic_time

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

SWEEP_CONFIG = {
    "families": ((1, 1), (1, 2), (2, 1), (2, 3)),
    "min_sites": 4,
    "extra_sizes": (512,),
}

SWEEP_COLUMNS = [
    "m", "l", "n_sites", "relative_error", "parity_match",
    "commensurate", "quantum", "tau", "certified", "max_deviation",
]


def sweep_sizes(n_max: int) -> list:
    """Powers of two from 4 up to n_max, plus the listed larger sizes that fit."""
    sizes = []
    n = SWEEP_CONFIG["min_sites"]
    while n <= n_max:
        sizes.append(n)
        n *= 2
    sizes += [n for n in SWEEP_CONFIG["extra_sizes"] if n <= n_max and n not in sizes]
    return sizes


def sweep_row(m: int, l: int, n_sites: int, j0: float = 1.0, tol: float = 1e-9) -> dict:
    """Closed-form spectrum, parity pattern, commensurability and certificate of one (m, l, N) chain."""
    chain = ChainSpec(n_sites, j0, MlFamily(m, l))
    h = build_hamiltonian(build_couplings(chain))
    decomp = with_parities(diagonalize(h), reflection_permutation(n_sites))
    model = closed_form_model(m, l, n_sites, j0)

    expected = np.sort(model.energies())
    scale = float(np.max(np.abs(decomp.eigenvalues)))
    report = detect_commensurability(decomp.eigenvalues, tol * scale)
    tau = characteristic_time(chain.family, j0)
    certificate = certify_pst(decomp, reflection_permutation(n_sites), tau, max(tol, 1e-9))
    return {
        "m": m,
        "l": l,
        "n_sites": n_sites,
        "relative_error": float(np.max(np.abs(decomp.eigenvalues - expected)) / scale),
        "parity_match": None not in decomp.parities and parity_pattern_check(decomp, model),
        "commensurate": report.found,
        "quantum": report.quantum,
        "tau": tau,
        "certified": certificate.certified,
        "max_deviation": certificate.max_deviation,
    }


def spectrum_sweep(n_max: int = 64, families=None, tol: float = 1e-9) -> pd.DataFrame:
    """
    Eigensolver against the closed-form (m, l) spectrum over a size sweep.

    Args:
        n_max: Largest chain size
        families: (m, l) pairs, SWEEP_CONFIG["families"] by default
        tol: Relative tolerance used by the commensurability fit

    Returns:
        DataFrame with one row per (m, l, N)
    """
    families = families or SWEEP_CONFIG["families"]
    rows = [sweep_row(m, l, n, tol=tol) for m, l in families for n in sweep_sizes(n_max)]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def describe_scenario_spectrum(config: ScenarioConfig) -> dict:
    """Eigenvalues, parity labels and commensurability of a configured chain."""
    h = build_hamiltonian(build_couplings(config.chain))
    decomp = with_parities(diagonalize(h), reflection_permutation(config.chain.n_sites), config.tolerance("parity"))
    report = detect_commensurability(decomp.eigenvalues, config.tolerance("commensurability"))
    return {
        "eigenvalues": decomp.eigenvalues.tolist(),
        "parities": list(decomp.parities),
        "commensurability": report.as_dict(),
    }


def run_spectrum_command(out_dir, n_max=64, config: ScenarioConfig = None, tol=1e-9):
    """Pantalla de espectro: barrido (m, l) y analisis del escenario"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = spectrum_sweep(n_max, tol=tol)
    table_path = out_dir / "spectrum_sweep.csv"
    table.to_csv(table_path, index=False, float_format="%.17g", lineterminator="\n")
    click.echo(table.to_string(index=False, columns=["m", "l", "n_sites", "relative_error",
                                                     "parity_match", "commensurate", "certified"]))
    click.echo(f"sweep -> {table_path}")

    scenario = None
    if config is not None:
        scenario = describe_scenario_spectrum(config)
        found = scenario["commensurability"]
        click.echo(f"{config.name}: eigenvalues {np.round(scenario['eigenvalues'], 9).tolist()}")
        if found["found"]:
            click.echo(f"commensurate with E' = {found['quantum']:.12g}, integers {found['integers']}")
        else:
            click.echo("spectrum is not commensurate")
    return {"table": table, "path": str(table_path), "scenario": scenario}
