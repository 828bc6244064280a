from pathlib import Path

import click

from commands.scan_command import scan_relations
from utils.chain_functions import ChainSpec, Christandl, MlFamily
from utils.config_functions import ScenarioConfig
from utils.errors import UnsupportedError, ValidationError
from utils.logging_functions import emit_report
from utils.pdf_generator import build_certificate_pdf
from utils.scan_functions import PreparedScenario, prepare_scenario, run_scan
from utils.spectral_functions import with_parities
from utils.spectrum_functions import (
    CommensurabilityReport,
    closed_form_model,
    detect_commensurability,
    empirical_model,
    parity_pattern_check,
    pst_spectral_condition,
)
from utils.transfer_functions import certify_pst, expected_global_phase, tau_scan

TAU_SCAN_POINTS = 4001


def reference_model(chain: ChainSpec, commensurability: CommensurabilityReport):
    """
    Spectrum model the parity pattern is compared against.

    Returns:
        (SpectrumModel or None, "closed_form" | "empirical" | None)
    """
    family = chain.family
    if isinstance(family, (Christandl, MlFamily)) and chain.n_sites % 2 == 0:
        m, l = (family.m, family.l) if isinstance(family, MlFamily) else (0, 0)
        try:
            return closed_form_model(m, l, chain.n_sites, chain.j0), "closed_form"
        except UnsupportedError:
            pass
    if commensurability.found:
        return empirical_model(commensurability), "empirical"
    return None, None


def parity_section(config: ScenarioConfig, prepared: PreparedScenario, commensurability) -> dict:
    tol = config.tolerance("parity")
    labelled = with_parities(prepared.decomp, prepared.symmetry, tol)
    model, source = reference_model(config.chain, commensurability)
    matches = None
    if model is not None and None not in labelled.parities:
        matches = parity_pattern_check(labelled, model)
    holds, spectral_tau = pst_spectral_condition(
        prepared.decomp, prepared.symmetry, config.tolerance("commensurability")
    )
    return {
        "labels": [p if p is not None else 0 for p in labelled.parities],
        "model": source,
        "integers": list(model.integers) if model is not None else [],
        "matches": matches,
        "spectral_condition": holds,
        "spectral_tau": spectral_tau,
    }


def certify_scenario(config: ScenarioConfig, threads=1, tau=None, prepared=None, series=None) -> dict:
    """
    Certificate, commensurability, parity check and relations for one scenario.

    Args:
        config: Scenario
        threads: Worker threads for the relations scan
        tau: Transfer time; defaults to the closed form, then pi / E' of a commensurate
            spectrum, then a fidelity scan
        prepared: Reuse an already diagonalized scenario
        series: Reuse an existing scan of the same scenario

    Returns:
        Report dictionary ready for emit_report
    """
    prepared = prepared or prepare_scenario(config)
    source = "closed_form"
    if tau is None:
        tau = prepared.tau
    else:
        source = "given"
    if tau is None:
        holds, spectral_tau = pst_spectral_condition(
            prepared.decomp, prepared.symmetry, config.tolerance("commensurability")
        )
        if holds:
            tau, source = spectral_tau, "spectral"
    if tau is None:
        scan = tau_scan(prepared.decomp, prepared.packet, prepared.symmetry, config.t_max, TAU_SCAN_POINTS)
        tau, source = scan.best_time, "fidelity_scan"
        click.echo(f"tau from fidelity scan: {tau:.9f} (F = {scan.best_fidelity:.12f})")

    certificate = certify_pst(prepared.decomp, prepared.symmetry, tau, config.tolerance("certify"))
    try:
        commensurability = detect_commensurability(prepared.decomp.eigenvalues, config.tolerance("commensurability"))
    except ValidationError as e:
        commensurability = CommensurabilityReport(False, 0.0, 0.0, notes=(str(e),))

    if series is None:
        series = run_scan(config, threads, prepared)
    relations = scan_relations(config, series, tau)

    certificate_section = certificate.as_dict()
    certificate_section["tau_source"] = source
    certificate_section["expected_global_phase"] = expected_global_phase(config.chain.family)
    return {
        "scenario": config.name,
        "certificate": certificate_section,
        "commensurability": commensurability.as_dict(),
        "parity": parity_section(config, prepared, commensurability),
        "relations": relations or {},
    }


def run_certify_command(config: ScenarioConfig, out_dir, threads=1, tau=None, pdf=None):
    """Pantalla de certificacion PST"""
    report = certify_scenario(config, threads, tau)
    out_dir = Path(out_dir)
    report_path = emit_report(report, config.output("report") or out_dir / f"{config.name}_report.json")

    certificate = report["certificate"]
    status = "certified" if certificate["certified"] else "NOT certified"
    phase = certificate["global_phase"]
    click.echo(
        f"{status}: tau = {certificate['tau']:.12f}, phi = {phase['re']:+.9f}{phase['im']:+.9f}i, "
        f"max deviation = {certificate['max_deviation']:.3e}"
    )
    click.echo(f"report -> {report_path}")

    pdf_path = pdf or config.output("pdf")
    if pdf_path:
        build_certificate_pdf(report, pdf_path)
        click.echo(f"pdf -> {pdf_path}")
    report["paths"] = {"report": str(report_path), "pdf": str(pdf_path) if pdf_path else None}
    return report
