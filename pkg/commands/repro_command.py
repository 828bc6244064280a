from pathlib import Path

import click

from commands.certify_command import certify_scenario
from utils.config_functions import reference_scenarios, with_tolerance
from utils.logging_functions import emit_csv, validate_report, write_json
from utils.scan_functions import prepare_scenario, run_scan


def run_repro_command(out_dir, steps=4000, threads=1, tol=None):
    """
    Pantalla de reproduccion: todos los escenarios de referencia

    Args:
        out_dir: Directory for <scenario>.csv files and repro_report.json
        steps: Grid steps per scenario (rounded up to a multiple of 4)
        threads: Worker threads per scan
        tol: Override for every tolerance

    Returns:
        dict: Combined report keyed by scenario name
    """
    out_dir = Path(out_dir)
    combined = {}
    for name, config in reference_scenarios(steps).items():
        if tol is not None:
            config = with_tolerance(config, tol)
        prepared = prepare_scenario(config)
        series = run_scan(config, threads, prepared)
        csv_path = emit_csv(series, out_dir / f"{name}.csv")

        report = certify_scenario(config, threads, prepared=prepared, series=series)
        validate_report(report)
        combined[name] = report

        checkpoints = report["relations"]["checkpoints"]
        click.echo(
            f"{name}: F(tau) = {checkpoints['F_tau']:.12f}  C(tau/2) = {checkpoints['C_half_tau']:.12f}  "
            f"symmetric = {report['relations']['symmetric']}  -> {csv_path}"
        )

    path = write_json({"scenarios": combined}, out_dir / "repro_report.json")
    click.echo(f"report -> {path}")
    return combined
