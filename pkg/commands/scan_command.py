from pathlib import Path

import click

from utils.config_functions import ScenarioConfig, config_echo
from utils.errors import ValidationError
from utils.logging_functions import emit_csv
from utils.scan_functions import prepare_scenario, run_scan, verify_relations


def scan_relations(config: ScenarioConfig, series, tau):
    """verify_relations on the scan grid, or None when tau or tau/2 is off the grid."""
    if tau is None:
        return None
    try:
        return verify_relations(series, tau, config.tolerance("relations"))
    except ValidationError as e:
        click.echo(f"relations skipped: {e}")
        return None


def run_scan_command(config: ScenarioConfig, out_dir, threads=1):
    """Pantalla de escaneo temporal: CSV de la serie y eco de la configuracion"""
    out_dir = Path(out_dir)
    prepared = prepare_scenario(config)
    series = run_scan(config, threads, prepared)

    # --- Escribir salidas ---
    csv_path = emit_csv(series, config.output("csv") or out_dir / f"{config.name}.csv")
    echo_path = out_dir / f"{config.name}.cfg"
    echo_path.parent.mkdir(parents=True, exist_ok=True)
    echo_path.write_text(config_echo(config), encoding="utf-8")

    relations = scan_relations(config, series, prepared.tau)
    click.echo(f"{len(series)} rows -> {csv_path}")
    if relations is not None:
        checkpoints = relations["checkpoints"]
        click.echo(
            f"F(tau) = {checkpoints['F_tau']:.12f}  C(tau/2) = {checkpoints['C_half_tau']:.12f}  "
            f"max C = {relations['max_mmc']:.12f} at t = {relations['t_at_max_mmc']:.6f}"
        )
    return {"csv": str(csv_path), "config": str(echo_path), "rows": len(series), "relations": relations}
