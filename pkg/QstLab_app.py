import functools
import warnings

import click
import jsonschema

# Importar comandos y componentes
from commands import (
    run_certify_command,
    run_repro_command,
    run_scan_command,
    run_spectrum_command,
    run_theorem_command,
)
from components.header import show_header
from utils.config_functions import load_config, load_environment, with_tolerance
from utils.errors import ConfigurationError, QstLabError, QstLabWarning
from utils.logging_functions import get_run_logs, save_run_log


def load_scenario(settings, required=True):
    """Scenario from --config with the --tol override applied."""
    path = settings["config_path"]
    if path is None:
        if required:
            raise ConfigurationError("this command needs --config <path>", "config")
        return None
    config = load_config(path)
    if settings["tol"] is not None:
        config = with_tolerance(config, settings["tol"])
    return config


def lab_command(name):
    """
    Run a subcommand with the banner, warning echo, exit codes and run registry.

    The wrapped function receives the settings dict and returns a short
    detail string for the registry.
    """
    def decorator(func):
        @functools.wraps(func)
        @click.pass_context
        def wrapper(ctx, *args, **kwargs):
            settings = ctx.obj
            scenario = settings["config_path"] or "-"
            show_header(name, scenario, settings["quiet"])
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", QstLabWarning)
                try:
                    detail = func(settings, *args, **kwargs) or ""
                    status, code = "ok", 0
                except QstLabError as e:
                    status = "numerical_failure" if e.exit_code == 3 else "validation_error"
                    code, detail = e.exit_code, str(e)
                except jsonschema.ValidationError as e:
                    status, code, detail = "validation_error", 2, f"report schema: {e.message}"
                except OSError as e:
                    status, code, detail = "validation_error", 2, str(e)
            for warning in caught:
                click.secho(f"warning: {warning.message}", fg="yellow", err=True)
            if code:
                click.secho(f"error: {detail}", fg="red", err=True)
            save_run_log(name, scenario, status, detail, settings["run_log"])
            ctx.exit(code)
        return wrapper
    return decorator


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Scenario file (key = value text, or .json).")
@click.option("--out", "out_dir", default=None, help="Output directory (QSTLAB_OUT_DIR).")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads (QSTLAB_THREADS).")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Override every tolerance (QSTLAB_TOL).")
@click.option("--quiet", is_flag=True, help="No banner.")
@click.pass_context
def cli(ctx, config_path, out_dir, threads, tol, quiet):
    """Perfect state transfer and mirror mode entanglement lab."""
    try:
        env = load_environment()
    except ConfigurationError as e:
        click.secho(f"error: {e}", fg="red", err=True)
        ctx.exit(2)
    ctx.obj = {
        "config_path": config_path,
        "out_dir": out_dir or env["out_dir"],
        "threads": threads or env["threads"],
        "tol": tol if tol is not None else env["tol"],
        "run_log": env["run_log"],
        "quiet": quiet,
    }


@cli.command("scan")
@lab_command("scan")
def scan(settings):
    """Time series t, fidelity, mmc, overlap_bound as CSV."""
    result = run_scan_command(load_scenario(settings), settings["out_dir"], settings["threads"])
    return f"{result['rows']} rows -> {result['csv']}"


@cli.command("certify")
@click.option("--tau", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Transfer time (default: closed form, spectral quantum, or a fidelity scan).")
@click.option("--pdf", type=click.Path(dir_okay=False), default=None, help="Also render the report as PDF.")
@lab_command("certify")
def certify(settings, tau, pdf):
    """PST certificate, commensurability, parity and relations report."""
    report = run_certify_command(load_scenario(settings), settings["out_dir"], settings["threads"], tau, pdf)
    certificate = report["certificate"]
    return f"certified={certificate['certified']} deviation={certificate['max_deviation']:.3e}"


@cli.command("spectrum")
@click.option("--n-max", type=click.IntRange(min=4), default=64, show_default=True,
              help="Largest N in the (m, l) sweep.")
@lab_command("spectrum")
def spectrum(settings, n_max):
    """Closed-form spectrum and parity sweep, plus the --config chain if given."""
    tol = settings["tol"] if settings["tol"] is not None else 1e-9
    result = run_spectrum_command(settings["out_dir"], n_max, load_scenario(settings, required=False), tol)
    table = result["table"]
    return f"{len(table)} chains, {int(table['certified'].sum())} certified"


@cli.command("theorem")
@click.option("--packets", type=click.IntRange(min=1), default=100, show_default=True,
              help="Random real packets per model.")
@click.option("--seed", type=int, default=0, show_default=True)
@lab_command("theorem")
def theorem(settings, packets, seed):
    """F(tau) = 1 <=> C(tau/2) = 1 on every certified model."""
    document = run_theorem_command(settings["out_dir"], packets, seed)
    return f"passed={document['passed']}"


@cli.command("repro")
@click.option("--steps", type=click.IntRange(min=4), default=4000, show_default=True)
@lab_command("repro")
def repro(settings, steps):
    """Reference scenarios: one CSV each plus a combined JSON report."""
    combined = run_repro_command(settings["out_dir"], steps, settings["threads"], settings["tol"])
    return f"{len(combined)} scenarios"


@cli.command("logs")
@click.option("--limit", type=click.IntRange(min=1), default=50, show_default=True)
@click.pass_context
def logs(ctx, limit):
    """Tail of the run registry."""
    df_logs = get_run_logs(ctx.obj["run_log"], limit)
    if df_logs.empty:
        click.echo("No hay ejecuciones registradas.")
    else:
        click.echo(df_logs.to_string(index=False))


def main():
    """Función principal de la aplicación"""
    cli()


if __name__ == "__main__":
    main()
