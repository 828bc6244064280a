import click

BANNER_WIDTH = 60


def show_header(command, scenario=None, quiet=False):
    """
    Muestra el encabezado de la ejecucion

    Args:
        command (str): Subcommand being run
        scenario (str): Scenario name, if any
        quiet (bool): Skip the banner entirely
    """
    if quiet:
        return
    click.secho("QST LAB", bold=True)
    subtitle = f"{command}" if scenario is None else f"{command} - {scenario}"
    click.echo(subtitle)
    click.echo("-" * BANNER_WIDTH)
