import click

from consistlib import scenario
from consistlib.cli.common import cli


@cli.command("list-fixtures", short_help="List the scenarios shipped with consistlab")
@click.option("--paths", is_flag=True, default=False, help="Print file paths instead of names")
def list_fixtures_cli(paths):
    """Print one shipped fixture per line; any of them can be passed to run
or validate by name."""
    for name in scenario.list_fixtures():
        click.echo(scenario.fixture_path(name) if paths else name)
