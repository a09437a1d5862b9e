import sys

import click

from consistlib import scenario, util
from consistlib.cli.common import cli, pass_runtime
from consistlib.exceptions import ScenarioError


@cli.command("validate", short_help="Load a scenario without running it")
@click.argument("scenario_file", metavar="SCENARIO")
@pass_runtime
def validate_cli(runtime, scenario_file):
    """Parse SCENARIO, resolve every reference and assemble every matrix.
Errors carry the file position of the offending entry.

    $ consistlab validate my-scenario.yml
"""
    runtime.initialize()
    try:
        loaded = scenario.load_scenario(scenario.resolve_path(scenario_file))
    except ScenarioError as e:
        util.red_prefix("Invalid: ")
        click.echo(str(e))
        sys.exit(1)
    util.green_prefix("Valid: ")
    click.echo("{} ({} checks, {} refinement levels, digest {})".format(
        loaded.name, len(loaded.checks), len(loaded.ladder), loaded.digest))
