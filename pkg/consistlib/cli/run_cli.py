import sys

import click

from consistlib import report, scenario, util
from consistlib.cli import cli_opts
from consistlib.cli.common import cli, pass_runtime
from consistlib.exceptions import ScenarioError


#
# Run a scenario and write its reports
# consistlab:run
#
@cli.command("run", short_help="Run every check of a scenario")
@click.argument("scenario_file", metavar="SCENARIO")
@click.option("--out", "out_dir", metavar="DIR", default=None,
              help="Report directory [default: $CONSISTLAB_OUTPUT_DIR or the current directory]")
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=None,
              help="Checks run in parallel [default: logical core count]")
@click.option("--seed", type=int, default=None,
              help="Override the scenario's base seed")
@click.option("--format", "formats", multiple=True, default=["tree,table"],
              help="Comma separated report formats: tree, table [default: tree,table]")
@pass_runtime
def run_cli(runtime, scenario_file, out_dir, jobs, seed, formats):
    """Load SCENARIO (a file, or the name of a shipped fixture), run its
checks and write SCENARIO_NAME.report.yml and SCENARIO_NAME.table.csv.

Exit status is 0 when every check passed, 1 when any check failed and 2
when none failed but some were inconclusive.

    $ consistlab run lp-domain-interpolation --out reports --jobs 4
"""
    runtime.initialize()
    try:
        formats = cli_opts.formats_convert(formats)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--format")
    try:
        loaded = scenario.load_scenario(scenario.resolve_path(scenario_file))
    except ScenarioError as e:
        util.red_prefix("Error: ")
        click.echo(str(e), err=True)
        sys.exit(1)

    runtime.logger.info("Running %s (%d checks, digest %s)", loaded.name, len(loaded.checks), loaded.digest[:12])
    result = scenario.run_scenario(loaded, jobs=jobs or runtime.jobs, seed=seed, progress_file=sys.stderr)
    for check in result.checks:
        util.verdict_print(check.verdict, check.name)
        for reason in check.to_dict().get("failures", []) + check.to_dict().get("inconclusive", []):
            click.echo("    {}".format(reason))
    try:
        written = report.emit_report(result, formats, runtime.report_dir(out_dir))
    except (PermissionError, OSError) as e:
        util.red_prefix("Error: ")
        click.echo("cannot write reports: {}".format(e), err=True)
        sys.exit(1)
    for path in written:
        click.echo(path)
    summary = result.summary()
    click.echo(", ".join("{} {}".format(summary[v], v) for v in sorted(summary)))
    sys.exit(result.exit_code)
