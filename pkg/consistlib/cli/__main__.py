# -*- coding: utf-8 -*-
"""
consistlab runs declarative scenarios that check consistency of operator
semigroups on finite-dimensional interpolation couples.
"""
import sys

from consistlib.cli.common import cli
from consistlib.exceptions import ConsistlabFatalError
from consistlib.util import red_prefix

# cli commands
from consistlib.cli.run_cli import run_cli
from consistlib.cli.validate_cli import validate_cli
from consistlib.cli.list_fixtures_cli import list_fixtures_cli


def main():
    try:
        cli(obj={})
    except ConsistlabFatalError as ex:
        # Allow capturing actual exit code
        red_prefix("consistlab command failed: ")
        print(str(ex), file=sys.stderr)
        sys.exit(1)


if __name__ == '__main__':
    main()
