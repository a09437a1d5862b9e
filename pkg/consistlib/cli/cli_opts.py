from consistlib import constants

CLI_OPTS = {
    'output_dir': {
        'env': 'CONSISTLAB_OUTPUT_DIR',
        'help': 'Default directory for run reports'
    },
    'working_dir': {
        'env': 'CONSISTLAB_WORKING_DIR',
        'help': 'Persistent working directory to use (holds debug.log)'
    },
    'jobs': {
        'env': 'CONSISTLAB_JOBS',
        'help': 'Number of checks run in parallel (defaults to the logical core count)'
    },
    'solver': {
        'env': 'CONSISTLAB_SOLVER',
        'help': 'cvxpy backend for K-functional and dual-norm solves',
        'default': constants.DEFAULT_SOLVER,
    },
}

CLI_ENV_VARS = {k: v['env'] for (k, v) in CLI_OPTS.items()}

CLI_DEFAULTS = {k: v['default'] for (k, v) in CLI_OPTS.items() if 'default' in v}

CLI_CONVERTERS = {'jobs': int}

CLI_CONFIG_TEMPLATE = '\n'.join(['#{}\n{}:\n'.format(v['help'], k) for (k, v) in CLI_OPTS.items()])


def formats_convert(values):
    # --format tree --format table,tree -> ['tree', 'table'] in first-seen order
    out = []
    for value in values:
        for f in [c.strip() for c in value.split(',') if c.strip()]:
            if f not in constants.REPORT_FORMATS:
                raise ValueError("unknown report format '{}'; choose from {}".format(
                    f, ", ".join(constants.REPORT_FORMATS)))
            if f not in out:
                out.append(f)
    return out
