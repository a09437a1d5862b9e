import hashlib
from multiprocessing import cpu_count
from multiprocessing.dummy import Pool as ThreadPool

import click
import numpy as np

from consistlib import constants
from consistlib.exceptions import DimensionMismatchError, ParameterRangeError


def red_prefix(msg, file=None):
    """Print out a message prefix in bold red letters, like for "Error: "
messages"""
    click.secho(msg, nl=False, bold=True, fg='red', file=file)


def green_prefix(msg, file=None):
    """Print out a message prefix in bold green letters, like for "Success: "
messages"""
    click.secho(msg, nl=False, bold=True, fg='green', file=file)


def yellow_prefix(msg, file=None):
    """Print out a message prefix in bold yellow letters, like for "Warning: "
or Notice: messages"""
    click.secho(msg, nl=False, bold=True, fg='yellow', file=file)


def verdict_print(verdict, msg, file=None):
    """Print a check line led by its verdict in the matching color"""
    prefix = {
        constants.VERDICT_PASS: green_prefix,
        constants.VERDICT_FAIL: red_prefix,
        constants.VERDICT_INCONCLUSIVE: yellow_prefix,
    }[verdict]
    prefix("{:<13}".format(verdict.upper()), file=file)
    click.echo(msg, file=file)


def progress_func(func, char='*', file=None):
    """Use to wrap functions called in parallel. Prints a character for
each function call.

    :param lambda-function func: A 'lambda wrapped' function to call
    after printing a progress character
    :param str char: The character to print before calling `func`
    :param file: the file to print the progress. None means stdout.
    """
    click.secho(char, fg='green', nl=False, file=file)
    return func()


def parallel_results_with_progress(inputs, func, jobs=None, file=None):
    """Run a function against a list of inputs with a progress bar.
Results come back in input order regardless of completion order.

    :param sequence inputs : A sequence of items to iterate over in parallel
    :param lambda-function func: A lambda function to call with one arg to process
    :param int jobs: Pool size, defaults to the logical core count

    Example output:
    [****************]
    """
    click.secho('[', nl=False, file=file)
    pool = ThreadPool(jobs or cpu_count())
    results = pool.map(
        lambda it: progress_func(lambda: func(it), file=file),
        inputs)

    # Wait for results
    pool.close()
    pool.join()
    click.echo(']', file=file)

    return results


def derive_seed(base_seed, name):
    """Seed for one named job: stable under reordering of sibling jobs.

    >>> derive_seed(7, "semigroup-law") == derive_seed(7, "semigroup-law")
    True
    """
    digest = hashlib.sha256("{}:{}".format(int(base_seed), name).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def format_number(value):
    """Serialize a measured constant with 17 significant digits"""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return format(float(value), constants.NUMBER_FORMAT)


def as_vector(x, n=None, what="vector"):
    """Coerce to a 1-D float (or complex) array, checking its length against n"""
    v = np.asarray(x)
    if not np.iscomplexobj(v):
        v = v.astype(float)
    v = np.atleast_1d(v)
    if v.ndim != 1:
        raise DimensionMismatchError(n, v.shape, what)
    if n is not None and v.shape[0] != n:
        raise DimensionMismatchError(n, v.shape[0], what)
    return v


def as_square_matrix(A, n=None, what="matrix"):
    M = np.asarray(A)
    if not np.iscomplexobj(M):
        M = M.astype(float)
    M = np.atleast_2d(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError("square", M.shape, what)
    if n is not None and M.shape[0] != n:
        raise DimensionMismatchError(n, M.shape[0], what)
    return M


def check_positive(name, value, strict=True):
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        raise ParameterRangeError(name, value, "{} > 0".format(name) if strict else "{} >= 0".format(name))
    return value


def check_theta(theta):
    if not 0 < theta < 1:
        raise ParameterRangeError("theta", theta, "0 < theta < 1")
    return float(theta)


def check_exponent(name, p):
    p = float(p)
    if np.isnan(p) or p < 1:
        raise ParameterRangeError(name, p, "1 <= {} <= inf".format(name))
    return p


def conjugate_exponent(p):
    """Hoelder conjugate q with 1/p + 1/q = 1"""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def rng(seed):
    return np.random.default_rng(seed)
