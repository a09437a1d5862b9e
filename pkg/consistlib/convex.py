"""
Conic solves behind K-functionals, sum norms and optimization-path dual
norms. Each solver compiles its cvxpy problem once with the input vector
and t as parameters, so repeated solves on one couple only re-run the
numerical backend.
"""
import threading
import warnings

import cvxpy as cp
import numpy as np

from consistlib import constants, logutil
from consistlib.exceptions import ConvergenceError, UnsupportedNormError

logger = logutil.getLogger(__name__)

_settings = {"solver": constants.DEFAULT_SOLVER}

ACCEPTED = (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)

# warnings.catch_warnings swaps process-wide state
_warnings_lock = threading.Lock()


def set_default_solver(name):
    """Select the cvxpy backend used by solvers created afterwards"""
    if name not in cp.installed_solvers():
        raise ConvergenceError("solver {} is not installed (have: {})".format(name, ", ".join(cp.installed_solvers())))
    _settings["solver"] = name


def default_solver():
    return _settings["solver"]


def solver_options(name):
    if name == "CLARABEL":
        return dict(constants.CLARABEL_OPTIONS)
    return {}


def _solve(problem, solver, what):
    """Solve in place, logging anything cvxpy or the backend warns about
    instead of letting it reach stderr"""
    with _warnings_lock, warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            problem.solve(solver=solver, **solver_options(solver))
        except cp.error.SolverError as e:
            raise ConvergenceError("{}: solver {} failed: {}".format(what, solver, e))
        finally:
            log = logutil.entity_logger(what, __name__)
            for w in caught:
                log.info("%s: %s", w.category.__name__, w.message)
    if problem.status not in ACCEPTED:
        raise ConvergenceError("{}: solver status {}".format(what, problem.status), status=problem.status)
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.debug("%s: solver reports an inaccurate optimum", what)
    return problem.status


def real_vector(x, what):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        if np.any(np.imag(x) != 0):
            raise UnsupportedNormError("{}: optimization paths take real vectors".format(what))
        x = np.real(x)
    return x.astype(float)


class KFunctionalSolver(object):
    """min ||x0||_X0 + t ||x1||_X1 subject to x0 + x1 = x.

    The multiplier of the splitting constraint is a dual-feasible functional,
    which certifies the duality gap whenever both endpoint duals are available
    in closed form.
    """

    def __init__(self, couple, solver=None):
        n = couple.dimension
        self.couple = couple
        self.solver = solver or default_solver()
        self._x = cp.Parameter(n)
        self._t = cp.Parameter(nonneg=True)
        self._x0 = cp.Variable(n)
        self._x1 = cp.Variable(n)
        n0, c0 = couple.X0.cvx_norm(self._x0)
        n1, c1 = couple.X1.cvx_norm(self._x1)
        self._split = self._x0 + self._x1 == self._x
        self._problem = cp.Problem(cp.Minimize(n0 + self._t * n1), [self._split] + c0 + c1)

    def solve(self, t, x):
        """Return (x0, x1, lower_bound, solver_value, certified, status)"""
        x = real_vector(x, "K-functional")
        self._x.value = x
        self._t.value = float(t)
        status = _solve(self._problem, self.solver, "K-functional at t={:g}".format(t))
        x1 = np.asarray(self._x1.value, dtype=float)
        x0 = x - x1
        lower, certified = None, False
        g = self._split.dual_value
        if g is not None:
            g = np.asarray(g, dtype=float)
            d0 = self.couple.X0.euclidean_dual(g)
            d1 = self.couple.X1.euclidean_dual(g)
            if d0 is not None and d1 is not None:
                scale = max(d0, d1 / t)
                lower = abs(float(g @ x)) / scale if scale > 0 else 0.0
                certified = True
        return x0, x1, lower, float(self._problem.value), certified, status


class DualNormSolver(object):
    """sup { g.x : ||x||_X <= 1 } for a space with a conic norm"""

    def __init__(self, space, solver=None):
        n = space.dimension
        self.space = space
        self.solver = solver or default_solver()
        self._g = cp.Parameter(n)
        self._y = cp.Variable(n)
        norm, cons = space.cvx_norm(self._y)
        self._problem = cp.Problem(cp.Maximize(self._g @ self._y), [norm <= 1] + cons)

    def solve(self, g):
        """Return (value, maximizer). The value is the solver optimum"""
        g = real_vector(g, "dual norm")
        if not np.any(g):
            return 0.0, np.zeros_like(g)
        self._g.value = g
        _solve(self._problem, self.solver, "dual norm")
        return float(self._problem.value), np.asarray(self._y.value, dtype=float)


class SolverCache(object):
    """Per-thread solver instances; cvxpy problems are not safe to share
    between threads because parameters are assigned in place."""

    def __init__(self, factory):
        self._factory = factory
        self._local = threading.local()

    def get(self):
        solvers = getattr(self._local, "solvers", None)
        if solvers is None:
            solvers = self._local.solvers = {}
        name = default_solver()
        if name not in solvers:
            solvers[name] = self._factory(name)
        return solvers[name]
