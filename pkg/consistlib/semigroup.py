"""
Matrix semigroups S_t = exp(-tA), resolvents (A + lambda)^-1, the backward
Euler approximation, Laplace-transform quadrature and semigroup diagnostics.

Generators are stored as the matrix A; the generator proper is -A.
"""
import math
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from consistlib import constants, logutil, opnorm, util
from consistlib.exceptions import (IllConditionedError, ParameterRangeError,
                                   SemigroupOverflowError, SingularShiftError)
from consistlib.report import CheckReport

logger = logutil.getLogger(__name__)


def _pade13(M):
    b = constants.PADE13_COEFFICIENTS
    ident = np.eye(M.shape[0], dtype=M.dtype)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident
    return U, V


def semigroup_matrix(A, t):
    """exp(-tA) by scaling and squaring with the diagonal Pade approximant of
    order 13, scaled so that ||tA||_2 / 2^s <= theta_13.

    :raises SemigroupOverflowError: the result is not finite
    """
    A = util.as_square_matrix(A)
    t = util.check_positive("t", float(t), strict=False)
    n = A.shape[0]
    if t == 0 or not np.any(A):
        return np.eye(n, dtype=A.dtype)
    M = -t * A
    norm = np.linalg.norm(M, 2)
    s = max(0, int(math.ceil(math.log2(norm / constants.PADE13_THETA)))) if norm > 0 else 0
    M = M / 2.0 ** s
    U, V = _pade13(M)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            R = linalg.solve(V - U, V + U)
        except (linalg.LinAlgError, ValueError) as e:
            raise SemigroupOverflowError("Pade denominator could not be solved at t*||A|| = {:.3g}: {}".format(t * norm, e))
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise SemigroupOverflowError("exp(-tA) overflowed at t*||A|| = {:.3g} ({} squarings)".format(t * norm, s))
    return R


def expm_apply(A, t, x):
    """exp(-tA) x; t = 0 returns x unchanged"""
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    if t == 0:
        return x.copy()
    return semigroup_matrix(A, t) @ x


class ShiftedFactorization(object):
    """LU factorization of a*I + b*A, immutable once built and safe to share.

    :raises SingularShiftError: the matrix is singular
    :raises IllConditionedError: the 1-norm condition number exceeds MAX_CONDITION
    """

    def __init__(self, A, shift, scale=1.0, what="A + lambda I"):
        A = util.as_square_matrix(A)
        self.what = what
        self.matrix = scale * A + shift * np.eye(A.shape[0])
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            try:
                self._lu = linalg.lu_factor(self.matrix)
            except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError) as e:
                raise SingularShiftError("{} is singular: {}".format(what, e), condition=np.inf)
        try:
            with np.errstate(all="ignore"):
                self.condition = float(np.linalg.cond(self.matrix, 1))
        except np.linalg.LinAlgError:
            self.condition = np.inf
        if not np.isfinite(self.condition):
            raise SingularShiftError("{} is singular".format(what), condition=self.condition)
        if self.condition > constants.MAX_CONDITION:
            raise IllConditionedError("{} has condition estimate {:.3e} above {:.0e}".format(
                what, self.condition, constants.MAX_CONDITION), condition=self.condition)

    def solve_raw(self, x):
        return linalg.lu_solve(self._lu, x)

    def solve(self, x):
        """Solve with a residual check; one step of iterative refinement when
        the residual exceeds RESIDUAL_TOLERANCE ||x||"""
        y = linalg.lu_solve(self._lu, x)
        limit = constants.RESIDUAL_TOLERANCE * np.linalg.norm(x)
        r = x - self.matrix @ y
        if np.linalg.norm(r) > limit:
            y = y + linalg.lu_solve(self._lu, r)
            r = x - self.matrix @ y
            if np.linalg.norm(r) > limit:
                logger.warning("%s solve residual %.3e above %.3e (condition %.3e)",
                               self.what, np.linalg.norm(r), limit, self.condition)
        return y


def resolvent_apply(A, lam, x):
    """(A + lambda I)^-1 x"""
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    util.check_positive("lambda", float(lam))
    return ShiftedFactorization(A, float(lam)).solve(x)


def euler_apply(A, t, n, x):
    """(I + (t/n) A)^-n x by n solves with one factorization"""
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    util.check_positive("t", float(t))
    if int(n) != n or n < 1:
        raise ParameterRangeError("n", n, "integer n >= 1")
    fac = ShiftedFactorization(A, 1.0, scale=float(t) / n, what="I + (t/n) A")
    y = x
    for _ in range(int(n)):
        y = fac.solve_raw(y)
    return y


class QuadratureResult(object):
    def __init__(self, value, error_bound, truncation, approximate, panels):
        self.value = value
        self.error_bound = error_bound
        self.truncation = truncation
        self.approximate = approximate
        self.panels = panels


def _graded_pieces(T, stiffness, steps):
    """Dyadic pieces of [0, T] refined towards 0, as (start, panel width, panel count)"""
    K = max(int(math.ceil(math.log2(max(T * stiffness, 1.0)))) + 2, 1)
    edges = [0.0] + [T * 2.0 ** -k for k in range(K - 1, -1, -1)]
    per_piece = max(1, int(math.ceil(steps / float(K))))
    return [(a, (b - a) / per_piece, per_piece) for a, b in zip(edges[:-1], edges[1:])]


def laplace_resolvent_quadrature(A, lam, x, horizon=None, steps=constants.LAPLACE_DEFAULT_STEPS,
                                 decay_margin=0.0, tol=1e-8, norm=None):
    """int_0^T exp(-lambda t) exp(-tA) x dt by composite Gauss-Legendre rules.

    Panels within a dyadic piece share their width, so node states are
    propagated panel to panel with one exponential per piece and node offset.
    The error bound adds |Q8 - Q6| on the same panels, the truncation remainder
    M exp(-(lambda - omega) T) / (lambda - omega) with M the largest
    ||S_t x|| met on the nodes, and a roundoff floor.

    :param horizon: T, default 40 / lambda
    :param decay_margin: omega with ||exp(-tA)|| <= M exp(omega t)
    :param norm: vector norm for the error bound, default Euclidean
    """
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    lam = float(lam)
    if lam <= decay_margin:
        raise ParameterRangeError("lambda", lam, "lambda > decay margin {:g}".format(decay_margin))
    norm = norm or np.linalg.norm
    T = float(horizon) if horizon else constants.LAPLACE_HORIZON_FACTOR / lam
    pieces = _graded_pieces(T, np.linalg.norm(A, 2) + lam, steps)
    nodes8, weights8 = leggauss(constants.LAPLACE_GAUSS_ORDER)
    nodes6, weights6 = leggauss(constants.LAPLACE_CHECK_ORDER)
    q8 = np.zeros_like(x, dtype=np.result_type(A, x))
    q6 = np.zeros_like(q8)
    traj_bound = norm(x)
    abs_sum = 0.0
    panels = 0
    for start, width, count in pieces:
        half = 0.5 * width
        rules = [(nodes, weights, [semigroup_matrix(A, half * (1 + s)) for s in nodes], acc)
                 for nodes, weights, acc in ((nodes8, weights8, q8), (nodes6, weights6, q6))]
        step = semigroup_matrix(A, width)
        y = expm_apply(A, start, x)
        for k in range(count):
            a = start + k * width
            for nodes, weights, offsets, acc in rules:
                for s, w, S in zip(nodes, weights, offsets):
                    t = a + half * (1 + s)
                    v = S @ y
                    c = half * w * math.exp(-lam * t)
                    acc += c * v
                    if acc is q8:
                        nv = norm(v)
                        traj_bound = max(traj_bound, nv)
                        abs_sum += c * nv
            y = step @ y
            panels += 1
    margin = lam - decay_margin
    truncation = traj_bound * math.exp(-margin * T) / margin
    error = norm(q8 - q6) + truncation + 64 * constants.EPS * abs_sum
    approximate = error > tol * max(norm(q8), np.finfo(float).tiny)
    if approximate:
        logger.debug("Laplace quadrature at lambda=%g: error bound %.3e above tolerance", lam, error)
    return QuadratureResult(q8, error, truncation, approximate, panels)


class SemigroupBound(object):
    def __init__(self, times, brackets):
        self.times = list(times)
        self.brackets = list(brackets)

    @property
    def sup_lower(self):
        return max(b.lower for b in self.brackets)

    @property
    def sup_upper(self):
        return max(b.upper for b in self.brackets)

    @property
    def certified(self):
        return all(b.certified_upper for b in self.brackets)


def semigroup_bound(A, X, times, seed=0):
    """Operator-norm brackets of exp(-tA) on X over the grid (t = 0 always included)"""
    A = util.as_square_matrix(A, X.dimension)
    times = sorted(set([0.0] + [float(t) for t in times]))
    brackets = []
    for k, t in enumerate(times):
        S = semigroup_matrix(A, t)
        brackets.append(opnorm.operator_norm(S, X, seed=seed + k))
    bound = SemigroupBound(times, brackets)
    logger.debug("semigroup bound on %s: sup lower %.6g over %d times", X.describe(), bound.sup_lower, len(times))
    return bound


def generator_residual(A, x, h, X):
    """|| (x - exp(-hA) x)/h - Ax ||_X, O(h) as h -> 0"""
    A = util.as_square_matrix(A, X.dimension)
    x = util.as_vector(x, X.dimension)
    h = util.check_positive("h", float(h))
    return X.norm((x - expm_apply(A, h, x)) / h - A @ x)


class SemigroupTrajectory(object):
    def __init__(self, times, states, norms):
        self.times = times
        self.states = states
        self.norms = norms

    def law_defect(self, A, i, j):
        """Relative defect of state(t_i + t_j) = exp(-t_i A) state(t_j); t_i + t_j must be on the grid"""
        target = self.times[i] + self.times[j]
        k = int(np.argmin(np.abs(np.asarray(self.times) - target)))
        if not np.isclose(self.times[k], target, rtol=1e-14, atol=0):
            raise ParameterRangeError("t_i + t_j", target, "on the trajectory time grid")
        lhs = self.states[k]
        rhs = expm_apply(A, self.times[i], self.states[j])
        return np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.finfo(float).tiny)


def trajectory(A, X, times, x):
    """States exp(-tA)x and their X norms on an increasing time grid"""
    A = util.as_square_matrix(A, X.dimension)
    x = util.as_vector(x, X.dimension)
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times[:-1], times[1:])) or (times and times[0] < 0):
        raise ParameterRangeError("times", times, "increasing, nonnegative")
    states = [expm_apply(A, t, x) for t in times]
    return SemigroupTrajectory(times, states, [X.norm(s) for s in states])


class GeneratorRealization(object):
    """A matrix A acting on a normed space; the semigroup is exp(-tA)"""

    def __init__(self, A, X, spectral_shift=0.0, name=None):
        self.A = util.as_square_matrix(A, X.dimension)
        self.X = X
        self.spectral_shift = util.check_positive("spectral_shift", float(spectral_shift), strict=False)
        self.name = name or "A on {}".format(X.describe())

    @property
    def dimension(self):
        return self.A.shape[0]

    def resolvent_factorization(self, lam):
        return ShiftedFactorization(self.A, float(lam), what="{} + {:g} I".format(self.name, lam))

    def check_shifts(self, lambdas):
        """Factorizes A + lambda for every lambda; raises on a singular or ill-conditioned shift"""
        return [self.resolvent_factorization(lam).condition for lam in lambdas]

    def semigroup(self, t, x):
        return expm_apply(self.A, t, x)

    def resolvent(self, lam, x):
        return resolvent_apply(self.A, lam, x)

    def with_space(self, X, name=None):
        return GeneratorRealization(self.A, X, self.spectral_shift, name)

    def __repr__(self):
        return "<GeneratorRealization {}>".format(self.name)


def semigroup_law_check(A, x, times, tol=1e-9, name="semigroup_law"):
    """exp(-(s+t)A)x = exp(-sA)exp(-tA)x for every pair s, t of the grid"""
    report = CheckReport(name)
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    worst = 0.0
    for s in times:
        for t in times:
            lhs = expm_apply(A, s + t, x)
            rhs = expm_apply(A, s, expm_apply(A, t, x))
            dev = np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.finfo(float).tiny)
            if dev > worst:
                worst = dev
                report.worst_cases = [{"s": float(s), "t": float(t), "deviation": float(dev)}]
    report.require("law_defect", worst, 0.0, tol)
    return report


def euler_convergence_study(A, x, t, ns):
    """Relative errors of n-step Euler against exp(-tA)x and their log-log slope"""
    exact = expm_apply(A, t, x)
    scale = np.linalg.norm(exact)
    errors = np.array([np.linalg.norm(euler_apply(A, t, n, x) - exact) / scale for n in ns])
    slope = float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(errors), 1)[0])
    return errors, slope


def euler_convergence_check(A, x, t, ns, order=1.0, order_tol=0.15, max_final_error=None,
                            name="euler_convergence"):
    report = CheckReport(name)
    errors, slope = euler_convergence_study(A, x, t, ns)
    for n, e in zip(ns, errors):
        report.measure("error@n={}".format(n), e)
    if max_final_error is not None:
        scale = np.linalg.norm(expm_apply(A, t, x))
        report.require("final_abs_error", errors[-1] * scale, max_final_error, 0.0)
    report.require("slope", slope, -order, order_tol, ">=")
    report.require("slope_upper", slope, -order, order_tol, "<=")
    report.note("Euler iterate (I + (t/n)A)^-n x; the unscaled product (A + (t/n) I)^-n "
                "misses the factor (n/t)^n and does not converge to S_t x")
    return report


def laplace_quadrature_check(A, lambdas, x, tol=1e-8, steps=constants.LAPLACE_DEFAULT_STEPS,
                             horizon=None, name="laplace_quadrature"):
    """Quadrature against the direct resolvent solve; each deviation must sit
    inside the quadrature's own error bound plus tol"""
    report = CheckReport(name)
    A = util.as_square_matrix(A)
    x = util.as_vector(x, A.shape[0])
    for lam in lambdas:
        q = laplace_resolvent_quadrature(A, lam, x, horizon=horizon, steps=steps, tol=tol)
        direct = resolvent_apply(A, lam, x)
        dev = np.linalg.norm(q.value - direct)
        report.require("deviation@lambda={:g}".format(lam), dev, q.error_bound, tol)
        report.measure("error_bound@lambda={:g}".format(lam), q.error_bound)
        if q.approximate:
            report.uncertified("quadrature at lambda={:g} above its tolerance".format(lam))
    return report
