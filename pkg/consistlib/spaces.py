"""
Discrete measure spaces and the normed spaces built over them.

Every space is a norm on the coordinate space R^n of a DiscreteMeasureSpace.
Functionals live in the same coordinates and pair through the measure:
<f, x> = sum_i w_i f_i conj(x_i). Under this pairing the dual of the weighted
l^p space is the weighted l^q space with the same weights.

Each kind can

* evaluate its norm on a numpy vector (`norm`),
* build a cvxpy expression of its norm (`cvx_norm`, returning the expression
  and any auxiliary constraints), used by the conic solvers,
* evaluate its Euclidean dual norm sup{g.x : ||x|| <= 1} in closed form when one
  exists (`euclidean_dual`, None otherwise).
"""
import threading

import cvxpy as cp
import numpy as np
from scipy import linalg

from consistlib import constants, convex, logutil, util
from consistlib.exceptions import (ConvergenceError, DimensionMismatchError,
                                   ParameterRangeError, UnsupportedNormError)
from consistlib.report import CheckReport

logger = logutil.getLogger(__name__)


class DiscreteMeasureSpace(object):
    """n atoms with strictly positive finite masses"""

    def __init__(self, weights):
        w = np.atleast_1d(np.asarray(weights, dtype=float)).copy()
        if w.ndim != 1 or w.shape[0] < 1:
            raise ParameterRangeError("n", w.shape, "n >= 1")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ParameterRangeError("weights", w.tolist(), "0 < w_i < inf")
        w.setflags(write=False)
        self.weights = w

    @classmethod
    def uniform(cls, n, mass=1.0):
        return cls(np.full(int(n), float(mass)))

    @property
    def n(self):
        return self.weights.shape[0]

    def same_as(self, other):
        return self is other or (self.n == other.n and np.array_equal(self.weights, other.weights))

    def __repr__(self):
        return "DiscreteMeasureSpace(n={})".format(self.n)


def lp_norm(v, p, w):
    """(sum w_i |v_i|^p)^(1/p), or max |v_i| at p = inf"""
    w = util.as_vector(w, what="weights")
    v = util.as_vector(v, w.shape[0])
    p = util.check_exponent("p", p)
    if np.any(w <= 0):
        raise ParameterRangeError("weights", w.tolist(), "0 < w_i")
    a = np.abs(v)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(np.sum(w * a))
    m = a.max()
    if m == 0:
        return 0.0
    # scaled to avoid overflow of |v|^p
    return float(m * np.sum(w * (a / m) ** p) ** (1.0 / p))


class NormedSpace(object):
    kind = None

    def __init__(self, base):
        self.base = base
        self._dual_solvers = convex.SolverCache(lambda name: convex.DualNormSolver(self, name))

    @property
    def dimension(self):
        return self.base.n

    @property
    def weights(self):
        return self.base.weights

    def _vector(self, x):
        return util.as_vector(x, self.dimension)

    def norm(self, x):
        raise NotImplementedError

    def cvx_norm(self, expr):
        raise UnsupportedNormError("{} has no conic formulation".format(self.describe()))

    def euclidean_dual(self, g):
        return None

    def dual_solver(self):
        return self._dual_solvers.get()

    @property
    def separable(self):
        """Whether finitely supported vectors are dense, i.e. no l^inf factor is involved"""
        return True

    def same_as(self, other):
        return self is other

    def describe(self):
        return self.kind

    def __repr__(self):
        return "<{} {}>".format(type(self).__name__, self.describe())


class WeightedLp(NormedSpace):
    """l^p(w); at p = inf the plain max norm (the measure does not enter)"""
    kind = "weighted_lp"

    def __init__(self, base, p):
        super(WeightedLp, self).__init__(base)
        self.p = util.check_exponent("p", p)

    def norm(self, x):
        return lp_norm(self._vector(x), self.p, self.weights)

    def cvx_norm(self, expr):
        p = self.p
        if np.isinf(p):
            return cp.norm_inf(expr), []
        if p == 1:
            return cp.norm1(cp.multiply(self.weights, expr)), []
        return cp.pnorm(cp.multiply(self.weights ** (1.0 / p), expr), p), []

    def euclidean_dual(self, g):
        g = self._vector(g)
        if np.isinf(self.p):
            return float(np.sum(np.abs(g)))
        return lp_norm(g / self.weights, util.conjugate_exponent(self.p), self.weights)

    @property
    def separable(self):
        return not np.isinf(self.p)

    def same_as(self, other):
        return self is other or (
            isinstance(other, WeightedLp) and self.p == other.p and self.base.same_as(other.base))

    def describe(self):
        return "l^{:g}(w)".format(self.p)


class Sobolev1p(NormedSpace):
    """Discrete W^{1,p}_D: (||u||_p^p + ||grad u||_p^p)^(1/p).

    `gradient` maps free-node values to edge differences (Dirichlet nodes are
    already eliminated, so zero trace is built in); `edge_weights` are the
    measures of the edges. `boundary` is the partition the space was built on.
    """
    kind = "sobolev"

    def __init__(self, base, p, gradient, edge_weights, boundary=None):
        super(Sobolev1p, self).__init__(base)
        self.p = util.check_exponent("p", p)
        if np.isinf(self.p):
            raise ParameterRangeError("p", p, "1 <= p < inf")
        G = np.atleast_2d(np.asarray(gradient, dtype=float))
        if G.shape[1] != self.dimension:
            raise DimensionMismatchError(self.dimension, G.shape[1], "gradient columns")
        e = util.as_vector(edge_weights, G.shape[0], "edge weights")
        self.gradient = G
        self.edge_weights = e
        self.boundary = boundary
        self._gram = None
        self._lock = threading.Lock()

    def norm(self, x):
        u = self._vector(x)
        return lp_norm(np.concatenate([u, self.gradient @ u]), self.p,
                       np.concatenate([self.weights, self.edge_weights]))

    def cvx_norm(self, expr):
        p = self.p
        stacked = cp.hstack([
            cp.multiply(self.weights ** (1.0 / p), expr),
            cp.multiply(self.edge_weights ** (1.0 / p), self.gradient @ expr),
        ])
        if p == 1:
            return cp.norm1(stacked), []
        return cp.pnorm(stacked, p), []

    def gram(self):
        """Cholesky factor of W + G^T E G, the matrix of the p = 2 norm"""
        with self._lock:
            if self._gram is None:
                M = np.diag(self.weights) + self.gradient.T @ (self.edge_weights[:, None] * self.gradient)
                self._gram = linalg.cho_factor(M)
            return self._gram

    def euclidean_dual(self, g):
        if self.p != 2:
            return None
        g = self._vector(g)
        return float(np.sqrt(max(g @ linalg.cho_solve(self.gram(), g), 0.0)))

    def describe(self):
        return "W^1,{:g}_D".format(self.p)


class DualOf(NormedSpace):
    """Functionals on X normed by sup |<f,x>| over the unit ball of X"""
    kind = "dual"

    def __init__(self, space, pairing=None):
        super(DualOf, self).__init__(space.base)
        self.space = space
        self.pairing = space.weights if pairing is None else util.as_vector(pairing, space.dimension, "pairing")

    def norm(self, f):
        return dual_norm(f, self.space, self.pairing)

    def cvx_norm(self, expr):
        if isinstance(self.space, WeightedLp):
            inner = self.space
            q = util.conjugate_exponent(inner.p)
            if np.isinf(inner.p):
                return cp.norm1(cp.multiply(self.pairing, expr)), []
            return WeightedLp(inner.base, q).cvx_norm(cp.multiply(self.pairing / inner.weights, expr))
        raise UnsupportedNormError("conic form of {} is only available over weighted l^p".format(self.describe()))

    def euclidean_dual(self, g):
        # bidual: sup{g.f : ||pairing * f||_X* <= 1} = ||g / pairing||_X
        return self.space.norm(self._vector(g) / self.pairing)

    def describe(self):
        return "({})'".format(self.space.describe())


class InterpolationCouple(object):
    """Two norms on one coordinate space"""

    def __init__(self, X0, X1):
        if X0.dimension != X1.dimension:
            raise DimensionMismatchError(X0.dimension, X1.dimension, "X1")
        self.X0 = X0
        self.X1 = X1
        self._k_solvers = convex.SolverCache(lambda name: convex.KFunctionalSolver(self, name))

    @property
    def dimension(self):
        return self.X0.dimension

    @property
    def identical(self):
        return self.X0.same_as(self.X1)

    def k_solver(self):
        return self._k_solvers.get()

    def describe(self):
        return "({}, {})".format(self.X0.describe(), self.X1.describe())

    def __repr__(self):
        return "<InterpolationCouple {}>".format(self.describe())


class Sum(NormedSpace):
    """X0 + X1 with inf over splits of ||x0||_0 + ||x1||_1"""
    kind = "sum"

    def __init__(self, couple):
        super(Sum, self).__init__(couple.X0.base)
        self.couple = couple

    def norm(self, x):
        return sum_norm(x, self.couple)

    def cvx_norm(self, expr):
        x1 = cp.Variable(self.dimension)
        n0, c0 = self.couple.X0.cvx_norm(expr - x1)
        n1, c1 = self.couple.X1.cvx_norm(x1)
        return n0 + n1, c0 + c1

    def euclidean_dual(self, g):
        d0 = self.couple.X0.euclidean_dual(g)
        d1 = self.couple.X1.euclidean_dual(g)
        if d0 is None or d1 is None:
            return None
        return max(d0, d1)

    @property
    def separable(self):
        return self.couple.X0.separable or self.couple.X1.separable

    def describe(self):
        return "{} + {}".format(self.couple.X0.describe(), self.couple.X1.describe())


class Intersection(NormedSpace):
    """X0 n X1 normed by ||x||_0 + ||x||_1"""
    kind = "intersection"

    def __init__(self, couple):
        super(Intersection, self).__init__(couple.X0.base)
        self.couple = couple

    def norm(self, x):
        return intersection_norm(x, self.couple)

    def cvx_norm(self, expr):
        n0, c0 = self.couple.X0.cvx_norm(expr)
        n1, c1 = self.couple.X1.cvx_norm(expr)
        return n0 + n1, c0 + c1

    @property
    def separable(self):
        return self.couple.X0.separable and self.couple.X1.separable

    def describe(self):
        return "{} n {}".format(self.couple.X0.describe(), self.couple.X1.describe())


class Graph(NormedSpace):
    """D(A) in X with the graph norm ||x|| + ||Ax||"""
    kind = "graph"

    def __init__(self, A, space):
        super(Graph, self).__init__(space.base)
        self.A = util.as_square_matrix(A, space.dimension, "generator")
        self.space = space

    def norm(self, x):
        return graph_norm(x, self.A, self.space)

    def cvx_norm(self, expr):
        n0, c0 = self.space.cvx_norm(expr)
        n1, c1 = self.space.cvx_norm(self.A @ expr)
        return n0 + n1, c0 + c1

    @property
    def separable(self):
        return self.space.separable

    def same_as(self, other):
        return (isinstance(other, Graph) and np.array_equal(self.A, other.A)
                and self.space.same_as(other.space))

    def describe(self):
        return "D(A) in {}".format(self.space.describe())


def dual_norm(f, X, pairing=None, method="auto"):
    """sup{ |<f,x>| : ||x||_X <= 1 } under the weighted pairing.

    :param method: "closed" for a closed form only, "optimize" for the conic
    solve only, "auto" for the closed form when the space has one
    :raises UnsupportedNormError: no closed form (method="closed") or no conic form
    :raises ConvergenceError: the conic solve failed
    """
    pairing = X.weights if pairing is None else util.as_vector(pairing, X.dimension, "pairing")
    f = util.as_vector(f, X.dimension, "functional")
    g = pairing * np.conj(f)
    if method in ("auto", "closed"):
        value = X.euclidean_dual(g)
        if value is not None:
            return float(value)
        if method == "closed":
            raise UnsupportedNormError("{} has no closed-form dual".format(X.describe()))
    elif method != "optimize":
        raise ValueError("method must be auto, closed or optimize")
    return optimized_dual_norm(g, X)


def optimized_dual_norm(g, X):
    """Euclidean dual norm of g over X by a conic solve"""
    value, _ = X.dual_solver().solve(g)
    return value


def sum_norm(x, couple):
    """inf over x = x0 + x1 of ||x0||_0 + ||x1||_1, i.e. the K-functional at t = 1"""
    from consistlib import interp
    return interp.k_functional(1.0, x, couple).value


def intersection_norm(x, couple):
    x = util.as_vector(x, couple.dimension)
    return couple.X0.norm(x) + couple.X1.norm(x)


def graph_norm(x, A, X):
    x = util.as_vector(x, X.dimension)
    A = util.as_square_matrix(A, X.dimension, "generator")
    return X.norm(x) + X.norm(A @ x)


def dual_sum_identity_check(couple, samples, tol, name="dual_sum_identity"):
    """Dual of the sum against the larger endpoint dual, per sampled functional.

    The sum side always goes through the conic solve; endpoints use closed forms
    where they exist.
    """
    report = CheckReport(name)
    log = logutil.entity_logger(name, __name__)
    sum_space = Sum(couple)
    worst = 0.0
    worst_f = None
    for f in samples:
        try:
            lhs = dual_norm(f, sum_space, method="optimize")
            rhs = max(dual_norm(f, couple.X0), dual_norm(f, couple.X1))
        except (ConvergenceError, UnsupportedNormError) as e:
            report.uncertified("sample could not be certified: {}".format(e))
            continue
        dev = abs(lhs - rhs)
        if dev >= worst:
            worst, worst_f = dev, f
    log.debug("worst deviation %.3g over %d samples", worst, len(samples))
    report.require("dual_sum_deviation", worst, 0.0, tol)
    report.measure("samples", len(samples))
    if worst_f is not None:
        report.worst(functional=np.asarray(worst_f), deviation=worst)
    return report
