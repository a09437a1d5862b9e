"""
Divergence-form operators -div(mu grad) on 1-D and 2-D Cartesian grids with
a Dirichlet part D of the boundary and natural (Neumann) conditions elsewhere.

Every node owns a cell of volume h^d, which is its measure weight. Dirichlet
nodes are eliminated, so all vectors live on the free nodes. The matrix A
satisfies <Au, v> = t[u, v] for the weighted pairing, i.e. A = K / h^d with K
the stiffness matrix of the form.
"""
import itertools

import numpy as np

from consistlib import constants, logutil, semigroup, util
from consistlib.consistency import check_operator_consistency
from consistlib.exceptions import DimensionMismatchError, ParameterRangeError
from consistlib.report import CheckReport
from consistlib.spaces import (DiscreteMeasureSpace, DualOf, InterpolationCouple,
                               Sobolev1p, WeightedLp)

logger = logutil.getLogger(__name__)

SIDES = {
    "left": (0, 0), "right": (0, -1),
    "bottom": (1, 0), "top": (1, -1),
}


class Grid(object):
    """Nodes origin + h * index on a box, each carrying the mass h^d"""

    def __init__(self, points, h):
        points = tuple(int(p) for p in np.atleast_1d(points))
        if len(points) not in (1, 2):
            raise ParameterRangeError("d", len(points), "d in {1, 2}")
        if any(p < 2 for p in points):
            raise ParameterRangeError("points", points, "at least 2 per axis")
        self.h = util.check_positive("h", float(h))
        self.points = points

    @property
    def d(self):
        return len(self.points)

    @property
    def size(self):
        return int(np.prod(self.points))

    @property
    def cell_volume(self):
        return self.h ** self.d

    @property
    def volume(self):
        return self.size * self.cell_volume

    def index(self, multi):
        return int(np.ravel_multi_index(tuple(multi), self.points))

    def coordinates(self):
        """(size, d) array of node positions"""
        axes = [self.h * np.arange(p) for p in self.points]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def boundary_nodes(self):
        nodes = set()
        for multi in itertools.product(*[range(p) for p in self.points]):
            if any(i == 0 or i == p - 1 for i, p in zip(multi, self.points)):
                nodes.add(self.index(multi))
        return nodes

    def edges(self):
        """Pairs of axis-neighbour nodes (i, j), i < j"""
        out = []
        for multi in itertools.product(*[range(p) for p in self.points]):
            for axis in range(self.d):
                if multi[axis] + 1 < self.points[axis]:
                    nb = list(multi)
                    nb[axis] += 1
                    out.append((self.index(multi), self.index(nb)))
        return out

    def __repr__(self):
        return "Grid(points={}, h={:g})".format(self.points, self.h)


class BoundaryPartition(object):
    """Dirichlet nodes D, a subset of the boundary nodes; the rest of the
    boundary is Neumann"""

    def __init__(self, grid, dirichlet):
        self.grid = grid
        dirichlet = set(int(i) for i in dirichlet)
        outside = dirichlet - grid.boundary_nodes()
        if outside:
            raise ParameterRangeError("dirichlet", sorted(outside)[:5], "D within the boundary nodes")
        self.dirichlet = frozenset(dirichlet)

    @classmethod
    def full(cls, grid):
        return cls(grid, grid.boundary_nodes())

    @classmethod
    def empty(cls, grid):
        return cls(grid, ())

    @classmethod
    def sides(cls, grid, names):
        nodes = set()
        for name in names:
            if name not in SIDES:
                raise ParameterRangeError("side", name, "one of {}".format(", ".join(sorted(SIDES))))
            axis, pos = SIDES[name]
            if axis >= grid.d:
                raise ParameterRangeError("side", name, "an axis of a {}-D grid".format(grid.d))
            fixed = pos % grid.points[axis]
            for multi in itertools.product(*[range(p) for p in grid.points]):
                if multi[axis] == fixed:
                    nodes.add(grid.index(multi))
        return cls(grid, nodes)

    @property
    def free(self):
        return np.array([i for i in range(self.grid.size) if i not in self.dirichlet], dtype=int)

    @property
    def neumann(self):
        return self.grid.boundary_nodes() - self.dirichlet

    def __repr__(self):
        return "BoundaryPartition({} Dirichlet nodes)".format(len(self.dirichlet))


class CoefficientField(object):
    """Per-cell d x d coefficient matrices with ellipticity m and bound M"""

    def __init__(self, grid, mu):
        mu = np.asarray(mu, dtype=float)
        d = grid.d
        if mu.ndim == 0:
            mu = np.broadcast_to(mu * np.eye(d), (grid.size, d, d)).copy()
        elif mu.shape == (d, d):
            mu = np.broadcast_to(mu, (grid.size, d, d)).copy()
        elif mu.shape == (grid.size,):
            mu = mu[:, None, None] * np.eye(d)[None]
        if mu.shape != (grid.size, d, d):
            raise DimensionMismatchError((grid.size, d, d), mu.shape, "coefficient field")
        sym = 0.5 * (mu + np.transpose(mu, (0, 2, 1)))
        self.m = float(np.linalg.eigvalsh(sym).min())
        self.M = float(max(np.linalg.norm(c, 2) for c in mu))
        if not np.isfinite(self.M) or self.m <= 0:
            raise ParameterRangeError("mu", "m={:.3g}".format(self.m), "xi.mu xi >= m > 0 for unit xi")
        self.grid = grid
        self.mu = mu

    @property
    def symmetric(self):
        return np.allclose(self.mu, np.transpose(self.mu, (0, 2, 1)), rtol=0, atol=1e-15)

    @classmethod
    def constant(cls, grid, value=1.0):
        return cls(grid, value)


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


# corner -> (row of the x difference, column of the y difference) on a unit square
_CORNERS = ((0, 0), (1, 0), (0, 1), (1, 1))


def _square_operator():
    """(4 corners, 2 components, 4 nodes) difference pattern on a square whose
    nodes are ordered (0,0), (1,0), (0,1), (1,1)"""
    node = {c: k for k, c in enumerate(_CORNERS)}
    D = np.zeros((4, 2, 4))
    for k, (a, b) in enumerate(_CORNERS):
        D[k, 0, node[(1, b)]] += 1
        D[k, 0, node[(0, b)]] -= 1
        D[k, 1, node[(a, 1)]] += 1
        D[k, 1, node[(a, 0)]] -= 1
    return D


class DivergenceForm(object):
    """Assembled operator with its form evaluator"""

    def __init__(self, grid, coefficients, boundary, K_full):
        self.grid = grid
        self.coefficients = coefficients
        self.boundary = boundary
        self.free = boundary.free
        self.K = K_full[np.ix_(self.free, self.free)]
        self.A = self.K / grid.cell_volume
        self.measure = DiscreteMeasureSpace.uniform(len(self.free), grid.cell_volume)

    @property
    def dimension(self):
        return len(self.free)

    def extend(self, u):
        """Zero extension of a free-node vector to the whole grid"""
        u = util.as_vector(u, self.dimension)
        full = np.zeros(self.grid.size, dtype=u.dtype)
        full[self.free] = u
        return full

    def form(self, u, v):
        """t[u, v] = sum over cells of mu grad u . conj(grad v), computed
        element by element from the difference quotients"""
        U = self.extend(u)
        V = np.conj(self.extend(v))
        h = self.grid.h
        mu = self.coefficients.mu
        if self.grid.d == 1:
            m = _harmonic(mu[:-1, 0, 0], mu[1:, 0, 0])
            return complex_or_real(np.sum(m * np.diff(U) * np.diff(V)) / h)
        nx, ny = self.grid.points
        U2, V2 = U.reshape(nx, ny), V.reshape(nx, ny)
        total = 0.0
        msq = _square_coefficients(self.grid, mu)
        gu = _corner_gradients(U2, h)
        gv = _corner_gradients(V2, h)
        for c in range(4):
            total = total + np.einsum("abi,abij,abj->", gu[c], msq, gv[c])
        return complex_or_real(total * h * h / 4.0)

    def realization(self, X, name=None):
        return semigroup.GeneratorRealization(self.A, X, name=name)


def complex_or_real(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def _square_coefficients(grid, mu):
    """Matrix harmonic mean of the four corner cells of every square"""
    nx, ny = grid.points
    inv = np.linalg.inv(mu).reshape(nx, ny, 2, 2)
    mean = 0.25 * (inv[:-1, :-1] + inv[1:, :-1] + inv[:-1, 1:] + inv[1:, 1:])
    return np.linalg.inv(mean)


def _corner_gradients(U2, h):
    dx_b0 = (U2[1:, :-1] - U2[:-1, :-1]) / h
    dx_b1 = (U2[1:, 1:] - U2[:-1, 1:]) / h
    dy_a0 = (U2[:-1, 1:] - U2[:-1, :-1]) / h
    dy_a1 = (U2[1:, 1:] - U2[1:, :-1]) / h
    dx = {0: dx_b0, 1: dx_b1}
    dy = {0: dy_a0, 1: dy_a1}
    return [np.stack([dx[b], dy[a]], axis=-1) for a, b in _CORNERS]


def assemble_divergence_form(grid, mu, boundary):
    """Stiffness matrix of t[u,v] = int mu grad u . grad v with Dirichlet rows
    and columns eliminated on D.

    :param mu: CoefficientField, or anything CoefficientField accepts
    :raises ParameterRangeError: mu is not elliptic
    """
    coefficients = mu if isinstance(mu, CoefficientField) else CoefficientField(grid, mu)
    n = grid.size
    K = np.zeros((n, n))
    h = grid.h
    if grid.d == 1:
        m = _harmonic(coefficients.mu[:-1, 0, 0], coefficients.mu[1:, 0, 0])
        for i, mf in enumerate(m):
            idx = [i, i + 1]
            K[np.ix_(idx, idx)] += (mf / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    else:
        nx, ny = grid.points
        msq = _square_coefficients(grid, coefficients.mu)
        D = _square_operator()
        for i in range(nx - 1):
            for j in range(ny - 1):
                nodes = [grid.index((i + a, j + b)) for a, b in _CORNERS]
                # h^2 area, 1/h^2 from the differences, 1/4 per corner
                element = 0.25 * sum(D[k].T @ msq[i, j] @ D[k] for k in range(4))
                K[np.ix_(nodes, nodes)] += element
    form = DivergenceForm(grid, coefficients, boundary, K)
    logger.debug("assembled %s with %d free nodes", grid, form.dimension)
    return form


def dirichlet_laplacian(n, h=1.0):
    """A for -u'' on n free points with Dirichlet ends: tridiag(-1, 2, -1) / h^2"""
    grid = Grid(n + 2, h)
    return assemble_divergence_form(grid, 1.0, BoundaryPartition.full(grid))


def gradient_matrix(grid, boundary):
    """Edge differences on free nodes (Dirichlet values are zero) and edge masses h^d"""
    free = boundary.free
    column = {node: k for k, node in enumerate(free)}
    rows = []
    for i, j in grid.edges():
        if i in boundary.dirichlet and j in boundary.dirichlet:
            continue
        row = np.zeros(len(free))
        if j in column:
            row[column[j]] += 1.0 / grid.h
        if i in column:
            row[column[i]] -= 1.0 / grid.h
        rows.append(row)
    G = np.array(rows) if rows else np.zeros((0, len(free)))
    return G, np.full(G.shape[0], grid.cell_volume)


def discrete_sobolev_space(grid, boundary, p):
    """W^{1,p}_D on the free nodes and its dual W^{-1,p'}_D under the L^2 pairing

    :raises ParameterRangeError: p not in (1, inf)
    """
    p = util.check_exponent("p", p)
    if p == 1 or np.isinf(p):
        raise ParameterRangeError("p", p, "1 < p < inf (reflexivity of the dual construction)")
    base = DiscreteMeasureSpace.uniform(len(boundary.free), grid.cell_volume)
    G, e = gradient_matrix(grid, boundary)
    W = Sobolev1p(base, p, G, e, boundary)
    return W, DualOf(W)


def negative_sobolev_space(grid, boundary, q):
    """W^{-1,q}_D = (W^{1,q'}_D)'"""
    return discrete_sobolev_space(grid, boundary, util.conjugate_exponent(q))[1]


def riesz_dual_norm(f, grid, boundary):
    """||f||_{W^{-1,2}_D} via the solve (W + K_1) y = W f with K_1 the unit stiffness"""
    G, e = gradient_matrix(grid, boundary)
    w = np.full(len(boundary.free), grid.cell_volume)
    M = np.diag(w) + G.T @ (e[:, None] * G)
    g = w * np.asarray(f, dtype=float)
    return float(np.sqrt(g @ np.linalg.solve(M, g)))


def lp_scale_family(form, p_list, q=2.0):
    """The same matrix A on every L^p of the list plus one on W^{-1,q}_D"""
    realizations = [form.realization(WeightedLp(form.measure, p), name="A on L^{:g}".format(p)) for p in p_list]
    dual = negative_sobolev_space(form.grid, form.boundary, q)
    realizations.append(form.realization(dual, name="A on W^-1,{:g}_D".format(q)))
    return realizations


def lp_scale_consistency_check(form, p_list, q=2.0, times=(0.1, 1.0), tol=1e-12, name="lp_scale_consistency"):
    """Pairwise consistency of the family and a semigroup bound per space"""
    report = CheckReport(name)
    family = lp_scale_family(form, p_list, q)
    basis = np.eye(form.dimension)
    worst = 0.0
    for R0, R1 in itertools.combinations(family, 2):
        sub = check_operator_consistency(R0.A, R1.A, basis, tol, InterpolationCouple(R0.X, R1.X))
        worst = max(worst, sub.constants["deviation"])
    report.require("pairwise_deviation", worst, 0.0, tol)
    for R in family:
        b = semigroup.semigroup_bound(R.A, R.X, times)
        report.measure("bound_lower[{}]".format(R.X.describe()), b.sup_lower)
        if b.certified:
            report.measure("bound_upper[{}]".format(R.X.describe()), b.sup_upper)
        if not np.isfinite(b.sup_lower):
            report.fail("semigroup bound on {} is not finite".format(R.X.describe()))
    return report


def interior_density_check(grid, boundary, p=2.0, name="interior_density"):
    """Do indicators of free nodes away from the boundary span the free coordinates?

    The rank defect counts free boundary nodes (the Neumann part) that no
    interior-supported vector reaches; any defect fails. The L^p distance of
    the constant profile to its interior truncation is reported alongside.
    """
    p = util.check_exponent("p", p)
    report = CheckReport(name)
    free = boundary.free
    boundary_nodes = set(grid.boundary_nodes())
    interior = [k for k, node in enumerate(free) if node not in boundary_nodes]
    report.measure("free_nodes", len(free))
    indicators = np.eye(len(free))[:, interior]
    rank = int(np.linalg.matrix_rank(indicators)) if interior else 0
    report.measure("interior_rank", rank)
    report.require("rank_defect", len(free) - rank, 0, 0)
    if len(free):
        ones = np.ones(len(free))
        truncated = np.zeros(len(free))
        truncated[interior] = 1.0
        X = WeightedLp(DiscreteMeasureSpace.uniform(len(free), grid.cell_volume), p)
        report.measure("boundary_layer_distance", X.norm(ones - truncated) / X.norm(ones))
    if rank < len(free):
        report.note("{} free boundary nodes carry no interior-supported vector".format(len(free) - rank))
    return report


def check_dual_scale_consistency(form, p_list, q=2.0, tol=1e-12, name="dual_scale_consistency"):
    """W^{-1,q}_D realization against every L^p realization on the coordinate basis"""
    report = CheckReport(name)
    family = lp_scale_family(form, p_list, q)
    dual = family[-1]
    basis = np.eye(form.dimension)
    worst = 0.0
    for R in family[:-1]:
        sub = check_operator_consistency(dual.A, R.A, basis, tol, InterpolationCouple(dual.X, R.X))
        worst = max(worst, sub.constants["deviation"])
        if sub.uncertain:
            report.uncertified("; ".join(sub.uncertain))
    report.require("deviation", worst, 0.0, tol)
    density = interior_density_check(form.grid, form.boundary)
    for k in ("interior_rank", "rank_defect"):
        report.measure(k, density.constants[k])
    return report


class GaussianFit(object):
    def __init__(self, C, c, table, violations, clipped, negative, exponent):
        self.C = C
        self.c = c
        self.table = table
        self.violations = violations
        self.clipped = clipped
        self.negative = negative
        self.exponent = exponent


def gaussian_bound_fit(form, times, quantile=constants.GAUSSIAN_DEFAULT_QUANTILE,
                       sweep=constants.GAUSSIAN_C_SWEEP):
    """Fit K_t(x,y) <= C t^{-d/2} exp(-|x-y|^2 / (4 c t)) over the sampled (t, x, y).

    For each swept c, C(c) is the `quantile` of the required ratios, maximized
    over t. The reported c is the smallest one whose C is within the knee slack
    of the sweep minimum. Entries below max(1e-30, 100 eps max K_t) are clipped
    as roundoff and negative entries are excluded, both counted.
    """
    grid = form.grid
    d = grid.d
    pts = grid.coordinates()[form.free]
    r2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    times = sorted(float(t) for t in times)
    table = {c: 0.0 for c in sweep}
    clipped = negative = 0
    diag = []
    centre = int(np.argmin(np.sum((pts - pts.mean(axis=0)) ** 2, axis=1)))
    ratios_at = {}
    for t in times:
        Kt = semigroup.semigroup_matrix(form.A, t) / grid.cell_volume
        diag.append(Kt[centre, centre])
        floor = max(constants.GAUSSIAN_TAIL_CLIP, constants.GAUSSIAN_ROUNDOFF_FACTOR * constants.EPS * Kt.max())
        negative += int(np.sum(Kt < -floor))
        keep = Kt > floor
        clipped += int(np.sum(~keep)) - int(np.sum(Kt < -floor))
        for c in sweep:
            ratio = Kt[keep] * t ** (d / 2.0) * np.exp(r2[keep] / (4 * c * t))
            value = float(np.quantile(ratio, quantile)) if ratio.size else 0.0
            if value > table[c]:
                table[c] = value
                ratios_at[c] = (t, ratio, np.argwhere(keep))
    best = min(table.values())
    c_star = min(c for c in sweep if table[c] <= best * (1 + constants.GAUSSIAN_KNEE_SLACK))
    C = table[c_star]
    violations = []
    if c_star in ratios_at:
        t, ratio, where = ratios_at[c_star]
        over = np.argsort(ratio)[::-1][:10]
        for k in over:
            if ratio[k] > C:
                i, j = where[k]
                violations.append({"t": t, "x": int(i), "y": int(j), "ratio": float(ratio[k])})
    slope = float(np.polyfit(np.log(times), np.log(diag), 1)[0]) if len(times) > 1 else float("nan")
    if negative:
        logger.warning("%d negative kernel entries excluded from the Gaussian fit", negative)
    return GaussianFit(C, c_star, table, violations, clipped, negative, -slope)


def gaussian_bound_check(form, times, quantile=constants.GAUSSIAN_DEFAULT_QUANTILE, expected_c=1.0,
                         c_tol=0.25, exponent_tol=0.10, name="gaussian_bound"):
    report = CheckReport(name)
    fit = gaussian_bound_fit(form, times, quantile)
    d = form.grid.d
    report.measure("C", fit.C)
    report.measure("c", fit.c)
    for c, value in sorted(fit.table.items()):
        report.measure("C@c={:g}".format(c), value)
    report.measure("clipped_entries", fit.clipped)
    report.measure("negative_entries", fit.negative)
    report.require("c_relative_error", abs(fit.c - expected_c) / expected_c, 0.0, c_tol)
    report.measure("diagonal_exponent", fit.exponent)
    report.require("exponent_relative_error", abs(fit.exponent - d / 2.0) / (d / 2.0), 0.0, exponent_tol)
    if fit.negative:
        report.note("fit restricted to the positive part of the kernel")
    for v in fit.violations:
        report.worst(**v)
    return report
