"""
Consistency of operators and semigroups on an interpolation couple, and the
checks that interpolate them.

In finite dimension every domain is the whole coordinate space, so statements
about equality of spaces are checked as two-sided norm equivalences whose
constants must stay stable under grid refinement.
"""
import numpy as np

from consistlib import constants, interp, logutil, opnorm, semigroup, util
from consistlib.exceptions import (ConsistencyError, ConvergenceError,
                                   DimensionMismatchError, UnsupportedNormError)
from consistlib.report import CheckReport
from consistlib.spaces import (Graph, InterpolationCouple, Intersection, Sum,
                               WeightedLp, dual_norm, intersection_norm)

logger = logutil.getLogger(__name__)


class ConsistentPair(object):
    """Operators T0 on X0 and T1 on X1 over one coordinate space, with the set
    on which their agreement is tested (the coordinate basis by default)"""

    def __init__(self, T0, T1, couple, dense_set=None):
        self.couple = couple
        self.T0 = util.as_square_matrix(T0, couple.dimension, "T0")
        self.T1 = util.as_square_matrix(T1, couple.dimension, "T1")
        if dense_set is None:
            dense_set = np.eye(couple.dimension)
        self.dense_set = [util.as_vector(d, couple.dimension, "dense set vector") for d in dense_set]

    @classmethod
    def from_realizations(cls, R0, R1, dense_set=None):
        return cls(R0.A, R1.A, InterpolationCouple(R0.X, R1.X), dense_set)

    @property
    def identical(self):
        return np.array_equal(self.T0, self.T1)


def realization_couple(R0, R1):
    if R0.dimension != R1.dimension:
        raise DimensionMismatchError(R0.dimension, R1.dimension, "second realization")
    return InterpolationCouple(R0.X, R1.X)


def prolongate(v, n):
    """Piecewise-constant injection of a coarse vector onto n nodes"""
    v = np.asarray(v)
    if n % v.shape[0]:
        raise DimensionMismatchError("a multiple of {}".format(v.shape[0]), n, "refined level")
    return np.repeat(v, n // v.shape[0])


def check_operator_consistency(T0, T1, dense_set, tol, couple, name="operator_consistency"):
    """max over d of ||(T0 - T1) d||_{X0 n X1} / ||d||_{X0 n X1}.

    A spanning dense set certifies agreement on the whole intersection; a
    rank-deficient one leaves the check inconclusive.

    :raises ValueError: empty dense set
    """
    report = CheckReport(name)
    vectors = [util.as_vector(d, couple.dimension, "dense set vector") for d in dense_set]
    if not vectors:
        raise ValueError("dense set is empty")
    T0 = util.as_square_matrix(T0, couple.dimension, "T0")
    T1 = util.as_square_matrix(T1, couple.dimension, "T1")
    rank = int(np.linalg.matrix_rank(np.vstack(vectors)))
    report.measure("dense_set_rank", rank)
    D = T0 - T1
    worst = 0.0
    for d in vectors:
        nd = intersection_norm(d, couple)
        if nd == 0:
            continue
        dev = intersection_norm(D @ d, couple) / nd
        if dev > worst:
            worst = dev
            report.worst_cases = [{"vector": d.tolist(), "deviation": dev}]
    report.require("deviation", worst, 0.0, tol)
    if rank < couple.dimension:
        report.uncertified("dense set spans {} of {} dimensions".format(rank, couple.dimension))
    return report


def _operator_upper(T, couple):
    """max of the endpoint operator-norm upper bounds of T (inf if uncertified)"""
    b0 = opnorm.operator_norm(T, couple.X0)
    b1 = opnorm.operator_norm(T, couple.X1)
    return max(b0.upper, b1.upper)


def resolvent_semigroup_equivalence(R0, R1, lambdas, times, n_euler, tol, samples=2, seed=0,
                                    steps=120, name="resolvent_semigroup_equivalence"):
    """Both directions of the resolvent/semigroup equivalence.

    (i)  the Laplace transform y of one semigroup solves the other resolvent
         equation: ||(A_other + lambda) y - x|| / ||y|| within the propagated
         quadrature bound plus tol;
    (ii) Euler iterates of one resolvent reproduce the other semigroup:
         ||euler_other(t) x - S_t x|| / (t ||x||) within the Richardson Euler
         error model plus tol.

    Deviations are measured in the intersection norm of the couple.
    """
    report = CheckReport(name, seed)
    if not lambdas or not times:
        raise ValueError("lambda grid and t grid must be nonempty")
    couple = realization_couple(R0, R1)

    def norm(v):
        return intersection_norm(v, couple)

    rng = util.rng(seed)
    xs = [rng.standard_normal(R0.dimension) for _ in range(samples)]
    worst_i = worst_ii = 0.0
    excess_i = excess_ii = -np.inf
    for lam in lambdas:
        for src, dst in ((R0, R1), (R1, R0)):
            shifted = dst.A + lam * np.eye(dst.dimension)
            amplification = _operator_upper(shifted, couple)
            if not np.isfinite(amplification):
                report.uncertified("no certified bound on ||A + {:g}|| for the quadrature error".format(lam))
                amplification = 0.0
            for x in xs:
                q = semigroup.laplace_resolvent_quadrature(src.A, lam, x, steps=steps, tol=tol, norm=norm)
                ny = norm(q.value)
                dev = norm(shifted @ q.value - x) / ny
                allowed = amplification * q.error_bound / ny
                worst_i = max(worst_i, dev)
                excess_i = max(excess_i, dev - allowed)
    for t in times:
        for src, dst in ((R0, R1), (R1, R0)):
            for x in xs:
                exact = semigroup.expm_apply(src.A, t, x)
                e_n = semigroup.euler_apply(dst.A, t, n_euler, x)
                e_2n = semigroup.euler_apply(dst.A, t, 2 * n_euler, x)
                scale = t * norm(x)
                dev = norm(e_n - exact) / scale
                model = constants.EULER_SAFETY * 2.0 * norm(e_n - e_2n) / scale
                worst_ii = max(worst_ii, dev)
                excess_ii = max(excess_ii, dev - model)
    report.measure("deviation_resolvent", worst_i)
    report.measure("deviation_euler", worst_ii)
    report.measure("deviation", max(worst_i, worst_ii))
    report.require("excess_resolvent", max(excess_i, 0.0), 0.0, tol)
    report.require("excess_euler", max(excess_ii, 0.0), 0.0, tol)
    report.note("Euler iterate (I + (t/n)A)^-n; the unscaled (A + (t/n) I)^-n misses the factor (n/t)^n")
    return report


def domain_intersection_image(R0, R1, basis):
    """(A + I)^-1 applied to each basis vector: the common core D(A0) n D(A1)

    :raises ConsistencyError: the generators differ, or (A + I) image does not
    reproduce the basis to 1e-10
    """
    A0 = R0.A if hasattr(R0, "A") else util.as_square_matrix(R0)
    A1 = R1.A if hasattr(R1, "A") else util.as_square_matrix(R1)
    if not np.array_equal(A0, A1):
        raise ConsistencyError("domain intersection image needs consistent generators (A0 = A1)")
    fac = semigroup.ShiftedFactorization(A0, 1.0, what="A + I")
    image = []
    for b in basis:
        b = util.as_vector(b, A0.shape[0], "basis vector")
        y = fac.solve(b)
        back = fac.matrix @ y
        if np.linalg.norm(back - b) > 1e-10 * max(np.linalg.norm(b), np.finfo(float).tiny):
            raise ConsistencyError("(A + I) image does not reproduce the basis: residual {:.3e}".format(
                np.linalg.norm(back - b)))
        image.append(y)
    return image


def domain_intersection_check(R0, R1, basis, tol=1e-10, name="domain_intersection"):
    """The core D(A0) n D(A1) with its graph-norm equivalence constants between
    the two realizations"""
    report = CheckReport(name)
    image = domain_intersection_image(R0, R1, basis)
    G0 = Graph(R0.A, R0.X)
    G1 = Graph(R1.A, R1.X)
    ratios = [G0.norm(y) / G1.norm(y) for y in image if np.any(y)]
    fac = semigroup.ShiftedFactorization(R0.A, 1.0)
    residual = max(np.linalg.norm(fac.matrix @ y - np.asarray(b, dtype=float)) for y, b in zip(image, basis))
    report.require("core_residual", residual, 0.0, tol)
    report.measure("core_rank", np.linalg.matrix_rank(np.vstack(image)))
    if ratios:
        report.measure("graph_ratio_min", min(ratios))
        report.measure("graph_ratio_max", max(ratios))
    return report


def adjoint(T, pairing):
    """Adjoint of T under <f, x> = sum_i w_i f_i conj(x_i)"""
    w = np.asarray(pairing, dtype=float)
    return (np.conj(T).T * w[None, :]) / w[:, None]


def adjoint_consistency_check(pair, functionals, tol, name="adjoint_consistency"):
    """<f, T0 x> = <f, T1 x> on the dense set, and the adjoint's bound on the
    dual of the sum (X0 + X1)' = X0' n X1' against max ||T||_{X_i}"""
    report = CheckReport(name)
    w = pair.couple.X0.weights
    sum_space = Sum(pair.couple)
    A0 = adjoint(pair.T0, w)
    A1 = adjoint(pair.T1, w)
    worst = 0.0
    ratio = 0.0
    for f in functionals:
        f = util.as_vector(f, pair.couple.dimension, "functional")
        for x in pair.dense_set:
            lhs = np.sum(w * f * np.conj(pair.T0 @ x))
            rhs = np.sum(w * f * np.conj(pair.T1 @ x))
            worst = max(worst, abs(lhs - rhs))
        # transposed actions against the direct pairing
        for x in pair.dense_set:
            direct = np.sum(w * f * np.conj(pair.T0 @ x))
            transposed = np.sum(w * (A0 @ f) * np.conj(x))
            worst = max(worst, abs(direct - transposed))
        worst = max(worst, float(np.max(np.abs(A0 @ f - A1 @ f))))
        try:
            nf = dual_norm(f, sum_space)
            if nf > 0:
                ratio = max(ratio, dual_norm(A0 @ f, sum_space) / nf)
        except (ConvergenceError, UnsupportedNormError) as e:
            report.uncertified("dual norm on the sum: {}".format(e))
    report.require("pairing_deviation", worst, 0.0, tol)
    report.measure("adjoint_sum_dual_ratio", ratio)
    bound = _operator_upper(pair.T0, pair.couple)
    if np.isfinite(bound):
        report.require("adjoint_over_endpoint_bound", ratio, bound, max(tol, 1e-8))
    else:
        report.note("endpoint operator norms have no certified upper bound; adjoint ratio only measured")
    return report


def _common_matrix(R0, R1, report):
    if not np.array_equal(R0.A, R1.A):
        report.fail("realizations are not consistent: the matrices differ by {:.3e}".format(
            float(np.max(np.abs(R0.A - R1.A)))))
        return None
    return R0.A


def interpolated_semigroup_check(R0, R1, functor, times, tol, samples=4, seed=0,
                                 candidates=4, name="interpolated_semigroup"):
    """The semigroup induced on F(X0, X1): semigroup law, boundedness against the
    endpoint bounds, and the continuity modulus against the endpoint moduli.

    :raises FunctorRefusedError: the functor lacks dense intersection
    """
    functor.require_property_d("interpolated semigroup")
    report = CheckReport(name, seed)
    A = _common_matrix(R0, R1, report)
    if A is None:
        return report
    couple = realization_couple(R0, R1)
    F = interp.interpolated_space(functor, couple)
    c = interp.embedding_constant(functor)
    report.measure("embedding_constant", c)
    rng = util.rng(seed)
    xs = [rng.standard_normal(A.shape[0]) for _ in range(samples)]
    times = sorted(float(t) for t in times)

    law = 0.0
    for x in xs[:2]:
        for s in times[:3]:
            for t in times[:3]:
                lhs = semigroup.expm_apply(A, s + t, x)
                rhs = semigroup.expm_apply(A, s, semigroup.expm_apply(A, t, x))
                nl = F.norm(lhs)
                if nl > 0:
                    law = max(law, F.norm(lhs - rhs) / nl)
    report.require("law_defect", law, 0.0, max(tol, 1e-9))

    b0 = semigroup.semigroup_bound(A, couple.X0, times, seed=seed)
    b1 = semigroup.semigroup_bound(A, couple.X1, times, seed=seed + 1)
    sup_f = 0.0
    for k, t in enumerate(times):
        S = semigroup.semigroup_matrix(A, t)
        if isinstance(F, WeightedLp):
            est = opnorm.operator_norm(S, F, seed=seed + k)
        else:
            est = opnorm.ascent_lower(S, F, F, seed=seed + k, candidates=candidates, rounds=1)
        sup_f = max(sup_f, est.lower)
    report.measure("endpoint0_bound", b0.sup_upper if b0.certified else b0.sup_lower)
    report.measure("endpoint1_bound", b1.sup_upper if b1.certified else b1.sup_lower)
    report.measure("interpolated_bound_lower", sup_f)
    if b0.certified and b1.certified:
        report.require("bound_excess", sup_f - max(b0.sup_upper, b1.sup_upper), 0.0, tol)
    else:
        report.uncertified("endpoint semigroup bounds have no certified upper value")

    worst = -np.inf
    for x in xs:
        for t in times:
            d = semigroup.expm_apply(A, t, x) - x
            lhs = F.norm(d)
            rhs = c * (couple.X0.norm(d) + couple.X1.norm(d))
            if lhs - rhs > worst:
                worst = lhs - rhs
                report.worst_cases = [{"t": t, "modulus": lhs, "endpoint_moduli": rhs}]
    report.require("continuity_excess", max(worst, 0.0), 0.0, tol)
    d = semigroup.expm_apply(A, times[0], xs[0]) - xs[0]
    report.measure("modulus@t={:g}".format(times[0]), F.norm(d))
    return report


def graph_couple(A, couple):
    return InterpolationCouple(Graph(A, couple.X0), Graph(A, couple.X1))


def rho(x, A, couple, functor):
    """F-norm over the graph couple divided by the graph norm in F(X0, X1);
    returns (rho, approximate)"""
    if not isinstance(functor, interp.RealK):
        raise UnsupportedNormError("graph couples are interpolated with the real method only")
    G = graph_couple(A, couple)
    num = interp.real_interp_profile(x, G, functor)
    px = interp.real_interp_profile(x, couple, functor)
    pax = interp.real_interp_profile(A @ x, couple, functor)
    den = px.value + pax.value
    return num.value / den, num.approximate or px.approximate or pax.approximate


def generator_interpolation_check(levels, functor, samples=40, seed=0,
                                  bracket_factor=constants.BRACKET_LEVEL_FACTOR,
                                  rho_range=constants.RHO_RANGE, name="generator_interpolation"):
    """Equivalence of F(D(A0), D(A1)) and D(A) in F(X0, X1) across refinement.

    :param levels: list of (R0, R1) realization pairs, coarsest first
    :param samples: sample vectors per level; drawn at the coarsest level,
    prolongated, then mapped into the core by (A + I)^-1
    """
    functor.require_property_d("generator interpolation")
    report = CheckReport(name, seed)
    log = logutil.entity_logger(name, __name__)
    rng = util.rng(seed)
    coarse = levels[0][0].dimension
    rs = [rng.standard_normal(coarse) for _ in range(samples)]
    brackets = []
    lo, hi = np.inf, 0.0
    for R0, R1 in levels:
        n = R0.dimension
        A = _common_matrix(R0, R1, report)
        if A is None:
            return report
        couple = realization_couple(R0, R1)
        core = domain_intersection_image(R0, R1, [prolongate(r, n) for r in rs])
        values = []
        for x in core:
            try:
                value, approximate = rho(x, A, couple, functor)
            except ConvergenceError as e:
                report.uncertified("level n={}: {}".format(n, e))
                continue
            if approximate:
                report.uncertified("level n={}: K-functional gap above tolerance".format(n))
            values.append(value)
        if not values:
            continue
        rmin, rmax = min(values), max(values)
        lo, hi = min(lo, rmin), max(hi, rmax)
        report.measure("rho_min@n={}".format(n), rmin)
        report.measure("rho_max@n={}".format(n), rmax)
        report.measure("bracket@n={}".format(n), rmax / rmin)
        brackets.append(rmax / rmin)
        log.info("n=%d: rho in [%.6g, %.6g]", n, rmin, rmax)
    if not brackets:
        report.uncertified("no level produced a certified ratio")
        return report
    variation = max(brackets) / min(brackets)
    report.require("bracket_variation", variation, bracket_factor, 0.0)
    report.require("rho_lower", lo, rho_range[0], 0.0, ">=")
    report.require("rho_upper", hi, rho_range[1], 0.0)
    report.note("bracket factor {:g} and rho range {} are engineering choices recorded per run".format(
        bracket_factor, list(rho_range)))
    return report


def resolvent_interpolation_check(R0, R1, functor, samples=4, tol=1e-8, seed=0, candidates=6,
                                  name="resolvent_interpolation"):
    """(A + I)^-1 computed once acts as the interpolated resolvent, and its
    F-operator norm stays below the larger endpoint resolvent norm"""
    report = CheckReport(name, seed)
    A = _common_matrix(R0, R1, report)
    if A is None:
        return report
    couple = realization_couple(R0, R1)
    fac = R0.resolvent_factorization(1.0)
    R = fac.solve_raw(np.eye(A.shape[0]))
    rng = util.rng(seed)
    dev = 0.0
    for _ in range(samples):
        x = rng.standard_normal(A.shape[0])
        direct = semigroup.resolvent_apply(R1.A, 1.0, x)
        dev = max(dev, np.linalg.norm(R @ x - direct) / max(np.linalg.norm(direct), np.finfo(float).tiny))
    report.require("action_deviation", dev, 0.0, 1e-12)
    F = interp.interpolated_space(functor, couple)
    if isinstance(F, WeightedLp):
        est = opnorm.operator_norm(R, F, seed=seed)
    else:
        est = opnorm.ascent_lower(R, F, F, seed=seed, candidates=candidates, rounds=1)
    b0 = opnorm.operator_norm(R, couple.X0, seed=seed)
    b1 = opnorm.operator_norm(R, couple.X1, seed=seed + 1)
    report.measure("interpolated_lower", est.lower)
    report.measure("endpoint0_upper", b0.upper)
    report.measure("endpoint1_upper", b1.upper)
    bound = max(b0.upper, b1.upper)
    if np.isfinite(bound):
        report.require("bound_excess", est.lower - bound, 0.0, tol)
        report.measure("measured_constant", est.lower / max(b0.lower, b1.lower))
    else:
        report.uncertified("endpoint resolvent norms have no certified upper bound")
    return report


def extension_uniqueness_check(pair, functor, samples=4, tol=1e-8, seed=0, name="extension_uniqueness"):
    """The interpolated operator is the common restriction of T0 and T1 to the
    intersection, and it is continuous on F: ||T(x + e) - T x||_F stays below
    the endpoint bound times ||e||_F along a sequence e -> 0"""
    report = CheckReport(name, seed)
    couple = pair.couple
    rng = util.rng(seed)
    xs = [rng.standard_normal(couple.dimension) for _ in range(samples)]
    inter = Intersection(couple)
    restriction = 0.0
    for x in xs:
        nx = inter.norm(x)
        restriction = max(restriction, inter.norm((pair.T0 - pair.T1) @ x) / nx)
    report.require("restriction_deviation", restriction, 0.0, tol)
    F = interp.interpolated_space(functor, couple)
    bound = _operator_upper(pair.T0, couple)
    if not np.isfinite(bound):
        report.uncertified("endpoint operator norms have no certified upper bound")
        return report
    report.measure("endpoint_bound", bound)
    worst = -np.inf
    for x in xs[:2]:
        r = rng.standard_normal(couple.dimension)
        for k in range(1, 6):
            e = 2.0 ** (-4 * k) * r
            lhs = F.norm(pair.T0 @ e)
            rhs = bound * F.norm(e)
            worst = max(worst, lhs - rhs)
    report.require("continuity_excess", max(worst, 0.0), 0.0, tol)
    return report
