"""
Interpolation functors as computable objects: the K-functional, the dyadic
real (theta, q) norm, the weighted l^p closed form of complex interpolation,
and the operator bound on interpolated spaces.
"""
import numpy as np

from consistlib import constants, logutil, opnorm, util
from consistlib.exceptions import (ConvergenceError, FunctorRefusedError,
                                   ParameterRangeError, UnsupportedNormError)
from consistlib.report import CheckReport
from consistlib.spaces import (DiscreteMeasureSpace, InterpolationCouple,
                               NormedSpace, WeightedLp)

logger = logutil.getLogger(__name__)

NOT_DENSE = "the intersection is not dense in the interpolation space for q = inf"


class FunctorDescriptor(object):
    name = None

    def __init__(self, theta):
        self.theta = util.check_theta(theta)

    @property
    def property_d(self):
        raise NotImplementedError

    def apply(self, couple):
        """The interpolation space F(X0, X1)"""
        raise NotImplementedError

    def require_property_d(self, operation):
        if not self.property_d:
            raise FunctorRefusedError(
                "{} needs a functor with dense intersection, {} does not have it".format(operation, self.describe()),
                NOT_DENSE)

    def describe(self):
        return self.name


class RealK(FunctorDescriptor):
    """Dyadic K-method (theta, q) truncated to 2^-J .. 2^J"""
    name = "real"

    def __init__(self, theta, q, J=constants.DEFAULT_DYADIC_RANGE):
        super(RealK, self).__init__(theta)
        self.q = util.check_exponent("q", q)
        if int(J) != J or J < 1:
            raise ParameterRangeError("J", J, "integer J >= 1")
        self.J = int(J)

    @property
    def property_d(self):
        return not np.isinf(self.q)

    def weights(self):
        return 2.0 ** (-self.theta * np.arange(-self.J, self.J + 1))

    def combine(self, k_values):
        terms = self.weights() * np.asarray(k_values)
        if np.isinf(self.q):
            return float(terms.max())
        m = terms.max()
        if m == 0:
            return 0.0
        return float(m * np.sum((terms / m) ** self.q) ** (1.0 / self.q))

    def scalar_constant(self):
        """Norm of x in F(X, X) divided by ||x||_X"""
        js = np.arange(-self.J, self.J + 1)
        return self.combine(np.minimum(1.0, 2.0 ** js))

    def apply(self, couple):
        return RealInterpolationSpace(couple, self)

    def describe(self):
        return "real(theta={:g}, q={:g}, J={})".format(self.theta, self.q, self.J)


class ComplexWeightedLp(FunctorDescriptor):
    name = "complex"

    @property
    def property_d(self):
        return True

    def apply(self, couple, allow_inf=False):
        return complex_interp_space(couple, self.theta, allow_inf=allow_inf)

    def describe(self):
        return "complex(theta={:g})".format(self.theta)


def embedding_constant(functor):
    """c with ||x||_F <= c (||x||_X0 + ||x||_X1) for every couple"""
    if isinstance(functor, RealK):
        # K(t,x) <= min(1,t) max(||x||_0, ||x||_1) termwise
        return functor.scalar_constant()
    return 1.0


class KFunctionalResult(object):
    def __init__(self, t, value, x0, x1, gap, certified=True, approximate=False):
        self.t = t
        self.value = float(value)
        self.x0 = x0
        self.x1 = x1
        self.gap = float(gap)
        self.certified = certified
        self.approximate = approximate

    @property
    def split(self):
        return self.x0, self.x1

    def __repr__(self):
        return "KFunctionalResult(t={:g}, value={:.12g}, gap={:.3g}{})".format(
            self.t, self.value, self.gap, ", approximate" if self.approximate else "")


def k_functional(t, x, couple, tol=constants.K_GAP_TOLERANCE):
    """K(t, x) = inf over x = x0 + x1 of ||x0||_X0 + t ||x1||_X1.

    The value is the objective at the best feasible split found (the solver's
    or one of the two trivial ones), so it is an upper value within `gap` of
    the infimum. The input is scaled to unit max-modulus with a canonical
    sign before solving, which makes K exactly homogeneous in x.

    :raises ConvergenceError: the conic solve failed; carries min(||x||_0, t||x||_1)
    """
    t = util.check_positive("t", float(t))
    x = util.as_vector(x, couple.dimension)
    zero = np.zeros_like(x)
    if not np.any(x):
        return KFunctionalResult(t, 0.0, zero, zero.copy(), 0.0)
    n0 = couple.X0.norm(x)
    n1 = couple.X1.norm(x)
    if couple.identical:
        if t < 1:
            return KFunctionalResult(t, t * n1, zero, x.copy(), 0.0)
        return KFunctionalResult(t, n0, x.copy(), zero, 0.0)

    scale = x[np.argmax(np.abs(x))]
    xs = x / scale
    try:
        x0, x1, lower, optimum, certified, status = couple.k_solver().solve(t, xs)
    except ConvergenceError as e:
        raise ConvergenceError("K-functional at t={:g}: {}".format(t, e), best_bound=min(n0, t * n1), status=e.status)
    value = couple.X0.norm(x0) + t * couple.X1.norm(x1)
    s0 = n0 / abs(scale)
    s1 = n1 / abs(scale)
    if s0 <= value:
        value, x0, x1 = s0, xs.copy(), np.zeros_like(xs)
    if t * s1 < value:
        value, x0, x1 = t * s1, np.zeros_like(xs), xs.copy()
    if certified:
        gap = max(value - lower, 0.0)
    else:
        gap = abs(value - optimum)
    approximate = gap > tol * max(value, np.finfo(float).tiny) or status != "optimal"
    if approximate:
        logger.debug("K-functional at t=%g flagged approximate: gap %.3g, status %s", t, gap, status)
    a = abs(scale)
    x1 = x1 * scale
    return KFunctionalResult(t, value * a, x - x1, x1, gap * a, certified, approximate)


def k_functional_shape(x, couple, ts):
    """Largest violations of monotonicity and midpoint concavity of t -> K(t, x)
    on an increasing grid, net of the reported gaps"""
    ts = np.asarray(sorted(ts), dtype=float)
    res = [k_functional(t, x, couple) for t in ts]
    k = np.array([r.value for r in res])
    gaps = np.array([r.gap for r in res])
    mono = 0.0
    for i in range(len(ts) - 1):
        mono = max(mono, k[i] - k[i + 1] - gaps[i])
    conc = 0.0
    for i in range(1, len(ts) - 1):
        lam = (ts[i + 1] - ts[i]) / (ts[i + 1] - ts[i - 1])
        chord = lam * k[i - 1] + (1 - lam) * k[i + 1]
        conc = max(conc, chord - k[i] - gaps[i - 1] - gaps[i + 1])
    return mono, conc


def l1_linf_k_closed_form(t, x):
    """K(t, x) for (l^1, l^inf) with unit weights: the integral of the decreasing
    rearrangement of |x| over [0, t]"""
    a = np.sort(np.abs(np.asarray(x, dtype=float)))[::-1]
    m = int(np.floor(t))
    if m >= a.size:
        return float(a.sum())
    return float(a[:m].sum() + (t - m) * a[m])


class InterpNorm(object):
    """A dyadic norm with the K values that produced it"""

    def __init__(self, value, k_values, approximate, max_relative_gap, solves):
        self.value = value
        self.k_values = k_values
        self.approximate = approximate
        self.max_relative_gap = max_relative_gap
        self.solves = solves


def real_interp_profile(x, couple, functor):
    J = functor.J
    x = util.as_vector(x, couple.dimension)
    ks = np.zeros(2 * J + 1)
    if not np.any(x):
        return InterpNorm(0.0, ks, False, 0.0, 0)
    n0 = couple.X0.norm(x)
    n1 = couple.X1.norm(x)
    sat = constants.K_SATURATION_TOLERANCE
    approximate = False
    max_gap = 0.0
    solves = 0

    def solve(j):
        nonlocal approximate, max_gap, solves
        r = k_functional(2.0 ** j, x, couple)
        solves += 1
        approximate = approximate or r.approximate
        max_gap = max(max_gap, r.gap / r.value if r.value > 0 else 0.0)
        return r.value

    ks[J] = solve(0)
    # K is nondecreasing with limit ||x||_0; K(t)/t is nonincreasing with limit ||x||_1
    saturated = ks[J] >= n0 * (1 - sat)
    for j in range(1, J + 1):
        ks[J + j] = n0 if saturated else solve(j)
        saturated = saturated or ks[J + j] >= n0 * (1 - sat)
    saturated = ks[J] >= n1 * (1 - sat)
    for j in range(1, J + 1):
        t = 2.0 ** -j
        ks[J - j] = t * n1 if saturated else solve(-j)
        saturated = saturated or ks[J - j] / t >= n1 * (1 - sat)
    if approximate:
        logger.debug("real interpolation norm used approximate K values (max relative gap %.3g)", max_gap)
    return InterpNorm(functor.combine(ks), ks, approximate, max_gap, solves)


def real_interp_norm(x, couple, theta, q, J=constants.DEFAULT_DYADIC_RANGE):
    """( sum_{j=-J}^{J} [2^{-j theta} K(2^j, x)]^q )^{1/q}, the max over j at q = inf"""
    return real_interp_profile(x, couple, RealK(theta, q, J)).value


class RealInterpolationSpace(NormedSpace):
    """(X0, X1)_{theta,q}; evaluation only"""
    kind = "real_interp"

    def __init__(self, couple, functor):
        super(RealInterpolationSpace, self).__init__(couple.X0.base)
        self.couple = couple
        self.functor = functor

    def norm(self, x):
        return real_interp_profile(x, self.couple, self.functor).value

    def profile(self, x):
        return real_interp_profile(x, self.couple, self.functor)

    @property
    def separable(self):
        return self.functor.property_d

    def describe(self):
        return "{}{}".format(self.couple.describe(), self.functor.describe())


def interpolated_exponent(p0, p1, theta):
    """p with 1/p = (1 - theta)/p0 + theta/p1"""
    inv = (1 - theta) / p0 + theta / p1
    return np.inf if inv == 0 else 1.0 / inv


def complex_interp_space(couple, theta, allow_inf=False):
    """[l^p0(w0), l^p1(w1)]_theta = l^p(w) with
    1/p = (1-theta)/p0 + theta/p1 and w = w0^((1-theta)p/p0) w1^(theta p/p1).

    An l^inf endpoint is refused unless allow_inf: the intersection is not dense
    there. Operator bounds (Riesz-Thorin) still hold and pass allow_inf=True.
    """
    theta = util.check_theta(theta)
    X0, X1 = couple.X0, couple.X1
    if not (isinstance(X0, WeightedLp) and isinstance(X1, WeightedLp)):
        raise UnsupportedNormError("complex interpolation is realized for weighted l^p couples only")
    if not X0.base.n == X1.base.n:
        raise ParameterRangeError("couple", couple.describe(), "common measure space")
    if (np.isinf(X0.p) or np.isinf(X1.p)) and not allow_inf:
        raise FunctorRefusedError("complex interpolation with an l^inf endpoint", NOT_DENSE)
    p = interpolated_exponent(X0.p, X1.p, theta)
    if np.isinf(p):
        return WeightedLp(X0.base, np.inf)
    w = np.ones(couple.dimension)
    if not np.isinf(X0.p):
        w = w * X0.weights ** ((1 - theta) * p / X0.p)
    if not np.isinf(X1.p):
        w = w * X1.weights ** (theta * p / X1.p)
    return WeightedLp(DiscreteMeasureSpace(w), p)


def interpolated_space(functor, couple):
    if isinstance(functor, ComplexWeightedLp):
        return functor.apply(couple, allow_inf=True)
    return functor.apply(couple)


def interpolated_operator_norm_check(T, source, target, functor, samples=constants.GENERIC_ASCENT_CANDIDATES,
                                     tol=1e-7, seed=0, name="interpolated_operator_norm"):
    """||T||_{F(source) -> F(target)} <= max(||T||_{X0->Y0}, ||T||_{X1->Y1}),
    plus the geometric-mean bound for the complex functor.

    The left side is a lower estimate, so exceeding the bound is a hard failure;
    a right side without a certified upper bound makes the check inconclusive.
    """
    report = CheckReport(name, seed)
    T = np.asarray(T, dtype=float)
    b0 = opnorm.operator_norm(T, source.X0, target.X0, seed=seed)
    b1 = opnorm.operator_norm(T, source.X1, target.X1, seed=seed + 1)
    report.measure("endpoint0_lower", b0.lower)
    report.measure("endpoint1_lower", b1.lower)
    FX = interpolated_space(functor, source)
    FY = interpolated_space(functor, target)
    if isinstance(FX, WeightedLp) and isinstance(FY, WeightedLp) and FX.p == FY.p:
        est = opnorm.lp_operator_norm(T, FX.p, FX.weights, FY.weights, seed=seed + 2)
    else:
        est = opnorm.ascent_lower(T, FX, FY, seed=seed + 2, candidates=samples)
    report.measure("interpolated_lower", est.lower)
    if not (b0.certified_upper and b1.certified_upper):
        report.uncertified("endpoint operator norms have no certified upper bound")
        return report
    report.measure("endpoint0_upper", b0.upper)
    report.measure("endpoint1_upper", b1.upper)
    bound = max(b0.upper, b1.upper)
    report.require("interpolated_over_max", est.lower, bound, tol)
    if isinstance(functor, ComplexWeightedLp):
        theta = functor.theta
        report.require("interpolated_over_geometric", est.lower,
                       b0.upper ** (1 - theta) * b1.upper ** theta, tol)
    denom = max(b0.lower, b1.lower)
    report.measure("measured_ratio", est.lower / denom if denom > 0 else 0.0)
    return report


def riesz_thorin_check(matrices, p0, p1, theta, tol=1e-7, seed=0, name="riesz_thorin"):
    """Certified lower bound of ||T||_p against ||T||_p0^(1-theta) ||T||_p1^theta
    for every matrix, with exact (or upper-bracketed) endpoint norms"""
    report = CheckReport(name, seed)
    p = interpolated_exponent(p0, p1, theta)
    worst = -np.inf
    worst_T = None
    for k, T in enumerate(matrices):
        T = np.asarray(T, dtype=float)
        w = np.ones(T.shape[1])
        mid = opnorm.lp_operator_norm(T, p, w, w, seed=seed + k)
        e0 = opnorm.lp_operator_norm(T, p0, w, w, seed=seed + k)
        e1 = opnorm.lp_operator_norm(T, p1, w, w, seed=seed + k)
        excess = mid.lower - e0.upper ** (1 - theta) * e1.upper ** theta
        if excess > worst:
            worst, worst_T = excess, T
    report.measure("interpolated_exponent", p)
    report.measure("matrices", len(matrices))
    report.require("worst_excess", max(worst, 0.0) if worst_T is not None else 0.0, 0.0, tol)
    if worst_T is not None:
        report.worst(matrix=worst_T, excess=worst)
    return report


def k_functional_oracle_check(samples, tol=1e-6, name="k_functional_oracle"):
    """k_functional on (l^1, l^inf) against the rearrangement formula.

    :param samples: iterable of (t, x)
    """
    report = CheckReport(name)
    couples = {}
    worst = 0.0
    for t, x in samples:
        x = np.asarray(x, dtype=float)
        n = x.size
        if n not in couples:
            base = DiscreteMeasureSpace.uniform(n)
            couples[n] = InterpolationCouple(WeightedLp(base, 1), WeightedLp(base, np.inf))
        try:
            r = k_functional(t, x, couples[n])
        except ConvergenceError as e:
            report.uncertified(str(e))
            continue
        dev = abs(r.value - l1_linf_k_closed_form(t, x))
        if dev > worst:
            worst = dev
            report.worst_cases = [{"t": float(t), "x": x.tolist(), "deviation": dev}]
    report.require("k_deviation", worst, 0.0, tol)
    return report
