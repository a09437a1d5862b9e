"""
Operator-norm brackets ||T||_{X->Y} as (lower, upper).

Weighted l^1, l^2 and l^inf endpoints are exact. Other weighted l^p pairs with
a common exponent get the p-norm power iteration (a certified lower bound)
bracketed above by the Riesz-Thorin bound between the exact endpoints. Any
other pair of spaces gets a seeded multi-start ratio ascent, which only
yields a lower bound.
"""
import numpy as np

from consistlib import constants, logutil, util
from consistlib.exceptions import DimensionMismatchError
from consistlib.spaces import WeightedLp

logger = logutil.getLogger(__name__)


class OperatorNormBracket(object):
    def __init__(self, lower, upper=np.inf, method="ascent", maximizer=None):
        self.lower = float(lower)
        self.upper = float(upper)
        self.method = method
        self.maximizer = maximizer

    @property
    def exact(self):
        return self.upper <= self.lower * (1 + 1e-12) + 1e-300

    @property
    def certified_upper(self):
        return np.isfinite(self.upper)

    def __repr__(self):
        return "OperatorNormBracket({:.6g}, {:.6g}, {})".format(self.lower, self.upper, self.method)


def _plain_lp_norm(v, p):
    a = np.abs(v)
    if np.isinf(p):
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def _dual_vector(y, p):
    """The l^q-unit vector z with z.y = ||y||_p"""
    a = np.abs(y)
    nrm = _plain_lp_norm(y, p)
    if nrm == 0:
        return np.zeros_like(y)
    return np.sign(y) * (a / nrm) ** (p - 1)


def matrix_norm_1(B):
    return float(np.abs(B).sum(axis=0).max())


def matrix_norm_inf(B):
    return float(np.abs(B).sum(axis=1).max())


def matrix_norm_2(B):
    return float(np.linalg.norm(B, 2))


def power_iteration_lower(B, p, restarts=constants.ASCENT_RESTARTS, seed=0, maxiter=100):
    """Boyd's p-norm power method from `restarts` seeded starts.

    :return: (lower bound on ||B||_p, maximizing vector)
    """
    q = util.conjugate_exponent(p)
    rng = util.rng(seed)
    n = B.shape[1]
    best, best_x = 0.0, np.ones(n)
    starts = [np.ones(n)] + [rng.standard_normal(n) for _ in range(max(restarts - 1, 0))]
    for x in starts:
        x = x / _plain_lp_norm(x, p)
        est = 0.0
        for _ in range(maxiter):
            y = B @ x
            est = _plain_lp_norm(y, p)
            if est == 0:
                break
            z = B.T @ _dual_vector(y, p)
            if _plain_lp_norm(z, q) <= z @ x * (1 + 1e-14):
                break
            x = _dual_vector(z, q)
            x = x / _plain_lp_norm(x, p)
        if est > best:
            best, best_x = est, x
    return best, best_x


def riesz_thorin_upper(B, p):
    """Interpolated bound for plain l^p between the exact neighbouring endpoints"""
    if p == 2:
        return matrix_norm_2(B)
    if np.isinf(p):
        return matrix_norm_inf(B)
    if p == 1:
        return matrix_norm_1(B)
    if p < 2:
        theta = 2.0 * (1.0 - 1.0 / p)
        return matrix_norm_1(B) ** (1 - theta) * matrix_norm_2(B) ** theta
    theta = 1.0 - 2.0 / p
    return matrix_norm_2(B) ** (1 - theta) * matrix_norm_inf(B) ** theta


def lp_operator_norm(T, p, w_src, w_dst, seed=0, restarts=constants.ASCENT_RESTARTS):
    """||T|| from l^p(w_src) to l^p(w_dst)"""
    T = np.asarray(T)
    if p == 1:
        value = float(np.max(np.sum(w_dst[:, None] * np.abs(T), axis=0) / w_src))
        return OperatorNormBracket(value, value, "column sums")
    if np.isinf(p):
        value = matrix_norm_inf(T)
        return OperatorNormBracket(value, value, "row sums")
    # conjugate to plain l^p
    B = (w_dst ** (1.0 / p))[:, None] * T / (w_src ** (1.0 / p))[None, :]
    if p == 2:
        value = matrix_norm_2(B)
        return OperatorNormBracket(value, value, "singular value")
    lower, x = power_iteration_lower(B, p, restarts=restarts, seed=seed)
    upper = riesz_thorin_upper(B, p)
    return OperatorNormBracket(min(lower, upper), upper, "power iteration", x / (w_src ** (1.0 / p)))


def _ratio(T, x, X, Y):
    nx = X.norm(x)
    if nx == 0:
        return 0.0
    return Y.norm(T @ x) / nx


def ascent_lower(T, X, Y, seed=0, candidates=constants.GENERIC_ASCENT_CANDIDATES,
                 rounds=constants.GENERIC_ASCENT_ROUNDS):
    """Multi-start ratio ascent for spaces without closed forms.

    Starts are the leading right singular vectors of T, coordinate vectors and
    seeded gaussians; the best start is refined by a coordinate pattern search.
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[1]
    rng = util.rng(seed)
    starts = []
    _, _, vt = np.linalg.svd(T)
    starts.extend(vt[:min(3, n)])
    if n <= 2 * candidates:
        starts.extend(np.eye(n))
    while len(starts) < candidates + min(3, n):
        starts.append(rng.standard_normal(n))
    best, best_x = -1.0, None
    for x in starts:
        r = _ratio(T, x, X, Y)
        if r > best:
            best, best_x = r, x
    step = 0.25
    for _ in range(rounds):
        scale = np.abs(best_x).max()
        for i in range(n):
            for sign in (1.0, -1.0):
                trial = best_x.copy()
                trial[i] += sign * step * scale
                r = _ratio(T, trial, X, Y)
                if r > best:
                    best, best_x = r, trial
        step /= 4.0
    logger.debug("ascent lower bound %.6g from %d starts", best, len(starts))
    return OperatorNormBracket(max(best, 0.0), np.inf, "ascent", best_x)


def operator_norm(T, X, Y=None, seed=0, restarts=constants.ASCENT_RESTARTS):
    """Bracket ||T||_{X->Y}; Y defaults to X"""
    Y = X if Y is None else Y
    T = np.asarray(T)
    if T.shape != (Y.dimension, X.dimension):
        raise DimensionMismatchError((Y.dimension, X.dimension), T.shape, "operator")
    if isinstance(X, WeightedLp) and isinstance(Y, WeightedLp) and X.p == Y.p:
        return lp_operator_norm(T, X.p, X.weights, Y.weights, seed=seed, restarts=restarts)
    return ascent_lower(T, X, Y, seed=seed)
