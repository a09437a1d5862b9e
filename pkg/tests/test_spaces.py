"""
Test the measure spaces, their norms and dual norms
"""
import gc
import unittest
import weakref

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from consistlib import spaces
from consistlib.exceptions import (DimensionMismatchError, ParameterRangeError,
                                   UnsupportedNormError)
from consistlib.spaces import (DiscreteMeasureSpace, DualOf, Graph, InterpolationCouple,
                               Intersection, Sobolev1p, Sum, WeightedLp)

WEIGHTS = np.array([0.5, 1.0, 2.0, 1.0, 0.25])
EXPONENTS = [1.0, 1.5, 2.0, 3.0, np.inf]
vectors = arrays(np.float64, (5,), elements=st.floats(min_value=-1e3, max_value=1e3))
grid_vectors = arrays(np.float64, (5,), elements=st.integers(-80, 80).map(lambda k: k / 8.0))
KINDS = ["sum", "intersection", "graph", "sobolev", "dual"]


def lp(p, weights=(1.0, 1.0)):
    return WeightedLp(DiscreteMeasureSpace(weights), p)


class TestMeasureSpace(unittest.TestCase):
    def test_uniform(self):
        base = DiscreteMeasureSpace.uniform(3, 0.5)
        self.assertEqual(3, base.n)
        self.assertEqual([0.5, 0.5, 0.5], base.weights.tolist())

    def test_rejects_bad_weights(self):
        for w in ([1.0, 0.0], [1.0, -1.0], [1.0, np.inf], []):
            with self.assertRaises(ParameterRangeError):
                DiscreteMeasureSpace(w)

    def test_weights_are_frozen(self):
        base = DiscreteMeasureSpace([1.0, 2.0])
        with self.assertRaises(ValueError):
            base.weights[0] = 3.0

    def test_same_as(self):
        self.assertTrue(DiscreteMeasureSpace([1, 2]).same_as(DiscreteMeasureSpace([1.0, 2.0])))
        self.assertFalse(DiscreteMeasureSpace([1, 2]).same_as(DiscreteMeasureSpace([2, 1])))


class TestNorms(unittest.TestCase):
    def test_lp_norm_values(self):
        self.assertEqual(5.0, spaces.lp_norm([3, -4], 2, [1, 1]))
        self.assertEqual(2.5, spaces.lp_norm([1, -1], 1, [0.5, 2]))
        self.assertEqual(7.0, spaces.lp_norm([1, -7, 3], np.inf, [1, 1, 1]))
        self.assertAlmostEqual(2.0, spaces.lp_norm([1, 1], 2, [1, 3]), places=14)

    def test_lp_norm_does_not_overflow(self):
        self.assertTrue(np.isclose(np.sqrt(2) * 1e200, spaces.lp_norm([1e200, 1e200], 2, [1, 1]), rtol=1e-14))

    def test_linf_ignores_the_measure(self):
        self.assertEqual(4.0, lp(np.inf, [10.0, 0.1]).norm([1.0, -4.0]))

    def test_exponent_below_one(self):
        with self.assertRaises(ParameterRangeError):
            lp(0.5)

    def test_dimension_checked(self):
        with self.assertRaises(DimensionMismatchError):
            lp(2).norm([1.0, 2.0, 3.0])

    def test_intersection_norm(self):
        couple = InterpolationCouple(lp(1), lp(np.inf))
        self.assertEqual(7.0, spaces.intersection_norm([3.0, 1.0], couple))
        self.assertEqual(7.0, Intersection(couple).norm([3.0, 1.0]))

    def test_sum_norm(self):
        """||(3, 1)|| in l^1 + l^inf is the largest entry"""
        couple = InterpolationCouple(lp(1), lp(np.inf))
        self.assertAlmostEqual(3.0, spaces.sum_norm([3.0, 1.0], couple), places=6)

    def test_graph_norm(self):
        A = np.diag([2.0, 3.0])
        self.assertEqual(7.0, spaces.graph_norm([1.0, 1.0], A, lp(1)))
        self.assertEqual(7.0, Graph(A, lp(1)).norm([1.0, 1.0]))

    def test_graph_same_as(self):
        A = np.diag([2.0, 3.0])
        X = lp(2)
        self.assertTrue(Graph(A, X).same_as(Graph(A.copy(), X)))
        self.assertFalse(Graph(A, X).same_as(Graph(2 * A, X)))
        self.assertFalse(Graph(A, X).same_as(Graph(A, lp(3))))
        self.assertFalse(Graph(A, X).same_as(X))

    def test_couple_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            InterpolationCouple(lp(2), lp(2, [1.0, 1.0, 1.0]))

    def test_separable(self):
        self.assertTrue(lp(2).separable)
        self.assertFalse(lp(np.inf).separable)
        couple = InterpolationCouple(lp(2), lp(np.inf))
        self.assertTrue(Sum(couple).separable)
        self.assertFalse(Intersection(couple).separable)

    @settings(max_examples=50, deadline=None)
    @given(x=vectors, y=vectors, p=st.sampled_from(EXPONENTS))
    def test_triangle_inequality(self, x, y, p):
        X = WeightedLp(DiscreteMeasureSpace(WEIGHTS), p)
        nx, ny = X.norm(x), X.norm(y)
        self.assertLessEqual(X.norm(x + y), nx + ny + 1e-9 * (nx + ny) + 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(x=vectors, p=st.sampled_from(EXPONENTS))
    def test_homogeneity(self, x, p):
        X = WeightedLp(DiscreteMeasureSpace(WEIGHTS), p)
        self.assertTrue(np.isclose(2.5 * X.norm(x), X.norm(-2.5 * x), rtol=1e-12, atol=0))


def composed(kind):
    base = DiscreteMeasureSpace(WEIGHTS)
    couple = InterpolationCouple(WeightedLp(base, 1.5), WeightedLp(base, 4))
    if kind == "sum":
        return Sum(couple)
    if kind == "intersection":
        return Intersection(couple)
    if kind == "graph":
        return Graph(np.diag([1.0, 2.0, 3.0, 4.0, 5.0]) + np.eye(5, k=1), WeightedLp(base, 3))
    if kind == "sobolev":
        return Sobolev1p(base, 2.5, np.diff(np.eye(5), axis=0), [1.0, 0.5, 0.5, 1.0])
    return DualOf(WeightedLp(base, 3))


class TestComposedNorms(unittest.TestCase):
    @settings(max_examples=25, deadline=None)
    @given(x=grid_vectors, y=grid_vectors, kind=st.sampled_from(KINDS))
    def test_triangle_inequality(self, x, y, kind):
        X = composed(kind)
        nx, ny = X.norm(x), X.norm(y)
        self.assertLessEqual(X.norm(x + y), nx + ny + 1e-7 * (nx + ny) + 1e-9)

    @settings(max_examples=25, deadline=None)
    @given(x=grid_vectors, kind=st.sampled_from(KINDS))
    def test_homogeneity(self, x, kind):
        X = composed(kind)
        self.assertTrue(np.isclose(2.5 * X.norm(x), X.norm(-2.5 * x), rtol=1e-6, atol=1e-9))

    @settings(max_examples=25, deadline=None)
    @given(x=grid_vectors)
    def test_sum_and_intersection_against_endpoints(self, x):
        couple = composed("sum").couple
        n0, n1 = couple.X0.norm(x), couple.X1.norm(x)
        self.assertLessEqual(spaces.sum_norm(x, couple), min(n0, n1) * (1 + 1e-7) + 1e-9)
        self.assertGreaterEqual(spaces.intersection_norm(x, couple), max(n0, n1))

    def test_positive_off_zero(self):
        x = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
        for kind in KINDS:
            self.assertEqual(0.0, composed(kind).norm(np.zeros(5)))
            self.assertGreater(composed(kind).norm(x), 0.0)


class TestDualNorms(unittest.TestCase):
    def test_closed_form_l3(self):
        f = [2.0, 1.0]
        self.assertAlmostEqual((2 ** 1.5 + 1) ** (2.0 / 3.0), spaces.dual_norm(f, lp(3)), places=12)

    def test_dual_of_linf_is_weighted_l1(self):
        self.assertEqual(3.0, spaces.dual_norm([1.0, 1.0], lp(np.inf, [2.0, 1.0])))

    def test_closed_and_optimized_agree(self):
        X = WeightedLp(DiscreteMeasureSpace.uniform(3, 0.5), 3)
        f = [1.0, -2.0, 0.5]
        closed = spaces.dual_norm(f, X, method="closed")
        optimized = spaces.dual_norm(f, X, method="optimize")
        self.assertAlmostEqual(1.0, optimized / closed, places=5)

    def test_closed_only_raises_without_formula(self):
        X = Intersection(InterpolationCouple(lp(1), lp(2)))
        with self.assertRaises(UnsupportedNormError):
            spaces.dual_norm([1.0, 1.0], X, method="closed")

    def test_unknown_method(self):
        with self.assertRaises(ValueError):
            spaces.dual_norm([1.0, 1.0], lp(2), method="guess")

    def test_zero_functional(self):
        self.assertEqual(0.0, spaces.dual_norm([0.0, 0.0], lp(2), method="optimize"))

    def test_dual_solver_belongs_to_the_space(self):
        X = Intersection(InterpolationCouple(lp(1), lp(2)))
        Y = Intersection(InterpolationCouple(lp(1), lp(2)))
        self.assertGreater(spaces.dual_norm([1.0, 1.0], X, method="optimize"), 0.0)
        self.assertIs(X.dual_solver(), X.dual_solver())
        self.assertIsNot(X.dual_solver(), Y.dual_solver())
        self.assertIs(X, X.dual_solver().space)
        ref = weakref.ref(X)
        del X
        gc.collect()
        self.assertIsNone(ref())

    @settings(max_examples=50, deadline=None)
    @given(f=vectors, x=vectors, p=st.sampled_from(EXPONENTS))
    def test_hoelder(self, f, x, p):
        X = WeightedLp(DiscreteMeasureSpace(WEIGHTS), p)
        pairing = abs(np.sum(WEIGHTS * f * x))
        bound = spaces.dual_norm(f, X) * X.norm(x)
        self.assertLessEqual(pairing, bound * (1 + 1e-9) + 1e-9)

    def test_dual_sum_identity(self):
        base = DiscreteMeasureSpace([1.0, 2.0, 0.5])
        couple = InterpolationCouple(WeightedLp(base, 1.5), WeightedLp(base, 4))
        samples = list(np.random.default_rng(4).standard_normal((5, 3)))
        report = spaces.dual_sum_identity_check(couple, samples, 1e-5)
        self.assertEqual("pass", report.verdict)
        self.assertEqual(5.0, report.constants["samples"])
        self.assertLess(report.constants["dual_sum_deviation"], 1e-5)


if __name__ == "__main__":
    unittest.main()
