"""
Test consistency of operator pairs and the checks that interpolate them
"""
import unittest

import numpy as np

from consistlib import consistency, elliptic, interp
from consistlib.exceptions import (ConsistencyError, DimensionMismatchError,
                                   FunctorRefusedError)
from consistlib.semigroup import GeneratorRealization
from consistlib.spaces import DiscreteMeasureSpace, InterpolationCouple, WeightedLp


def realizations(n, p0=2, p1=4, epsilon=0.0):
    A = elliptic.dirichlet_laplacian(n).A
    base = DiscreteMeasureSpace.uniform(n)
    return (GeneratorRealization(A, WeightedLp(base, p0)),
            GeneratorRealization(A + epsilon * np.eye(n), WeightedLp(base, p1)))


class TestOperatorConsistency(unittest.TestCase):
    def test_identical_operators(self):
        R0, R1 = realizations(5)
        couple = consistency.realization_couple(R0, R1)
        report = consistency.check_operator_consistency(R0.A, R1.A, np.eye(5), 1e-12, couple)
        self.assertEqual("pass", report.verdict)
        self.assertEqual(0.0, report.constants["deviation"])
        self.assertEqual(5.0, report.constants["dense_set_rank"])

    def test_rank_deficient_dense_set(self):
        R0, R1 = realizations(4)
        couple = consistency.realization_couple(R0, R1)
        report = consistency.check_operator_consistency(R0.A, R1.A, np.eye(4)[:2], 1e-12, couple)
        self.assertEqual("inconclusive", report.verdict)

    def test_perturbed_operators(self):
        R0, R1 = realizations(4, epsilon=1e-3)
        couple = consistency.realization_couple(R0, R1)
        report = consistency.check_operator_consistency(R0.A, R1.A, np.eye(4), 1e-12, couple)
        self.assertEqual("fail", report.verdict)
        self.assertAlmostEqual(1e-3, report.constants["deviation"], places=12)

    def test_empty_dense_set(self):
        R0, R1 = realizations(3)
        with self.assertRaises(ValueError):
            consistency.check_operator_consistency(R0.A, R1.A, [], 1e-12, consistency.realization_couple(R0, R1))

    def test_prolongate(self):
        self.assertEqual([1, 1, 2, 2], consistency.prolongate([1, 2], 4).tolist())
        with self.assertRaises(DimensionMismatchError):
            consistency.prolongate([1, 2, 3], 4)


class TestResolventSemigroupEquivalence(unittest.TestCase):
    def test_consistent_pair(self):
        R0, R1 = realizations(8, 1, np.inf)
        report = consistency.resolvent_semigroup_equivalence(R0, R1, [1.0, 2.0], [0.5, 1.0], 64, 1e-6, seed=1)
        self.assertEqual("pass", report.verdict)

    def test_perturbed_pair(self):
        R0, R1 = realizations(8, 1, np.inf, epsilon=1e-2)
        report = consistency.resolvent_semigroup_equivalence(R0, R1, [1.0], [0.5], 64, 1e-6, seed=1)
        self.assertEqual("fail", report.verdict)
        # (A + eps + lambda) y - x = eps y for y the transform of exp(-tA) x
        self.assertTrue(np.isclose(1e-2, report.constants["deviation_resolvent"], rtol=1e-3))

    def test_empty_grids(self):
        R0, R1 = realizations(3)
        with self.assertRaises(ValueError):
            consistency.resolvent_semigroup_equivalence(R0, R1, [], [1.0], 8, 1e-6)


class TestDomainsAndAdjoints(unittest.TestCase):
    def test_domain_intersection(self):
        R0, R1 = realizations(6)
        report = consistency.domain_intersection_check(R0, R1, np.eye(6))
        self.assertEqual("pass", report.verdict)
        self.assertEqual(6.0, report.constants["core_rank"])
        self.assertLessEqual(report.constants["graph_ratio_min"], report.constants["graph_ratio_max"])

    def test_domain_intersection_needs_consistency(self):
        R0, R1 = realizations(4, epsilon=1e-3)
        with self.assertRaises(ConsistencyError):
            consistency.domain_intersection_image(R0, R1, np.eye(4))

    def test_adjoint_pairing(self):
        rng = np.random.default_rng(7)
        T = rng.standard_normal((4, 4))
        w = np.array([0.5, 1.0, 2.0, 4.0])
        f, x = rng.standard_normal(4), rng.standard_normal(4)
        lhs = np.sum(w * f * (T @ x))
        rhs = np.sum(w * (consistency.adjoint(T, w) @ f) * x)
        self.assertAlmostEqual(lhs, rhs, places=12)

    def test_adjoint_consistency(self):
        R0, R1 = realizations(5)
        pair = consistency.ConsistentPair.from_realizations(R0, R1)
        functionals = np.random.default_rng(8).standard_normal((3, 5))
        report = consistency.adjoint_consistency_check(pair, functionals, 1e-10)
        self.assertEqual("pass", report.verdict)
        self.assertGreater(report.constants["adjoint_sum_dual_ratio"], 0.0)


class TestInterpolatedOperators(unittest.TestCase):
    def test_semigroup_refuses_q_inf(self):
        R0, R1 = realizations(4)
        with self.assertRaises(FunctorRefusedError):
            consistency.interpolated_semigroup_check(R0, R1, interp.RealK(0.5, np.inf), [0.5], 1e-8)

    def test_generator_interpolation_refuses_q_inf(self):
        with self.assertRaises(FunctorRefusedError):
            consistency.generator_interpolation_check([realizations(4)], interp.RealK(0.5, np.inf))

    def test_complex_semigroup(self):
        R0, R1 = realizations(4)
        report = consistency.interpolated_semigroup_check(
            R0, R1, interp.ComplexWeightedLp(0.5), [0.25, 0.5, 1.0], 1e-8, seed=3)
        self.assertEqual("pass", report.verdict)
        self.assertEqual(1.0, report.constants["embedding_constant"])

    def test_inconsistent_semigroup(self):
        R0, R1 = realizations(4, epsilon=1e-3)
        report = consistency.interpolated_semigroup_check(
            R0, R1, interp.ComplexWeightedLp(0.5), [0.5], 1e-8)
        self.assertEqual("fail", report.verdict)

    def test_real_semigroup(self):
        R0, R1 = realizations(4)
        report = consistency.interpolated_semigroup_check(
            R0, R1, interp.RealK(0.5, 2, J=4), [0.25, 1.0], 1e-6, samples=2, seed=3, candidates=2)
        self.assertEqual("pass", report.verdict)
        self.assertEqual(interp.RealK(0.5, 2, J=4).scalar_constant(), report.constants["embedding_constant"])
        self.assertLessEqual(report.constants["interpolated_bound_lower"], 1.0 + 1e-6)

    def test_rho_constant_on_identical_couple(self):
        levels = [realizations(n, p0=3, p1=3) for n in (4, 8)]
        report = consistency.generator_interpolation_check(levels, interp.RealK(0.5, 2, J=4), samples=5, seed=2)
        self.assertEqual("pass", report.verdict)
        for n in (4, 8):
            self.assertAlmostEqual(1.0, report.constants["rho_min@n={}".format(n)], places=12)
            self.assertAlmostEqual(1.0, report.constants["rho_max@n={}".format(n)], places=12)
        self.assertAlmostEqual(1.0, report.constants["bracket_variation"], places=12)

    def test_rho_at_least_half(self):
        R0, R1 = realizations(4)
        couple = consistency.realization_couple(R0, R1)
        core = consistency.domain_intersection_image(R0, R1, np.random.default_rng(9).standard_normal((2, 4)))
        for x in core:
            value, _ = consistency.rho(x, R0.A, couple, interp.RealK(0.5, 2, 4))
            self.assertGreaterEqual(value, 0.5 - 1e-6)

    def test_resolvent_interpolation(self):
        R0, R1 = realizations(6)
        report = consistency.resolvent_interpolation_check(R0, R1, interp.ComplexWeightedLp(0.5), seed=4)
        self.assertEqual("pass", report.verdict)

    def test_extension_uniqueness(self):
        R0, R1 = realizations(4)
        pair = consistency.ConsistentPair.from_realizations(R0, R1)
        report = consistency.extension_uniqueness_check(pair, interp.ComplexWeightedLp(0.5), seed=5)
        self.assertEqual("pass", report.verdict)
        self.assertEqual(0.0, report.constants["restriction_deviation"])


if __name__ == "__main__":
    unittest.main()
