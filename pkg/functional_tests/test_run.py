import csv
import os
import shutil
import subprocess
import tempfile
import unittest

import yaml

from functional_tests import constants


class RunTestCase(unittest.TestCase):
    def setUp(self):
        self.out = tempfile.mkdtemp(prefix="consistlab-functional-")

    def tearDown(self):
        shutil.rmtree(self.out, ignore_errors=True)

    def run_fixture(self, name, *args):
        return subprocess.run(
            constants.CONSISTLAB_CMD + ["run", name, "--out", self.out] + list(args),
            stdout=subprocess.PIPE, stderr=subprocess.PIPE)

    def table(self, name):
        with open(os.path.join(self.out, "{}.table.csv".format(name))) as f:
            return f.read()

    def rows(self, name):
        """(check, constant_name) -> row of the run's table"""
        with open(os.path.join(self.out, "{}.table.csv".format(name))) as f:
            return {(row["check"], row["constant_name"]): row for row in csv.DictReader(f)}

    def tree(self, name):
        with open(os.path.join(self.out, "{}.report.yml".format(name))) as f:
            return {c["name"]: c for c in yaml.safe_load(f)["checks"]}

    def value(self, rows, check, constant):
        row = rows[(check, constant)]
        self.assertEqual("pass", row["verdict"], row)
        return float(row["value"])

    def assert_passes(self, name):
        result = self.run_fixture(name)
        self.assertEqual(0, result.returncode, result.stdout.decode("utf-8") + result.stderr.decode("utf-8"))
        return self.rows(name)

    def test_minimal_passes(self):
        result = self.run_fixture("minimal")
        self.assertEqual(0, result.returncode, result.stderr.decode("utf-8"))
        self.assertTrue(os.path.isfile(os.path.join(self.out, "minimal.report.yml")))

    def test_perturbed_pair_fails(self):
        result = self.run_fixture("perturbed-pair-control")
        self.assertEqual(1, result.returncode)
        self.assertIn("perturbed-equivalence", result.stdout.decode("utf-8"))

    def test_table_is_deterministic(self):
        self.assertEqual(0, self.run_fixture("euler-convergence", "--jobs", "3").returncode)
        first = self.table("euler-convergence")
        self.assertEqual(0, self.run_fixture("euler-convergence", "--jobs", "1").returncode)
        self.assertEqual(first, self.table("euler-convergence"))

    def test_seed_override_changes_seed_column(self):
        self.run_fixture("minimal", "--seed", "1", "--format", "table")
        first = self.table("minimal")
        self.run_fixture("minimal", "--seed", "2", "--format", "table")
        self.assertNotEqual(first, self.table("minimal"))

    def test_lp_domain_interpolation(self):
        rows = self.assert_passes("lp-domain-interpolation")
        brackets = []
        for n in (16, 32, 64, 128):
            lo = self.value(rows, "graph-couple", "rho_min@n={}".format(n))
            hi = self.value(rows, "graph-couple", "rho_max@n={}".format(n))
            self.assertTrue(0.01 <= lo <= hi <= 100.0)
            brackets.append(self.value(rows, "graph-couple", "bracket@n={}".format(n)))
            self.assertAlmostEqual(hi / lo, brackets[-1], places=9)
        variation = self.value(rows, "graph-couple", "bracket_variation")
        self.assertLess(variation, 2.0)
        self.assertAlmostEqual(max(brackets) / min(brackets), variation, places=9)

    def test_dual_sum_identity(self):
        rows = self.assert_passes("dual-sum-identity")
        for check in ("weighted-p15-p4", "l1-l2"):
            self.assertLessEqual(self.value(rows, check, "dual_sum_deviation"), 1e-5)
            self.assertEqual(100.0, self.value(rows, check, "samples"))

    def test_riesz_thorin_bound(self):
        rows = self.assert_passes("riesz-thorin-bound")
        self.assertEqual(2.0, self.value(rows, "endpoints-1-inf", "interpolated_exponent"))
        self.assertEqual(1000.0, self.value(rows, "endpoints-1-inf", "matrices"))
        self.assertLessEqual(self.value(rows, "endpoints-1-inf", "worst_excess"), 1e-7)

    def test_interpolated_semigroup(self):
        rows = self.assert_passes("interpolated-semigroup")
        for check in ("real-q2", "complex"):
            self.assertLessEqual(self.value(rows, check, "law_defect"), 1e-8)
            self.assertLessEqual(self.value(rows, check, "bound_excess"), 1e-8)
            self.assertLessEqual(self.value(rows, check, "continuity_excess"), 1e-8)
        self.assertEqual(1.0, self.value(rows, "complex", "embedding_constant"))
        self.assertLessEqual(self.value(rows, "operator-norm-bound", "interpolated_over_max"),
                             max(self.value(rows, "operator-norm-bound", "endpoint0_upper"),
                                 self.value(rows, "operator-norm-bound", "endpoint1_upper")) + 1e-7)
        refused = self.tree("interpolated-semigroup")["real-qinf-refused"]
        self.assertEqual("pass", refused["verdict"])
        self.assertEqual({}, refused["constants"])
        self.assertIn("refused as expected", refused["notes"][0])

    def test_resolvent_interpolation(self):
        rows = self.assert_passes("resolvent-interpolation")
        for check in ("complex", "real"):
            self.assertLessEqual(self.value(rows, check, "action_deviation"), 1e-12)
            self.assertLessEqual(self.value(rows, check, "bound_excess"), 1e-8)
            self.assertLessEqual(self.value(rows, check, "interpolated_lower"),
                                 max(self.value(rows, check, "endpoint0_upper"),
                                     self.value(rows, check, "endpoint1_upper")) + 1e-8)
        self.assertIn(("resolvent-operator-norm", "interpolated_over_geometric"), rows)

    def test_gaussian_bound(self):
        rows = self.assert_passes("gaussian-bound")
        self.assertLessEqual(abs(self.value(rows, "free-kernel", "c") - 1.0), 0.25 + 1e-12)
        self.assertLessEqual(abs(self.value(rows, "free-kernel", "diagonal_exponent") - 0.5), 0.05)


class ValidateTestCase(unittest.TestCase):
    def test_every_fixture_validates(self):
        names = subprocess.check_output(constants.CONSISTLAB_CMD + ["list-fixtures"]).decode("utf-8").split()
        self.assertIn("lp-domain-interpolation", names)
        for name in names:
            out = subprocess.check_output(constants.CONSISTLAB_CMD + ["validate", name])
            self.assertIn("Valid", out.decode("utf-8"))

    def test_ladder_levels(self):
        out = subprocess.check_output(constants.CONSISTLAB_CMD + ["validate", "lp-domain-interpolation"])
        self.assertIn("4 refinement levels", out.decode("utf-8"))
