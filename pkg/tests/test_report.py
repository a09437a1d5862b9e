"""
Test check and run reports and their serializations
"""
import csv
import io
import os
import shutil
import tempfile
import unittest

import yaml

from consistlib import constants, report
from consistlib.report import CheckReport, RunReport


def run_with(*verdicts):
    run = RunReport("demo", "abc", "0.1.0", 5)
    for i, verdict in enumerate(verdicts):
        check = CheckReport("c{}".format(i), i)
        if verdict == "fail":
            check.fail("broken")
        elif verdict == "inconclusive":
            check.uncertified("no certificate")
        run.add(check)
    return run


class TestCheckReport(unittest.TestCase):
    def test_require(self):
        r = CheckReport("x", 1)
        self.assertTrue(r.require("gap", 1e-9, 0.0, 1e-8))
        self.assertEqual("pass", r.verdict)
        self.assertFalse(r.require("ratio", 0.4, 0.5, 1e-6, relation=">="))
        self.assertEqual("fail", r.verdict)
        self.assertEqual(1e-6, r.tolerances["ratio"])
        self.assertIn("ratio", r.failures[0])
        with self.assertRaises(ValueError):
            r.require("bad", 0.0, 0.0, 0.0, relation="==")

    def test_failure_dominates_uncertainty(self):
        r = CheckReport("x")
        r.uncertified("solver status inaccurate")
        self.assertEqual("inconclusive", r.verdict)
        r.fail("bound exceeded")
        self.assertEqual("fail", r.verdict)
        self.assertFalse(r.passed)

    def test_verdict_override(self):
        r = CheckReport("x")
        r.verdict = "inconclusive"
        self.assertEqual("inconclusive", r.verdict)
        with self.assertRaises(ValueError):
            r.verdict = "maybe"

    def test_to_dict(self):
        r = CheckReport("x", 3)
        r.measure("value", 2)
        r.worst(t=0.5, x=[1.0, 2.0])
        r.note("finite dimensional")
        d = r.to_dict()
        self.assertEqual({"value": 2.0}, d["constants"])
        self.assertEqual([{"t": 0.5, "x": [1.0, 2.0]}], d["worst_cases"])
        self.assertNotIn("failures", d)
        self.assertNotIn("elapsed_seconds", d)


class TestRunReport(unittest.TestCase):
    def test_exit_codes(self):
        self.assertEqual(constants.EXIT_PASS, run_with().exit_code)
        self.assertEqual(constants.EXIT_PASS, run_with("pass", "pass").exit_code)
        self.assertEqual(constants.EXIT_INCONCLUSIVE, run_with("pass", "inconclusive").exit_code)
        self.assertEqual(constants.EXIT_FAIL, run_with("inconclusive", "fail", "pass").exit_code)

    def test_summary(self):
        self.assertEqual({"pass": 1, "fail": 1, "inconclusive": 2},
                         run_with("pass", "fail", "inconclusive", "inconclusive").summary())

    def test_empty_table_has_header(self):
        rows = list(csv.reader(io.StringIO(report.render_table(run_with()))))
        self.assertEqual([constants.TABLE_HEADER], rows)

    def test_table_rows(self):
        run = run_with("pass")
        run.checks[0].measure("gap", 0.1, 1e-8)
        run.checks[0].measure("flag", True)
        rows = list(csv.reader(io.StringIO(report.render_table(run))))
        self.assertEqual(3, len(rows))
        self.assertEqual(["demo", "c0", "pass", "gap", "0.10000000000000001", "1e-08", "0"], rows[1])
        self.assertEqual("1", rows[2][4])
        self.assertEqual("", rows[2][5])

    def test_tree(self):
        run = run_with("pass", "fail")
        tree = yaml.safe_load(report.render_tree(run))
        self.assertEqual("demo", tree["scenario"])
        self.assertEqual(["c0", "c1"], [c["name"] for c in tree["checks"]])
        self.assertEqual(constants.FINITE_DIMENSION_NOTE, tree["note"])


class TestEmit(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp(prefix="consistlab-test-")

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_writes_both_formats(self):
        out = os.path.join(self.tmp, "nested", "out")
        written = report.emit_report(run_with("pass"), ["tree", "table"], out)
        self.assertEqual([os.path.join(out, "demo.report.yml"), os.path.join(out, "demo.table.csv")], written)
        for path in written:
            self.assertTrue(os.path.isfile(path))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            report.emit_report(run_with(), ["html"], self.tmp)


if __name__ == "__main__":
    unittest.main()
