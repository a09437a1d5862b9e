#!/usr/bin/env python
import io
import unittest

import numpy as np
from hypothesis import given, strategies as st

from consistlib import logutil, util
from consistlib.exceptions import DimensionMismatchError, ParameterRangeError


class TestUtil(unittest.TestCase):
    def test_derive_seed(self):
        self.assertEqual(util.derive_seed(7, "law"), util.derive_seed(7, "law"))
        self.assertNotEqual(util.derive_seed(7, "law"), util.derive_seed(8, "law"))
        self.assertNotEqual(util.derive_seed(7, "law"), util.derive_seed(7, "bound"))
        self.assertLess(util.derive_seed(7, "law"), 2 ** 32)

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_format_number_round_trips(self, value):
        self.assertEqual(value, float(util.format_number(value)))

    def test_format_number(self):
        self.assertEqual("0.10000000000000001", util.format_number(0.1))
        self.assertEqual("2", util.format_number(2))
        self.assertEqual("inf", util.format_number(np.inf))
        self.assertEqual("1", util.format_number(True))
        self.assertEqual("0", util.format_number(np.bool_(False)))

    def test_as_vector(self):
        self.assertEqual([1.0, 2.0], util.as_vector([1, 2], 2).tolist())
        self.assertEqual((1,), util.as_vector(3.0).shape)
        self.assertTrue(np.iscomplexobj(util.as_vector([1j, 2])))
        with self.assertRaises(DimensionMismatchError):
            util.as_vector([1, 2], 3)
        with self.assertRaises(DimensionMismatchError):
            util.as_vector([[1, 2]])

    def test_as_square_matrix(self):
        self.assertEqual((1, 1), util.as_square_matrix(2.0).shape)
        with self.assertRaises(DimensionMismatchError):
            util.as_square_matrix(np.ones((2, 3)))
        with self.assertRaises(DimensionMismatchError):
            util.as_square_matrix(np.eye(2), 3)

    def test_parameter_checks(self):
        self.assertEqual(0.0, util.check_positive("h", 0.0, strict=False))
        for bad in (0.0, -1.0, np.inf, np.nan):
            with self.assertRaises(ParameterRangeError):
                util.check_positive("h", bad)
        for bad in (0.0, 1.0, -0.5):
            with self.assertRaises(ParameterRangeError):
                util.check_theta(bad)
        self.assertEqual(np.inf, util.check_exponent("p", np.inf))
        with self.assertRaises(ParameterRangeError):
            util.check_exponent("p", 0.5)

    def test_conjugate_exponent(self):
        self.assertEqual(np.inf, util.conjugate_exponent(1))
        self.assertEqual(1.0, util.conjugate_exponent(np.inf))
        self.assertEqual(2.0, util.conjugate_exponent(2))
        self.assertAlmostEqual(1.5, util.conjugate_exponent(3.0))

    def test_parallel_results_keep_input_order(self):
        out = io.StringIO()
        results = util.parallel_results_with_progress(list(range(20)), lambda i: i * i, jobs=4, file=out)
        self.assertEqual([i * i for i in range(20)], results)
        self.assertEqual("[" + "*" * 20 + "]\n", out.getvalue())

    def test_loggers(self):
        self.assertEqual("consistlib.scenario", logutil.getLogger("consistlib.scenario").name)
        self.assertEqual("consistlib.checks", logutil.getLogger("checks").name)
        adapter = logutil.entity_logger("law", __name__)
        self.assertEqual(("[law] ok", {}), adapter.process("ok", {}))


if __name__ == "__main__":
    unittest.main()
