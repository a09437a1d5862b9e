"""
Test the assertion helpers
"""
import os
import shutil
import tempfile
import unittest

from consistlib import assertion


class TestAssert(unittest.TestCase):
    """
    Test the methods of the assertion module.

    Each raises an exception if the asserted test fails.
    """
    def setUp(self):
        self.tmp = tempfile.mkdtemp(prefix="consistlab-test-")
        self.file = os.path.join(self.tmp, "file.txt")
        with open(self.file, "w") as f:
            f.write("x")

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_isdir(self):
        """
        Verify both positive and negative results for directory test
        """
        assertion.isdir(self.tmp, "dir missing")
        with self.assertRaises(FileNotFoundError):
            assertion.isdir(os.path.join(self.tmp, "missing"), "dir missing")
        with self.assertRaises(FileNotFoundError):
            assertion.isdir(self.file, "file, not dir")

    def test_isfile(self):
        assertion.isfile(self.file, "file missing")
        with self.assertRaises(FileNotFoundError):
            assertion.isfile(self.tmp, "dir, not file")

    def test_writable_dir(self):
        target = os.path.join(self.tmp, "a", "b")
        assertion.writable_dir(target, "not writable")
        self.assertTrue(os.path.isdir(target))
        # a path under a regular file can never be created
        with self.assertRaises(PermissionError):
            assertion.writable_dir(os.path.join(self.file, "sub"), "not writable")


if __name__ == "__main__":
    unittest.main()
