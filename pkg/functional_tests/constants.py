import sys

CONSISTLAB_CMD = [sys.executable, "-m", "consistlib.cli", "--quiet"]
