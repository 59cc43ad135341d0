"""Forward suites (Stanley exhaustive, Erdos random, Halasz ratios) to CSV.

    python scripts/run_forward.py configs/forward.json
"""
import sys

from lolab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify-forward", *sys.argv[1:]]))
