"""Re-measure the pinned constants on the calibration corpus.

    python scripts/calibrate.py [--output src/lolab/data/calibration.json]

Set LOLAB_THREADS to run instances in parallel; the result does not depend on it.
"""
import argparse
import json
from pathlib import Path

from lolab.calibration import write_calibration

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "lolab" / "data" / "calibration.json"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--output", default=str(DEFAULT_OUT))
    args = ap.parse_args()
    cal = write_calibration(args.output)
    print(json.dumps({k: v["value"] for k, v in cal.items()}, indent=2))
