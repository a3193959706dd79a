#!/usr/bin/env python3
"""Run the acceptance suite and echo one PASS/FAIL line per criterion.

The heavy pipeline (20 buses, 2 years, drift on, full 30-epoch training)
runs once; expect roughly ten minutes on a desktop CPU.
"""

import subprocess
import sys

if __name__ == "__main__":
    raise SystemExit(
        subprocess.call(
            [sys.executable, "-m", "pytest", "tests/test_acceptance.py", "-v", "-s"]
        )
    )
