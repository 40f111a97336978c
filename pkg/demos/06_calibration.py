"""
Rabi and Ramsey calibration
===========================

Before benchmarking, the drive strength is read off a Rabi flop averaged over
the array, and each site's T2* comes from a Ramsey fringe fitted with the
dephasing envelope.
"""

import tempfile

import numpy as np

from atomrb.config import large_array_preset
from atomrb.experiments import run_calibration

cfg = large_array_preset(seed=3, rows=6, cols=6)

with tempfile.TemporaryDirectory() as out:
    manifest = run_calibration(cfg, out)
    for k, v in manifest.summary.items():
        print(f"{k:16s} {v}")
    fits = np.genfromtxt(f"{out}/ramsey_fits.csv", delimiter=",", names=True, dtype=None, encoding=None)
    print("columns:", fits.dtype.names)
    print(fits[:5])
