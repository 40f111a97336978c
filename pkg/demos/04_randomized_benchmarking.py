"""
Randomized benchmarking on an atom array
========================================

Random Clifford strings of growing length are played on every site at once,
followed by the gate that should return each atom to its starting state. The
decay of the success probability gives the average gate error per site,
separately from state preparation and measurement errors.

A 5x5 array keeps the run short; the large-array preset uses 15x15.
"""

import tempfile

import numpy as np

from atomrb.config import large_array_preset
from atomrb.experiments import fit_sites, run_rb, simulate_rb, site_curve
from atomrb.fitting import aggregate_array

cfg = large_array_preset(seed=11, rows=5, cols=5)
print("lengths:", list(cfg.rb.lengths))
print("strings:", cfg.rb.n_strings, " shots per point:", cfg.rb.shots_per_point)

sites, strings, succ, shots = simulate_rb(cfg)
print("sites", len(sites), " counts shape (site, string, length):", succ.shape)

# Site (0,0): success probability averaged over strings at each length.
curve = site_curve(cfg, succ[0], shots[0])
for n in cfg.rb.lengths:
    m = curve.n == n
    print(f"  N={n:4d}  P = {curve.p[m].mean():.3f}  ({curve.shots[m].sum()} loaded atoms)")

fits = fit_sites(cfg, succ, shots)
f = fits[0]
print(f"site (0,0): F^2 = {f.fidelity:.6f} +/- {f.fidelity_err:.1e}, SPAM error {f.d_spam:.3f}")

summary = aggregate_array(fits)
print(f"array: F^2 = {summary.fidelity_mean:.6f} +/- {summary.fidelity_sem:.1e} (sem), "
      f"spread {summary.fidelity_min:.6f} .. {summary.fidelity_max:.6f}")
print(f"array: SPAM error {summary.spam_mean:.3f} +/- {summary.spam_std:.3f}")

# Gate errors per site, laid out like the array.
grid = np.full((cfg.array.rows, cfg.array.cols), np.nan)
for s, fit in zip(sites, fits):
    grid[s.row, s.col] = 1e5 * fit.d / 2
print("error per gate x 1e5:")
print(np.array2string(grid, precision=1))

# The same run end to end, with every table written to disk.
with tempfile.TemporaryDirectory() as out:
    manifest = run_rb(cfg, out)
    print("wrote", sorted(manifest.files))
    print(manifest.summary)
