"""
Non-destructive state readout
=============================

Instead of pushing bright atoms out of the trap, the atom is imaged in a
deep trap. Atoms in F=4 scatter photons and a few reach the camera; atoms in
F=3 stay dark apart from background counts. Heating can still kick a bright
atom out, and rare Raman events leak it into the dark manifold.
"""

import numpy as np

from atomrb.readout import NdroParams, analytic_summary, characterize, scattering_rate

p = NdroParams()
print("scattering rate %.3g photons/s, detected %.1f per shot" % (scattering_rate(p), p.efficiency * scattering_rate(p) * p.duration))

# Closed form first, then a Monte-Carlo run of the same model.
a = analytic_summary(p)
print("analytic:", {k: round(float(v), 4) for k, v in a.items()})

rng = np.random.default_rng(7)
s = characterize(p, 200_000, rng)
print(f"simulated: threshold {s.threshold}, fidelity {s.fidelity:.4f}, survival {s.survival:.4f}, "
      f"leakage {s.leakage:.4f}, P(det | survived) {s.p_det_conditional:.4f}")

# Short bar chart of the two count distributions.
h = s.histogram
nb, nd = h.bright / h.bright.sum(), h.dark / h.dark.sum()
for k in range(0, min(len(nb), 40), 2):
    print(f"{k:3d} {'#' * int(300 * nd[k]):<30s} {'*' * int(300 * nb[k])}")

# Longer exposure separates the peaks better but loses more atoms.
for ms in (2, 5, 10, 20):
    r = analytic_summary(NdroParams(duration=ms * 1e-3))
    print(f"{ms:3d} ms: fidelity {r['fidelity']:.4f} survival {r['survival']:.3f}")

# Deeper traps slow the heating loss.
for depth in (8.0, 13.3, 18.0):
    r = analytic_summary(NdroParams(trap_depth=depth))
    print(f"depth {depth:5.1f} mK: survival {r['survival']:.3f}")
