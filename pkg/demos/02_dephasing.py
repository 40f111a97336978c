"""
Quasi-static dephasing across the array
=======================================

Each atom sees a slightly different light shift, fixed for one shot but
random from shot to shot. Averaged over shots this washes out Ramsey
fringes with the envelope alpha(t). The same detuning, held through a whole
gate sequence, sets the dephasing floor of the gate error.
"""

import numpy as np

from atomrb.sites import ArrayConfig, build_array, coherence_alpha, predicted_gate_error, sample_detuning

rng = np.random.default_rng(0)
t2 = 14.09e-3

delta = sample_detuning(t2, rng, 500_000)
print("detuning spread: %.1f rad/s (mean %.2f)" % (delta.std(), delta.mean()))

for t in (0.0, 5e-3, 14e-3, 28e-3):
    mc = 0.5 + 0.5 * np.cos(delta * t).mean()
    print(f"t={t * 1e3:5.1f} ms   alpha model {coherence_alpha(t, t2):.4f}   Monte-Carlo {mc:.4f}")

# The quoted prediction uses a mean Clifford area of 2.95 pi.
rabi = 2 * np.pi * 9.6e3
for area in (2.95 * np.pi, 5.833 * np.pi):
    print(f"mean area {area / np.pi:.2f} pi -> predicted error per gate {predicted_gate_error(rabi, t2, area):.2e}")

# A 15x15 array: smooth 3% Rabi variation and scattered T2*.
sites = build_array(ArrayConfig(seed=3))
rabi_rel = np.array([s.rabi for s in sites]) / rabi
print("Rabi max/min - 1: %.4f" % (rabi_rel.max() / rabi_rel.min() - 1))
t2 = np.array([s.t2star for s in sites])
print("T2*: mean %.2f ms, std %.2f ms" % (1e3 * t2.mean(), 1e3 * t2.std()))
