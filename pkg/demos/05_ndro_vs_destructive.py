"""
Benchmarking with non-destructive readout
=========================================

The same gate strings are run twice on the small array: once with the
usual push-out readout, once imaging the atoms in place. Gate errors should
agree; only the SPAM term moves, because the two readouts fail differently.
"""

from atomrb.config import small_array_preset
from atomrb.experiments import fit_sites, simulate_rb
from atomrb.fitting import aggregate_array

results = {}
for mode in ("destructive", "ndro"):
    cfg = small_array_preset(seed=5, mode=mode, rows=5, cols=5)
    _, strings, succ, shots = simulate_rb(cfg)
    results[mode] = aggregate_array(fit_sites(cfg, succ, shots))
    print(f"{mode:12s} first string starts {strings[0][:6]}")

for mode, s in results.items():
    print(f"{mode:12s} F^2 = {s.fidelity_mean:.6f} +/- {s.fidelity_sem:.1e}   SPAM {s.spam_mean:.3f}")

ratio = results["destructive"].spam_mean / results["ndro"].spam_mean
print(f"SPAM ratio destructive / ndro: {ratio:.2f}")
