"""Three-outcome pointer readout and seeded sampling.

Reading the apparatus in the pointer basis gives "plus", "minus", or
"undetermined".  For the canonical scheme the wrong pointer never fires
and the undetermined probability equals the scheme error; empirical
frequencies from seeded multinomial sampling converge accordingly.
"""

import numpy as np

import waylab as w

amp = 2**-0.5
for n in (1, 3, 10):
    s = w.build_canonical_scheme(n)
    dist = w.three_outcome_stats(s, w.ObjectState(amp, amp))
    probs = ", ".join(f"{label} = {p:.6f}" for label, p in zip(dist.labels(), dist.probabilities()))
    print(f"n = {n:3d}: {probs}")

print("\nsampling the n = 3 readout (PCG64, seed 2024):")
s = w.build_canonical_scheme(3)
dist = w.three_outcome_stats(s, w.ObjectState(amp, amp))
for shots in (100, 10_000, 1_000_000):
    counts = w.sample_outcomes(dist, shots, seed=2024)
    freqs = {k: v / shots for k, v in counts.items()}
    drift = max(abs(freqs[lab] - p) for lab, p in zip(dist.labels(), dist.probabilities()))
    print(f"  shots = {shots:8d}: counts = {counts}   max |freq - prob| = {drift:.5f}")

print("\nthe generic postulate layer handles degenerate eigenvalues too:")
e = np.eye(3, dtype=complex)
obs = w.Observable(eigenvalues=[1.0, 2.0], eigenspaces=[e[:, :2], e[:, 2]])
phi = (e[:, 0] + e[:, 1] + np.sqrt(2) * e[:, 2]) / 2.0
for o in w.born_distribution(obs, phi).outcomes:
    print(f"  outcome {o.label}: probability {o.probability:.4f}")
