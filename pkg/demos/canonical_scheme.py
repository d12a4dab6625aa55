"""Build the canonical approximate scheme and inspect its anatomy.

The apparatus spreads over n charge sectors; the measurement gains a
third "undetermined" outcome whose probability is exactly 1/(2n - 1).
This script builds a few schemes, checks the full constraint system,
and shows the derived pointer states.
"""

import numpy as np

import waylab as w

print("error law: apparatus size n -> undetermined probability 1/(2n - 1)")
for n in (1, 2, 3, 5, 10, 100, 1000):
    s = w.build_canonical_scheme(n)
    print(f"  n = {n:5d}   error = {w.scheme_error(s):.10f}   1/(2n-1) = {1/(2*n-1):.10f}")

n = 5
s = w.build_canonical_scheme(n)
report = w.validate_scheme(s)
print(f"\nconstraint report at n = {n}: {len(report.entries)} residuals, "
      f"max = {report.max_residual:.3e}")

p = w.derived_pointers(s)
print("\npointer geometry:")
print(f"  |chi|^2  = {p.chi.norm2():.6f}   (probability of a conclusive readout)")
print(f"  |eta|^2  = {p.eta.norm2():.6f}   (undetermined weight)")
print(f"  (chi, chi') = {w.inner(p.chi, p.chiprime):.2e}")
print(f"  (chi, eta)  = {w.inner(p.chi, p.eta):.2e}")

amp = 2**-0.5
out = w.apply_interaction(s, w.ObjectState(amp, amp))
print(f"\njoint output for the + state: norm = {out.norm():.12f}, "
      f"support = total charges {list(out.support())}")

print("\nlarger apparatus, smaller error:")
for n in (10, 100, 1000, 10000):
    err = w.scheme_error(w.build_canonical_scheme(n))
    print(f"  n = {n:5d}   error = {err:.3e}")
