"""Relaxed product-form measurements and the exchange alternative.

If the object may end in a different state, charge bookkeeping still
only leaves two patterns: the object keeps the superposition (case 1),
or the conserved quantum moves into the apparatus (case 2) and the
distinguishability problem reappears one level up.
"""

import numpy as np

import waylab as w

d = 2
psi_sharp = w.GradedVector(d, {0: [1.0, 0.0]})
chi0 = w.GradedVector(d, {0: [2**-0.5, 0.0]})
chi1 = w.GradedVector(d, {1: [0.0, 2**-0.5]})

plus = w.BranchSpec(psi_sharp, chi0 + chi1)
minus = w.BranchSpec(psi_sharp, chi0 - chi1)
verdict = w.classify(plus, minus)
print(f"exchange instance: kind = {verdict.kind}, "
      f"cross residual = {verdict.cross_condition_residual:.2e}")
print(f"finite components: {list(verdict.finite_components)}")

got0, got1 = w.exchange_form(verdict, plus, minus)
print(f"recovered pointer halves match: "
      f"{got0.allclose(chi0) and got1.allclose(chi1)}")
print("the object is left sharp while chi0 +/- chi1 now carries the")
print("superposition: the problem has moved into the apparatus.\n")

spread = w.GradedVector(d, {0: [2**-0.5, 0.0], 1: [2**-0.5, 0.0]})
case1_plus = w.BranchSpec(spread, chi0 * np.sqrt(2.0))
case1_minus = w.BranchSpec(
    w.GradedVector(d, {0: [2**-0.5, 0.0], 1: [-(2**-0.5), 0.0]}), chi0 * np.sqrt(2.0)
)
print(f"object-keeps-superposition instance: kind = "
      f"{w.classify(case1_plus, case1_minus).kind}")

bad = w.BranchSpec(spread, spread)
verdict = w.classify(bad, bad)
print(f"\nboth sides spread: kind = {verdict.kind}, "
      f"violating (total charge, object charge) pairs = {list(verdict.violations)}")
print("a product component at total charge 2 cannot come from inputs")
print("holding at most one quantum, so the support constraint rejects it.")
