"""Canonical approximate measurement scheme under an additive conservation law.

An apparatus spreading over ``n`` charge sectors cannot distinguish the
two superposition states of a two-level object exactly (see
:mod:`waylab.nogo`), but it can do so approximately, with a third
"undetermined" outcome whose probability is the squared norm of the error
vector ``eta``.  This module builds the standard construction attaining
error ``1/(2n - 1)``, validates its constraint system, derives the
pointer states, and applies the interaction to arbitrary object states.

The scheme data are four graded vectors:

* ``xi``    -- apparatus initial state, sectors ``1..n``;
* ``sigma`` -- amplitude for the object keeping its branch, sectors ``1..n``;
* ``rho``   -- object-raising transfer amplitude, sectors ``0..n-1``;
* ``tau``   -- object-lowering transfer amplitude, sectors ``2..n+1``;

with the interaction acting as ``psi0 xi -> psi0 sigma + psi1 rho`` and
``psi1 xi -> psi0 tau + psi1 sigma``.  The pointer states are the
combinations ``2 chi = 2 sigma + rho + tau``, ``2 chi' = 2 sigma - rho -
tau`` and the error vector ``2 eta = tau - rho`` (its partner is
``eta' = -eta``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graded import (
    DEFAULT_TOL,
    BlockMap,
    ConstraintReport,
    GradedVector,
    ObjectState,
    check_conserving,
)


@dataclass(frozen=True)
class ApproxScheme:
    """Approximate measurement scheme for an apparatus of size ``n``.

    ``c`` is the mean squared sector norm of ``sigma`` and ``cprime`` the
    scheme error; for the canonical construction these are the constants
    ``c = (n-1)/(n(2n-1))`` and ``c' = 1/(2n-1)`` with ``n(c + c') = 1``.
    """

    n: int
    d: int
    xi: GradedVector
    sigma: GradedVector
    tau: GradedVector
    rho: GradedVector
    c: float
    cprime: float

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "c": self.c,
            "cprime": self.cprime,
            "xi": self.xi.to_dict(),
            "sigma": self.sigma.to_dict(),
            "tau": self.tau.to_dict(),
            "rho": self.rho.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            n=int(data["n"]),
            d=int(data["d"]),
            xi=GradedVector.from_dict(data["xi"]),
            sigma=GradedVector.from_dict(data["sigma"]),
            tau=GradedVector.from_dict(data["tau"]),
            rho=GradedVector.from_dict(data["rho"]),
            c=float(data["c"]),
            cprime=float(data["cprime"]),
        )

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DerivedPointers:
    """Pointer states ``chi``, ``chi'`` and error vector ``eta``.

    The partner error vector is ``-eta`` and is not stored separately.
    """

    chi: GradedVector
    chiprime: GradedVector
    eta: GradedVector


def canonical_weights(n):
    """Exact weights ``(c, c')`` of the canonical scheme as fractions.

    Solves the two defining linear relations -- total apparatus weight
    ``n (c + c') = 1`` and pointer orthogonality ``4 n c = 4 (n - 1) c'``
    -- in rational arithmetic (Cramer's rule), so the headline error
    value ``c' = 1/(2n - 1)`` carries no accumulation error before float
    conversion.
    """
    if n < 1:
        raise ValueError(f"apparatus size must be >= 1, got {n}")
    a11, a12, b1 = Fraction(n), Fraction(n), Fraction(1)
    a21, a22, b2 = Fraction(4 * n), Fraction(-4 * (n - 1)), Fraction(0)
    det = a11 * a22 - a12 * a21
    c = (b1 * a22 - a12 * b2) / det
    cprime = (a11 * b2 - b1 * a21) / det
    return c, cprime


def build_canonical_scheme(n, d=2):
    """Construct the canonical scheme of apparatus size ``n``.

    All amplitudes are real and nonnegative: ``sigma`` lies along
    per-sector basis direction 0 with squared norm ``c`` on sectors
    ``1..n``; ``rho`` and ``tau`` lie along direction 1 with squared norm
    ``c'``, equal on the interior sectors and carried by the four
    boundary components ``rho_0, rho_1, tau_n, tau_{n+1}``.  ``xi`` is
    fixed by the weight-split relations at ``|xi_nu|^2 = c + c'``.

    ``n = 1`` is the degenerate limit: no information is extracted, the
    error is 1, and no charge-respecting isometry realizes it (the
    returned data keep the exact error and pointer algebra but fail the
    structural validation, which requires ``n >= 2``).
    """
    if n < 1:
        raise ValueError(f"apparatus size must be >= 1, got {n}")
    if d < 2:
        raise ValueError(
            f"per-sector dimension must be >= 2 so sigma and tau can be "
            f"orthogonal within a sector, got {d}"
        )
    c_frac, cp_frac = canonical_weights(n)
    c, cp = float(c_frac), float(cp_frac)
    e0 = np.zeros(d)
    e0[0] = 1.0
    e1 = np.zeros(d)
    e1[1] = 1.0

    if n == 1:
        # Degenerate limit: sigma vanishes (c = 0) and the error vector
        # carries the full weight, tau = -rho = unit vector in the single
        # apparatus sector, so chi = chi' = 0 and (eta, eta) = c' = 1.
        xi = GradedVector(d, {1: e0})
        sigma = GradedVector(d, {})
        rho = GradedVector(d, {1: -np.sqrt(cp) * e1})
        tau = GradedVector(d, {1: np.sqrt(cp) * e1})
        return ApproxScheme(n=n, d=d, xi=xi, sigma=sigma, tau=tau, rho=rho,
                            c=c, cprime=cp)

    sc, scp, sx = np.sqrt(c), np.sqrt(cp), np.sqrt(c + cp)
    xi = GradedVector(d, {nu: sx * e0 for nu in range(1, n + 1)})
    sigma = GradedVector(d, {nu: sc * e0 for nu in range(1, n + 1)})
    rho = GradedVector(d, {nu: scp * e1 for nu in range(0, n)})
    tau = GradedVector(d, {nu: scp * e1 for nu in range(2, n + 2)})
    return ApproxScheme(n=n, d=d, xi=xi, sigma=sigma, tau=tau, rho=rho,
                        c=c, cprime=cp)


def scheme_error(s):
    """Probability of the undetermined outcome, ``(eta, eta)``.

    Computed from the stored vectors as a quarter of the summed squared
    sector norms of ``tau - rho``.
    """
    diff = s.tau - s.rho
    return 0.25 * diff.norm2()


def derived_pointers(s):
    """Pointer states and error vector of a scheme.

    For a validated canonical scheme the three vectors are mutually
    orthogonal and ``|chi|^2 + |eta|^2 = 1``.
    """
    half_sum = 0.5 * (s.rho + s.tau)
    chi = s.sigma + half_sum
    chiprime = s.sigma - half_sum
    eta = 0.5 * (s.tau - s.rho)
    return DerivedPointers(chi=chi, chiprime=chiprime, eta=eta)


def interaction_blocks(s):
    """Interaction of the scheme as a :class:`BlockMap` on joint sectors.

    The map is declared only on the measurement inputs: within total
    charge ``N`` the domain vectors are ``psi0 xi_N`` and
    ``psi1 xi_{N-1}`` (where the corresponding component of ``xi`` is
    nonzero) and their images are ``psi0 sigma_N + psi1 rho_{N-1}`` and
    ``psi0 tau_N + psi1 sigma_{N-1}``.
    """
    d = s.d
    xi_supp = set(s.xi.support())
    blocks = {}
    lo = min(xi_supp, default=1)
    hi = max(xi_supp, default=0)
    for total in range(lo, hi + 2):
        dom_cols, img_cols = [], []
        if total in xi_supp:
            dom = np.zeros(2 * d, dtype=np.complex128)
            dom[:d] = s.xi.sector(total)
            img = np.concatenate([s.sigma.sector(total), s.rho.sector(total - 1)])
            dom_cols.append(dom)
            img_cols.append(img)
        if total - 1 in xi_supp:
            dom = np.zeros(2 * d, dtype=np.complex128)
            dom[d:] = s.xi.sector(total - 1)
            img = np.concatenate([s.tau.sector(total), s.sigma.sector(total - 1)])
            dom_cols.append(dom)
            img_cols.append(img)
        if dom_cols:
            blocks[total] = (np.column_stack(dom_cols), np.column_stack(img_cols))
    return BlockMap(2 * d, blocks)


def _sector_range(s):
    supports = [v.support() for v in (s.xi, s.sigma, s.tau, s.rho)]
    lows = [sup[0] for sup in supports if sup] + [1]
    highs = [sup[-1] for sup in supports if sup] + [s.n]
    return min(lows) - 1, max(highs) + 1


def validate_scheme(s):
    """Residual report for the full scheme constraint system.

    Entries cover, per sector: orthogonality of the two interaction
    outputs and the two weight-split relations fixing ``|xi_nu|^2``; and
    globally: normalization of ``xi``, vanishing overlap of the two
    pointer states, vanishing overlap of the error vector with ``sigma``
    and with the pointer difference, plus the grading/isometry residuals
    of the induced block map.  This operation reports and never raises
    for finite inputs.
    """
    xi, sg, tu, rh = s.xi, s.sigma, s.tau, s.rho
    lo, hi = _sector_range(s)
    entries = []

    for nu in range(lo, hi + 1):
        ortho = np.vdot(sg.sector(nu), tu.sector(nu)) + np.vdot(
            rh.sector(nu - 1), sg.sector(nu - 1)
        )
        entries.append((f"orthogonality[{nu}]", abs(ortho)))

    def _n2(vec, nu):
        a = vec.sector(nu)
        return np.vdot(a, a).real

    for nu in range(lo, hi + 1):
        x_nu = _n2(xi, nu)
        s_nu = _n2(sg, nu)
        entries.append((f"weights-rho[{nu}]", abs(x_nu - s_nu - _n2(rh, nu - 1))))
        entries.append((f"weights-tau[{nu}]", abs(x_nu - s_nu - _n2(tu, nu + 1))))

    entries.append(("norm-xi", abs(xi.norm2() - 1.0)))

    sum_s = sg.norm2()
    sum_rt = sum(
        np.vdot(rh.sector(nu) + tu.sector(nu), rh.sector(nu) + tu.sector(nu)).real
        for nu in range(lo, hi + 1)
    )
    entries.append(("overlap-pointers", abs(4.0 * sum_s - sum_rt)))

    overlap_es = sum(
        np.vdot(sg.sector(nu), tu.sector(nu) - rh.sector(nu))
        for nu in range(lo, hi + 1)
    )
    entries.append(("overlap-eta-sigma", abs(overlap_es)))

    overlap_ep = sum(
        np.vdot(tu.sector(nu) + rh.sector(nu), tu.sector(nu) - rh.sector(nu))
        for nu in range(lo, hi + 1)
    )
    entries.append(("overlap-eta-pointer", abs(overlap_ep)))

    entries.extend(check_conserving(interaction_blocks(s)).entries)
    return ConstraintReport(tuple(entries))


def apply_interaction(s, obj, tol=DEFAULT_TOL):
    """Joint output state of the interaction for a normalized object.

    Returns ``amp0 (psi0 sigma + psi1 rho) + amp1 (psi0 tau + psi1 sigma)``
    as a joint graded vector.  For a validated scheme the output is
    normalized and its total-charge grading matches the input exactly.
    """
    if not isinstance(obj, ObjectState):
        obj = ObjectState(*obj)
    obj.require_normalized(tol)
    d = s.d
    lo, hi = _sector_range(s)
    sectors = {}
    for total in range(lo, hi + 2):
        head = obj.amp0 * s.sigma.sector(total) + obj.amp1 * s.tau.sector(total)
        tail = obj.amp0 * s.rho.sector(total - 1) + obj.amp1 * s.sigma.sector(total - 1)
        if np.any(head != 0) or np.any(tail != 0):
            sectors[total] = np.concatenate([head, tail])
    return GradedVector(2 * d, sectors)
