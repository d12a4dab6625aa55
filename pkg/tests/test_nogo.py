"""Tests for the exact-measurement infeasibility analysis."""

import numpy as np
import pytest

from waylab.graded import ObjectState
from waylab.nogo import (
    ExactSchemeData,
    derive_witness,
    exact_constraint_residual,
    infeasibility_certificate,
    project_to_unitarity,
    rotated_basis_residual,
)

from oracles import brute_force_min_violation, violation_by_loops

# Frozen grid+polish oracle values (see oracles.brute_force_min_violation;
# n=1 also has the closed form 10/21 by separating the decoupled blocks).
ORACLE_MIN_VIOLATION = {
    1: 0.476190476190476,
    2: 0.194285714285715,
    3: 0.089171974522294,
    4: 0.047073023537042,
}


def zero_data(n):
    z = np.zeros(n)
    return ExactSchemeData(n=n, x=z, s=z.copy(), t=z.copy(), a=z.copy(), b=z.copy())


class TestExactConstraintResidual:
    def test_all_zero_sequences(self):
        report = exact_constraint_residual(zero_data(3))
        for cid, r in report.entries:
            if cid.startswith("unitary"):
                assert r == 0.0
        assert report.entry("sum-x") == 1.0
        assert report.entry("sum-s") == 1.0
        assert report.entry("sum-t") == 1.0
        assert report.entry("sum-a") == 0.0
        assert report.entry("sum-b") == 0.0

    def test_uniform_x_s_no_t(self):
        n = 5
        u = np.full(n, 1.0 / n)
        data = ExactSchemeData(
            n=n, x=u, s=u.copy(), t=np.zeros(n), a=np.zeros(n), b=np.zeros(n)
        )
        report = exact_constraint_residual(data)
        assert report.entry("sum-t") == pytest.approx(1.0)
        for nu in range(1, n + 1):
            assert report.entry(f"unitary-norm0[{nu}]") == pytest.approx(1 / (2 * n))
            assert report.entry(f"unitary-norm1[{nu + 1}]") == pytest.approx(1 / (2 * n))

    def test_negative_weight_rejected(self):
        n = 2
        data = ExactSchemeData(
            n=n, x=np.array([0.5, -0.1]), s=np.zeros(n), t=np.zeros(n),
            a=np.zeros(n), b=np.zeros(n),
        )
        with pytest.raises(ValueError, match=r"x\[2\]"):
            exact_constraint_residual(data)

    def test_matches_independent_loop_evaluation(self):
        rng = np.random.default_rng(8)
        n = 4
        data = ExactSchemeData(
            n=n,
            x=rng.uniform(0, 1, n), s=rng.uniform(0, 1, n), t=rng.uniform(0, 1, n),
            a=rng.uniform(-0.5, 0.5, n), b=rng.uniform(-0.5, 0.5, n),
        )
        report = exact_constraint_residual(data)
        assert report.sum_squares == pytest.approx(
            violation_by_loops(n, data.x, data.s, data.t, data.a, data.b), abs=1e-12
        )

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_zero_unitarity_rows_for_genuine_isometry_data(self, seed):
        # A genuine graded isometry of the exact form on a finite window
        # necessarily has a vanishing transfer component (the content of
        # the no-go): data with s = 2x, t = 0 realizes one for any
        # nonnegative weights, and every unitarity row vanishes exactly,
        # leaving only the normalization sums in conflict.
        rng = np.random.default_rng(seed)
        n = 6
        x = rng.uniform(0.0, 1.0, n)
        x /= x.sum()
        data = ExactSchemeData(
            n=n, x=x, s=2.0 * x, t=np.zeros(n), a=np.zeros(n), b=np.zeros(n)
        )
        report = exact_constraint_residual(data)
        for cid, r in report.entries:
            if cid.startswith("unitary"):
                assert r == pytest.approx(0.0, abs=1e-14)
        assert report.entry("sum-t") == 1.0


class TestInfeasibilityCertificate:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_frozen_oracle(self, n):
        cert = infeasibility_certificate(n)
        expected = ORACLE_MIN_VIOLATION[n]
        assert cert.min_violation == pytest.approx(expected, rel=1e-4)

    def test_matches_live_oracle_n2(self):
        cert = infeasibility_certificate(2)
        assert cert.min_violation == pytest.approx(
            brute_force_min_violation(2), rel=1e-4
        )

    def test_strictly_positive_and_monotone_small(self):
        values = [infeasibility_certificate(n).min_violation for n in range(1, 9)]
        assert all(v > 0 for v in values)
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_minimizer_consistency_with_report(self):
        cert = infeasibility_certificate(2)
        report = exact_constraint_residual(cert.minimizer)
        assert report.sum_squares == pytest.approx(cert.min_violation, abs=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_overlaps_forced_to_zero(self, n):
        cert = infeasibility_certificate(n)
        assert np.max(np.abs(cert.minimizer.a)) < 1e-8
        assert np.max(np.abs(cert.minimizer.b)) < 1e-8

    @pytest.mark.parametrize("n", [2, 3, 4, 7])
    def test_parity_constancy_after_unitarity_projection(self, n):
        # The norm-balance recursion makes t parity-constant; checking it
        # literally requires driving those residuals below 1e-8 first.
        cert = infeasibility_certificate(n)
        proj = project_to_unitarity(cert.minimizer)
        report = exact_constraint_residual(proj)
        unitary = max(r for cid, r in report.entries if cid.startswith("unitary"))
        assert unitary < 1e-8
        for parity in (0, 1):
            vals = [proj.t[i] for i in range(n) if (i + 1) % 2 == parity]
            if len(vals) > 1:
                assert max(vals) - min(vals) < 1e-6

    def test_witness_structure(self):
        w = derive_witness(5)
        assert len(w) == 4
        assert "a[nu] = 0" in w[0]
        assert "parity" in w[1]
        assert "zero" in w[2]
        assert "sum(t) = 1" in w[3]

    def test_json_round_trip(self):
        import json

        cert = infeasibility_certificate(2)
        payload = json.loads(cert.to_json())
        assert set(payload) == {"n", "min_violation", "minimizer", "witness"}
        rebuilt = ExactSchemeData.from_dict(payload["minimizer"])
        assert np.allclose(rebuilt.x, cert.minimizer.x)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            infeasibility_certificate(0)


class TestRotatedBasis:
    def test_eigenbasis_is_exactly_measurable(self):
        cert = rotated_basis_residual(3, ObjectState(1.0, 0.0))
        assert cert.min_violation == pytest.approx(0.0, abs=1e-12)

    def test_reduces_to_standard_certificate(self):
        amp = 2**-0.5
        rot = rotated_basis_residual(2, ObjectState(amp, amp))
        std = infeasibility_certificate(2)
        assert rot.min_violation == pytest.approx(std.min_violation, abs=1e-12)

    def test_phase_covariance(self):
        amp = 2**-0.5
        real_rot = rotated_basis_residual(2, ObjectState(amp, amp))
        imag_rot = rotated_basis_residual(2, ObjectState(amp, 1j * amp))
        assert imag_rot.min_violation == pytest.approx(
            real_rot.min_violation, abs=1e-12
        )

    @pytest.mark.parametrize("alpha,beta", [(0.8, 0.6), (0.6, -0.8j)])
    def test_general_rotation_strictly_positive(self, alpha, beta):
        cert = rotated_basis_residual(3, ObjectState(alpha, beta))
        assert cert.min_violation > 1e-6

    def test_requires_normalized_object(self):
        with pytest.raises(ValueError, match="not normalized"):
            rotated_basis_residual(2, ObjectState(1.0, 1.0))
