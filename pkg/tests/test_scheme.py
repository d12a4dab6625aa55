"""Tests for the canonical approximate measurement scheme."""

from fractions import Fraction

import numpy as np
import pytest

from waylab.graded import GradedVector, ObjectState, inner, tensor
from waylab.scheme import (
    ApproxScheme,
    apply_interaction,
    build_canonical_scheme,
    canonical_weights,
    derived_pointers,
    interaction_blocks,
    scheme_error,
    validate_scheme,
)


class TestCanonicalWeights:
    @pytest.mark.parametrize("n", [1, 2, 3, 10, 100, 1000, 10000])
    def test_exact_error_law(self, n):
        c, cp = canonical_weights(n)
        assert cp == Fraction(1, 2 * n - 1)
        assert n * (c + cp) == 1

    def test_n3_values(self):
        c, cp = canonical_weights(3)
        assert cp == Fraction(1, 5)
        assert c == Fraction(2, 15)


class TestBuild:
    def test_n3_constants(self):
        s = build_canonical_scheme(3)
        assert s.cprime == pytest.approx(0.2, abs=1e-15)
        assert s.c == pytest.approx(2 / 15, abs=1e-15)
        assert scheme_error(s) == pytest.approx(0.2, abs=1e-12)

    def test_n1_degenerate_limit(self):
        s = build_canonical_scheme(1)
        assert s.cprime == 1.0
        assert s.c == 0.0
        assert scheme_error(s) == pytest.approx(1.0, abs=1e-12)

    def test_n1000_error(self):
        s = build_canonical_scheme(1000)
        assert scheme_error(s) == pytest.approx(1 / 1999, abs=1e-12)

    def test_support_windows(self):
        n = 5
        s = build_canonical_scheme(n)
        assert s.xi.support() == tuple(range(1, n + 1))
        assert s.sigma.support() == tuple(range(1, n + 1))
        assert s.rho.support() == tuple(range(0, n))
        assert s.tau.support() == tuple(range(2, n + 2))

    def test_small_d_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            build_canonical_scheme(3, d=1)

    def test_apparatus_state_normalized(self):
        s = build_canonical_scheme(3)
        assert inner(s.xi, s.xi) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 7])
    def test_json_round_trip_bit_exact(self, n):
        s = build_canonical_scheme(n)
        again = ApproxScheme.from_json(s.to_json())
        assert again == s

    @pytest.mark.parametrize("n", [2, 3, 5, 17])
    def test_error_law_all_n(self, n):
        s = build_canonical_scheme(n)
        assert scheme_error(s) == pytest.approx(1 / (2 * n - 1), abs=1e-12)


class TestValidate:
    @pytest.mark.parametrize("n", [2, 3, 5, 40])
    def test_canonical_scheme_validates(self, n):
        report = validate_scheme(build_canonical_scheme(n))
        assert report.max_residual < 1e-12

    def test_scaled_sigma_breaks_pointer_overlap(self):
        s = build_canonical_scheme(4)
        sectors = {nu: s.sigma.sector(nu) for nu in s.sigma.support()}
        sectors[1] = 2.0 * sectors[1]
        bad = ApproxScheme(
            n=s.n, d=s.d, xi=s.xi, sigma=GradedVector(s.d, sectors),
            tau=s.tau, rho=s.rho, c=s.c, cprime=s.cprime,
        )
        report = validate_scheme(bad)
        # scaling sigma_1 by 2 adds 3c to the sigma total, 12c to the overlap
        assert report.entry("overlap-pointers") == pytest.approx(12 * s.c, abs=1e-12)

    def test_dropped_rho_breaks_weight_split(self):
        s = build_canonical_scheme(4)
        bad = ApproxScheme(
            n=s.n, d=s.d, xi=s.xi, sigma=s.sigma, tau=s.tau,
            rho=GradedVector(s.d, {}), c=s.c, cprime=s.cprime,
        )
        report = validate_scheme(bad)
        rho_side = report.filter("weights-rho")
        tau_side = report.filter("weights-tau")
        assert rho_side.max_residual > 0.1 * s.cprime
        assert tau_side.max_residual < 1e-12

    def test_n1_fails_structurally(self):
        # No charge-respecting isometry realizes the degenerate limit.
        report = validate_scheme(build_canonical_scheme(1))
        assert report.max_residual > 0.5


class TestDerivedPointers:
    def test_n3_norms_and_orthogonality(self):
        p = derived_pointers(build_canonical_scheme(3))
        assert p.chi.norm2() == pytest.approx(0.8, abs=1e-12)
        assert p.eta.norm2() == pytest.approx(0.2, abs=1e-12)
        assert abs(inner(p.chi, p.chiprime)) < 1e-12
        assert abs(inner(p.chi, p.eta)) < 1e-12
        assert abs(inner(p.chiprime, p.eta)) < 1e-12

    def test_n2_chi_norm(self):
        p = derived_pointers(build_canonical_scheme(2))
        assert p.chi.norm2() == pytest.approx(2 / 3, abs=1e-12)

    def test_equal_transfer_amplitudes_kill_eta(self):
        s = build_canonical_scheme(4)
        merged = ApproxScheme(
            n=s.n, d=s.d, xi=s.xi, sigma=s.sigma, tau=s.rho, rho=s.rho,
            c=s.c, cprime=s.cprime,
        )
        p = derived_pointers(merged)
        assert p.eta.is_zero()
        assert (p.chi - p.chiprime).allclose(s.rho + s.rho)
        assert scheme_error(merged) == 0.0

    @pytest.mark.parametrize("n", [1, 2, 3, 8])
    def test_completeness(self, n):
        p = derived_pointers(build_canonical_scheme(n))
        assert p.chi.norm2() + p.eta.norm2() == pytest.approx(1.0, abs=1e-12)


class TestApplyInteraction:
    def test_charge_zero_object(self):
        s = build_canonical_scheme(3)
        out = apply_interaction(s, ObjectState(1, 0))
        expected = tensor(ObjectState(1, 0), s.sigma) + tensor(ObjectState(0, 1), s.rho)
        assert out.allclose(expected, atol=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_plus_state_overlap_with_chi(self):
        s = build_canonical_scheme(3)
        p = derived_pointers(s)
        amp = 2**-0.5
        out = apply_interaction(s, ObjectState(amp, amp))
        chi_hat = (1.0 / p.chi.norm()) * p.chi
        branch = tensor(ObjectState(amp, amp), chi_hat)
        assert abs(inner(branch, out)) ** 2 == pytest.approx(0.8, abs=1e-12)

    def test_minus_state_orthogonal_to_chi(self):
        s = build_canonical_scheme(3)
        p = derived_pointers(s)
        amp = 2**-0.5
        out = apply_interaction(s, ObjectState(amp, -amp))
        chi_hat = (1.0 / p.chi.norm()) * p.chi
        branch = tensor(ObjectState(amp, amp), chi_hat)
        assert abs(inner(branch, out)) ** 2 < 1e-12

    def test_requires_normalized_object(self):
        s = build_canonical_scheme(2)
        with pytest.raises(ValueError, match="not normalized"):
            apply_interaction(s, ObjectState(1.0, 0.5))

    @pytest.mark.parametrize("n", [2, 3, 7])
    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_pointer_decomposition(self, n, sign):
        # The output at (psi0 +/- psi1)/sqrt(2) splits exactly into the
        # matching pointer branch plus the error branch with sign flip.
        s = build_canonical_scheme(n)
        p = derived_pointers(s)
        amp = 2**-0.5
        out = apply_interaction(s, ObjectState(amp, sign * amp))
        pointer = p.chi if sign > 0 else p.chiprime
        expected = tensor(ObjectState(amp, sign * amp), pointer) + tensor(
            ObjectState(amp, -sign * amp), sign * p.eta
        )
        assert out.allclose(expected, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 5])
    def test_norm_and_grading_preserved(self, n):
        rng = np.random.default_rng(n)
        s = build_canonical_scheme(n)
        raw = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        raw /= np.linalg.norm(raw)
        out = apply_interaction(s, ObjectState(raw[0], raw[1]))
        assert out.norm() == pytest.approx(1.0, abs=1e-10)
        # joint support lies within the input's total-charge range 1..n+1
        assert set(out.support()) <= set(range(1, n + 2))

    def test_charge_bookkeeping_difference_of_one(self):
        from waylab.graded import charge_expectation

        s = build_canonical_scheme(4)
        up_in = tensor(ObjectState(0, 1), s.xi)
        down_in = tensor(ObjectState(1, 0), s.xi)
        up_out = apply_interaction(s, ObjectState(0, 1))
        down_out = apply_interaction(s, ObjectState(1, 0))
        assert charge_expectation(up_in) - charge_expectation(down_in) == pytest.approx(1.0)
        assert charge_expectation(up_out) - charge_expectation(down_out) == pytest.approx(
            1.0, abs=1e-10
        )


class TestInteractionBlocks:
    @pytest.mark.parametrize("n", [2, 5])
    def test_blocks_are_isometric(self, n):
        from waylab.graded import check_conserving

        m = interaction_blocks(build_canonical_scheme(n))
        assert check_conserving(m).max_residual < 1e-12

    def test_block_action_matches_interaction(self):
        s = build_canonical_scheme(3)
        m = interaction_blocks(s)
        joint_in = tensor(ObjectState(1, 0), s.xi)
        out = m.apply(joint_in)
        assert out.allclose(apply_interaction(s, ObjectState(1, 0)), atol=1e-10)

    def test_unitarity_transfers_pointer_orthogonality(self):
        from waylab.graded import orthogonality_transfer_check

        s = build_canonical_scheme(4)
        m = interaction_blocks(s)
        inputs = [tensor(ObjectState(1, 0), s.xi), tensor(ObjectState(0, 1), s.xi)]
        pre, post = orthogonality_transfer_check(m, inputs)
        np.testing.assert_allclose(pre, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(post, np.eye(2), atol=1e-10)
