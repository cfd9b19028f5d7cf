import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermult.estimates import (
    boundedness_sweep,
    cks_ledger,
    fit_log2_line,
    gram_matrix,
    kernel_moment_norm,
    kernel_moment_sweep,
    projection_bound_sweep,
    projection_tail_exponent,
    sobolev_criterion_check,
)
from hermult.hermite import hermite_table
from hermult.quadrature import tensor_rule
from hermult.symbols import builtin_symbol, bump_by_degree

from conftest import relative_error


class TestFitLine:
    def test_recovers_exact_line(self):
        xs = np.arange(3, 8)
        ys = 2.0 ** (0.7 * xs - 1.25)
        slope, intercept, rms = fit_log2_line(xs, ys)
        assert abs(slope - 0.7) < 1e-12
        assert abs(intercept + 1.25) < 1e-12
        assert rms < 1e-12

    def test_reports_residual(self):
        xs = np.array([1.0, 2.0, 3.0, 4.0])
        ys = np.array([2.0, 4.0, 16.0, 16.0])
        _, _, rms = fit_log2_line(xs, ys)
        assert rms > 0.1


def direct_moment_zero(sigma, j, x):
    # First display of the kernel norm computation: for M = 0 the
    # squared norm is the plain Parseval sum over the shell.
    degrees = np.arange(600)
    bump = bump_by_degree(j, degrees, x.shape[0])
    h = hermite_table(599, x[:1])[:, 0]
    prof = np.asarray(sigma.degree_profile(x, degrees))
    return math.sqrt(float(np.sum(np.abs(prof * bump * h) ** 2)))


class TestKernelMomentNorm:
    def test_parseval_oracle_moment_zero(self):
        sig = builtin_symbol("identity")
        for x1 in (0.0, 0.7, -1.9):
            x = np.array([x1])
            want = direct_moment_zero(sig, 4, x)
            got = kernel_moment_norm(sig, 4, (0,), x)
            assert relative_error(got, want) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=-3.0, max_value=3.0))
    def test_parseval_oracle_everywhere(self, x1):
        sig = builtin_symbol("power", m=-1.0)
        x = np.array([x1])
        want = direct_moment_zero(sig, 3, x)
        got = kernel_moment_norm(sig, 3, (0,), x)
        assert abs(got - want) <= 1e-12 * max(want, 1.0)

    def test_coefficient_route_matches_quadrature_1d(self):
        sig = builtin_symbol("identity")
        rule = tensor_rule(1, 160)
        x = np.array([0.7])
        for gamma in [(1,), (2,), (3,)]:
            exact = kernel_moment_norm(sig, 3, gamma, x)
            quad = kernel_moment_norm(sig, 3, gamma, x,
                                      method="quadrature", rule=rule)
            assert relative_error(exact, quad) < 1e-9

    def test_coefficient_route_matches_quadrature_2d(self):
        sig = builtin_symbol("identity")
        rule = tensor_rule(2, 90)
        x = np.array([0.4, -0.9])
        for gamma in [(0, 0), (1, 0), (1, 1), (2, 0), (0, 2)]:
            exact = kernel_moment_norm(sig, 3, gamma, x)
            quad = kernel_moment_norm(sig, 3, gamma, x,
                                      method="quadrature", rule=rule)
            assert relative_error(exact, quad) < 1e-9

    def test_oscillatory_symbol_both_routes(self):
        sig = builtin_symbol("oscillatory", delta=0.5)
        rule = tensor_rule(1, 160)
        x = np.array([-0.3])
        exact = kernel_moment_norm(sig, 3, (1,), x)
        quad = kernel_moment_norm(sig, 3, (1,), x,
                                  method="quadrature", rule=rule)
        assert relative_error(exact, quad) < 1e-9

    def test_column_blocking_is_invisible(self):
        from hermult.estimates import _moment_norm_2d

        sig = builtin_symbol("identity")
        x = np.array([0.8, 0.1])
        whole = _moment_norm_2d(sig, 4, (1, 1), x, block_columns=4096)
        pieces = _moment_norm_2d(sig, 4, (1, 1), x, block_columns=37)
        assert relative_error(whole, pieces) < 1e-12

    def test_empty_shell_gives_zero(self):
        sig = builtin_symbol("identity")
        assert kernel_moment_norm(sig, 0, (0, 0), np.zeros(2)) == 0.0

    def test_argument_validation(self):
        sig = builtin_symbol("identity")
        with pytest.raises(ValueError, match="dimension"):
            kernel_moment_norm(sig, 3, (1, 0), np.zeros(1))
        with pytest.raises(ValueError, match="nonnegative"):
            kernel_moment_norm(sig, 3, (-1,), np.zeros(1))
        with pytest.raises(ValueError, match="rule"):
            kernel_moment_norm(sig, 3, (1,), np.zeros(1), method="quadrature")
        with pytest.raises(ValueError, match="method"):
            kernel_moment_norm(sig, 3, (1,), np.zeros(1), method="magic")


class TestKernelMomentSweep:
    def test_identity_slope_moment_zero(self):
        sw = kernel_moment_sweep(builtin_symbol("identity"), 1, 0,
                                 j_values=(3, 4, 5, 6))
        assert sw.expected_slope == 0.5
        assert sw.slope_error < 0.4
        assert sw.rms_residual < 0.5

    def test_identity_slope_moment_one(self):
        sw = kernel_moment_sweep(builtin_symbol("identity"), 1, 1,
                                 j_values=(3, 4, 5, 6))
        assert sw.expected_slope == -0.5
        assert sw.slope_error < 0.4

    def test_two_dimensional_slope(self):
        sw = kernel_moment_sweep(builtin_symbol("identity"), 2, 1,
                                 j_values=(2, 3, 4, 5))
        assert sw.expected_slope == 0.0
        assert sw.slope_error < 0.4

    def test_expected_slope_uses_half_order(self):
        sw = kernel_moment_sweep(builtin_symbol("power", m=-2.0), 1, 0,
                                 j_values=(3, 4, 5, 6))
        assert sw.expected_slope == -1.0 + 0.5
        assert len(sw.sup_norms) == 4
        assert sw.j_values == (3, 4, 5, 6)

    def test_short_block_range_rejected(self):
        with pytest.raises(ValueError, match="four"):
            kernel_moment_sweep(builtin_symbol("identity"), 1, 0,
                                j_values=(3, 4, 5))


class TestGramMatrix:
    def test_identity_symbol_gram_is_identity(self):
        g = gram_matrix(builtin_symbol("identity"), 12)
        assert np.max(np.abs(g - np.eye(13))) < 1e-12

    def test_multiplier_gram_is_diagonal(self):
        g = gram_matrix(builtin_symbol("power", m=-2.0), 10)
        off = g - np.diag(np.diag(g))
        assert np.max(np.abs(off)) < 1e-12
        want = (1.0 + np.arange(11.0)) ** -2.0
        assert np.max(np.abs(np.diag(g).real - want)) < 1e-12


class TestCksLedger:
    def test_identity_star_norms_match_bump_overlap(self):
        # For sigma == 1 every block operator is diagonal, so the
        # composition norm is the largest product of bump weights.
        led = cks_ledger(builtin_symbol("identity"), 4)
        degrees = np.arange(600)
        for j in range(5):
            for k in range(5):
                bumps = (bump_by_degree(j, degrees, 1)
                         * bump_by_degree(k, degrees, 1))
                want = float(np.max(bumps))
                assert abs(led.star_norms[j, k] - want) < 1e-10

    def test_identity_far_star_norms_vanish(self):
        led = cks_ledger(builtin_symbol("identity"), 4)
        for j in range(5):
            for k in range(5):
                if abs(j - k) >= 2:
                    assert led.star_norms[j, k] == 0.0
        assert math.isnan(led.epsilon)

    def test_far_co_norms_are_exact_zeros(self):
        led = cks_ledger(builtin_symbol("oscillatory", delta=0.5), 4)
        for j in range(5):
            for k in range(5):
                if abs(j - k) >= 2:
                    assert led.co_norms[j, k] == 0.0

    def test_star_norms_symmetric(self):
        led = cks_ledger(builtin_symbol("oscillatory", delta=0.5), 4)
        for j in range(5):
            for k in range(j):
                pair = max(led.star_norms[j, k], 1e-12)
                assert abs(led.star_norms[j, k] - led.star_norms[k, j]) < 1e-6 * pair

    def test_oscillatory_epsilon_positive(self):
        led = cks_ledger(builtin_symbol("oscillatory", delta=0.5), 4)
        assert led.epsilon > 0.0

    def test_c0_is_max_block_norm(self):
        led = cks_ledger(builtin_symbol("oscillatory", delta=0.5), 3)
        assert led.c0 == max(led.c0_values)
        for j in range(4):
            assert abs(led.c0_values[j] ** 2 - led.star_norms[j, j]) < 1e-12

    def test_two_dimensions_not_offered(self):
        with pytest.raises(ValueError, match="dim 1"):
            cks_ledger(builtin_symbol("identity"), 3, dim=2)


class TestBoundednessSweep:
    def test_identity_norm_is_one(self):
        sw = boundedness_sweep(builtin_symbol("identity"), lambdas=(8, 16, 32))
        for norm in sw.norms:
            assert abs(norm - 1.0) < 1e-10
        assert all(sw.converged)

    def test_decaying_multiplier_capped_at_one(self):
        sw = boundedness_sweep(builtin_symbol("power", m=-2.0),
                               lambdas=(8, 16, 32, 64))
        for norm in sw.norms:
            assert norm <= 1.0 + 1e-10
            assert norm >= 1.0 - 1e-10

    def test_gaussian_plateau(self):
        sw = boundedness_sweep(builtin_symbol("gaussian_x"),
                               lambdas=(16, 32, 64))
        assert sw.growth(32, 64) < 0.10
        assert sw.norms[-1] <= 1.0 + 1e-8

    def test_growth_lookup(self):
        sw = boundedness_sweep(builtin_symbol("identity"), lambdas=(8, 16))
        assert sw.growth(8, 16) == pytest.approx(0.0, abs=1e-12)


class TestSobolevCriterion:
    def test_criterion_value_closed_form(self):
        # g = e^{-x^2}: ||g||^2 = sqrt(pi/2) and ||g'||^2 = sqrt(pi/2),
        # so the order <= 1 sum is exactly 2 sqrt(pi/2).
        rep = sobolev_criterion_check(builtin_symbol("sobolev_x"))
        want = 2.0 * math.sqrt(math.pi / 2.0)
        assert relative_error(rep.criterion, want) < 1e-9

    def test_ratio_stable_across_band_limits(self):
        rep = sobolev_criterion_check(builtin_symbol("sobolev_x"))
        assert rep.lambdas == (8, 16, 32)
        assert rep.ratio_spread() < 0.10

    def test_norm_bounded_by_criterion(self):
        # The operator is multiplication by g, so its norm is at most
        # sup |g| = 1 which the criterion dominates.
        rep = sobolev_criterion_check(builtin_symbol("sobolev_x"))
        for ratio in rep.ratios:
            assert ratio <= 1.0

    def test_requires_derivatives(self):
        with pytest.raises(ValueError, match="derivative"):
            sobolev_criterion_check(builtin_symbol("rough_x", m=0.0))


class TestProjectionSweep:
    def test_ground_state_tail_exponent(self):
        # Q_0(x, x) = pi^{-1/2} e^{-x^2}: the log-slope against x^2 is
        # exactly -1, so the reported exponent is exactly one half.
        theta = projection_tail_exponent(0, 1)
        assert abs(theta - 0.5) < 1e-9

    def test_ratios_bounded_one_dimension(self):
        sw = projection_bound_sweep(1, degrees=(4, 8, 16, 32, 64))
        assert sw.ratio_spread() <= 3.0
        for theta in sw.thetas:
            assert theta > 0.0

    def test_ratios_bounded_two_dimensions(self):
        sw = projection_bound_sweep(2, degrees=(4, 8, 16, 32))
        assert sw.ratio_spread() <= 3.0
        for ratio in sw.ratios:
            assert ratio > 0.0

    def test_diagonal_grows_with_degree(self):
        sw = projection_bound_sweep(1, degrees=(4, 8, 16, 32))
        for lo, hi in zip(sw.sup_values, sw.sup_values[1:]):
            assert hi > lo
