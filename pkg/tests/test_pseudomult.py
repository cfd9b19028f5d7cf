"""Operator assembly, block structure, kernels, and norm estimation."""

import math

import numpy as np
import pytest
import scipy.linalg

from hermult.hermite import (
    BasisSpec,
    HermiteExpansion,
    eval_hermite_nd,
    shell_degrees,
)
from hermult.pseudomult import (
    PowerIterationResult,
    apply,
    assemble_matrix,
    block_kernel,
    block_kernel_adjoint,
    block_kernel_grid,
    block_operator,
    gaussian_transfer_matrix,
    load_matrix_binary,
    load_matrix_csv,
    operator_norm,
    projection_kernel_diag,
    save_matrix_binary,
    save_matrix_csv,
    transfer_isometry_defect,
)
from hermult.quadrature import inner_product, tensor_rule
from hermult.symbols import Symbol, builtin_symbol, littlewood_paley_bump


def random_expansion(spec, rng):
    coeffs = rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size)
    return HermiteExpansion(spec, coeffs)


class TestApply:
    def test_multiplication_operator_on_basis_vector(self):
        sigma = builtin_symbol("gaussian_x")
        spec = BasisSpec(1, 4)
        f = HermiteExpansion(spec, np.eye(spec.size, dtype=complex)[0])
        x = np.array([[0.0], [0.7], [-1.3]])
        got = apply(sigma, f, x)
        want = np.exp(-x[:, 0] ** 2) * eval_hermite_nd((0,), x)
        assert np.allclose(got, want, rtol=1e-14)

    def test_multiplier_scales_coefficients(self, rng):
        sigma = builtin_symbol("power", m=-2.0)
        spec = BasisSpec(1, 6)
        f = random_expansion(spec, rng)
        x = np.array([[0.4], [1.1]])
        got = apply(sigma, f, x)
        want = np.zeros(2, dtype=complex)
        for pos, xi in enumerate(spec.indices):
            want += (
                f.coefficients[pos]
                * (1.0 + xi[0]) ** -1.0
                * eval_hermite_nd(xi, x)
            )
        assert np.allclose(got, want, rtol=1e-13)


class TestAssemble:
    def test_ground_state_entry_for_gaussian_multiplication(self):
        # <exp(-x^2) h_0, h_0> = pi^(-1/2) integral exp(-2 x^2) = 2^(-1/2)
        sigma = builtin_symbol("gaussian_x")
        spec = BasisSpec(1, 8)
        rule = tensor_rule(1, 40)
        m = assemble_matrix(sigma, spec, rule)
        assert m[0, 0] == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)

    def test_identity_symbol_gives_identity_matrix(self):
        spec = BasisSpec(1, 12)
        rule = tensor_rule(1, 32)
        m = assemble_matrix(builtin_symbol("identity"), spec, rule)
        assert np.max(np.abs(m - np.eye(spec.size))) < 1e-12

    def test_multiplier_matrix_is_diagonal_with_bracket_powers(self):
        spec = BasisSpec(2, 5)
        rule = tensor_rule(2, 16)
        m = assemble_matrix(builtin_symbol("power", m=-2.0), spec, rule)
        for pos, xi in enumerate(spec.indices):
            assert m[pos, pos] == pytest.approx(1.0 / (1.0 + sum(xi)), rel=1e-12)
        off = m - np.diag(np.diagonal(m))
        assert np.max(np.abs(off)) < 1e-12

    def test_diagonality_self_test_catches_false_claim(self):
        liar = Symbol(
            "liar", 0.0, 1.0, 0.0,
            lambda x, xi: np.asarray(x)[..., 0],
            x_independent=True,
        )
        spec = BasisSpec(1, 6)
        rule = tensor_rule(1, 24)
        with pytest.raises(RuntimeError, match="off-diagonal"):
            assemble_matrix(liar, spec, rule)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            assemble_matrix(
                builtin_symbol("identity"), BasisSpec(2, 3), tensor_rule(1, 8)
            )


class TestBlocks:
    def test_columns_outside_shell_are_exact_zeros(self):
        spec = BasisSpec(1, 30)
        rule = tensor_rule(1, 48)
        j = 3
        m = block_operator(builtin_symbol("oscillatory", delta=0.5), j, spec, rule)
        inside = set(shell_degrees(j, 1))
        for col, xi in enumerate(spec.indices):
            if xi[0] not in inside or littlewood_paley_bump(j, xi) == 0.0:
                assert np.all(m[:, col] == 0.0)
            else:
                assert np.any(m[:, col] != 0.0)

    def test_block_of_identity_is_bump_diagonal(self):
        spec = BasisSpec(1, 20)
        rule = tensor_rule(1, 40)
        m = block_operator(builtin_symbol("identity"), 2, spec, rule)
        want = np.diag([littlewood_paley_bump(2, xi) for xi in spec.indices])
        assert np.max(np.abs(m - want)) < 1e-12

    def test_blocks_telescope_to_full_matrix(self):
        spec = BasisSpec(1, 24)
        rule = tensor_rule(1, 48)
        sigma = builtin_symbol("oscillatory", delta=0.5)
        full = assemble_matrix(sigma, spec, rule)
        total = np.zeros_like(full)
        for j in range(8):
            total += block_operator(sigma, j, spec, rule)
        assert np.max(np.abs(total - full)) < 1e-10

    def test_disjoint_blocks_annihilate(self):
        spec = BasisSpec(1, 40)
        rule = tensor_rule(1, 64)
        sigma = builtin_symbol("power", m=0.0)
        b2 = block_operator(sigma, 2, spec, rule)
        b4 = block_operator(sigma, 4, spec, rule)
        product = b2 @ np.conj(b4.T)
        assert np.all(product == 0.0)


class TestKernels:
    def test_one_dimensional_kernel_matches_direct_sum(self):
        sigma = builtin_symbol("oscillatory", delta=0.5)
        j = 2
        x = np.array([[0.3], [1.4]])
        y = np.array([[-0.8], [0.1], [2.0]])
        got = block_kernel(sigma, j, x, y)
        want = np.zeros((2, 3), dtype=complex)
        for d in shell_degrees(j, 1):
            b = littlewood_paley_bump(j, (d,))
            for p in range(2):
                want[p] += (
                    b * sigma.value(x[p], (d,))
                    * eval_hermite_nd((d,), x[p])
                    * eval_hermite_nd((d,), y)
                )
        assert np.allclose(got, want, rtol=1e-12, atol=1e-14)

    def test_radial_fast_path_matches_generic_path(self):
        radial = builtin_symbol("oscillatory", delta=0.5)
        generic = Symbol(
            radial.name, radial.order, radial.rho, radial.delta,
            radial.value, radial.x_derivative,
        )
        x = np.array([[0.5], [-1.2]])
        y = np.array([[0.9], [0.0]])
        got = block_kernel(radial, 3, x, y)
        want = block_kernel(generic, 3, x, y)
        assert np.allclose(got, want, rtol=1e-12)

    def test_two_dimensional_kernel_matches_direct_sum(self):
        sigma = builtin_symbol("gaussian_x")
        j = 2
        x = np.array([[0.3, -0.2]])
        y = np.array([[0.1, 0.6], [-0.4, 0.9]])
        got = block_kernel(sigma, j, x, y)
        want = np.zeros((1, 2), dtype=complex)
        spec = BasisSpec(2, 10)
        for xi in spec.indices:
            b = littlewood_paley_bump(j, xi)
            if b == 0.0:
                continue
            want[0] += (
                b * sigma.value(x[0], xi)
                * eval_hermite_nd(xi, x[0])
                * eval_hermite_nd(xi, y)
            )
        assert np.allclose(got, want, rtol=1e-12)

    def test_adjoint_flips_and_conjugates(self):
        sigma = builtin_symbol("oscillatory", delta=0.5)
        x = np.array([[0.4], [1.0]])
        y = np.array([[-0.3], [0.8], [1.7]])
        direct = block_kernel(sigma, 3, y, x)
        adj = block_kernel_adjoint(sigma, 3, x, y)
        assert np.allclose(adj, np.conj(direct).T, rtol=1e-14)

    def test_empty_shell_gives_zero_kernel(self):
        sigma = builtin_symbol("identity")
        x = np.array([[0.0, 0.0]])
        got = block_kernel(sigma, 0, x, x, dim=2)
        assert np.all(got == 0.0)

    def test_kernel_grid_carries_values(self):
        sigma = builtin_symbol("identity")
        x = np.array([[0.1], [0.5]])
        grid = block_kernel_grid(sigma, 2, x, x)
        assert grid.values.shape == (2, 2)
        assert np.all(grid.magnitude() >= 0.0)

    def test_index_budget_guard(self):
        sigma = builtin_symbol("identity")
        x = np.array([[0.0, 0.0]])
        with pytest.raises(ValueError, match="budget"):
            block_kernel(sigma, 9, x, x, dim=2)


class TestProjectionDiag:
    def test_ground_projection_in_one_dimension(self):
        x = np.array([[0.0], [1.0], [-2.0]])
        got = projection_kernel_diag(0, x)
        want = np.exp(-x[:, 0] ** 2) / math.sqrt(math.pi)
        assert np.allclose(got, want, rtol=1e-14)

    def test_matches_direct_sum_in_two_dimensions(self):
        x = np.array([[0.4, -0.7], [1.2, 0.3]])
        got = projection_kernel_diag(6, x, dim=2)
        spec = BasisSpec(2, 6)
        want = np.zeros(2)
        for xi in spec.indices:
            want += eval_hermite_nd(xi, x) ** 2
        assert np.allclose(got, want, rtol=1e-12)

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            projection_kernel_diag(3, np.zeros((1, 3)), dim=3)


class TestGaussianTransfer:
    @pytest.mark.parametrize(
        "name,params",
        [
            ("identity", {}),
            ("gaussian_x", {}),
            ("oscillatory", {"delta": 0.5}),
        ],
    )
    def test_two_assemblies_agree(self, name, params):
        sigma = builtin_symbol(name, **params)
        spec = BasisSpec(1, 12)
        rule = tensor_rule(1, 40)
        direct = assemble_matrix(sigma, spec, rule)
        transferred = gaussian_transfer_matrix(sigma, spec, rule)
        assert np.max(np.abs(direct - transferred)) < 1e-10

    def test_polynomial_gram_is_identity(self):
        spec = BasisSpec(1, 12)
        rule = tensor_rule(1, 40)
        assert transfer_isometry_defect(spec, rule) < 1e-12


class TestParseval:
    def test_coefficient_norm_matches_quadrature(self, rng):
        spec = BasisSpec(1, 20)
        rule = tensor_rule(1, 48)
        f = random_expansion(spec, rng)
        values = f.evaluate(rule.points)
        quad = inner_product(values, values, rule).real
        assert abs(quad - f.norm() ** 2) / f.norm() ** 2 < 1e-10

    def test_basis_gram_is_identity_in_two_dimensions(self, rng):
        spec = BasisSpec(2, 12)
        rule = tensor_rule(2, 24)
        f = random_expansion(spec, rng)
        values = f.evaluate(rule.points)
        quad = inner_product(values, values, rule).real
        assert abs(quad - f.norm() ** 2) / f.norm() ** 2 < 1e-10


class TestOperatorNorm:
    def test_matches_svd_on_random_matrix(self, rng):
        m = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
        res = operator_norm(m)
        want = float(scipy.linalg.svdvals(m)[0])
        assert res.converged
        assert abs(res.value - want) / want < 1e-8

    def test_zero_matrix(self):
        res = operator_norm(np.zeros((4, 4)))
        assert res == PowerIterationResult(0.0, 0, True)

    def test_diagonal_matrix_exact(self):
        res = operator_norm(np.diag([3.0, -7.0, 2.0]))
        assert res.converged
        assert res.value == pytest.approx(7.0, rel=1e-10)

    def test_iteration_cap_sets_flag(self, rng):
        m = rng.standard_normal((30, 30))
        res = operator_norm(m, rel_tol=1e-300, max_iterations=2)
        assert not res.converged
        assert res.iterations == 2


class TestMatrixExports:
    def test_csv_round_trip_is_exact(self, rng, tmp_path):
        m = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
        path = tmp_path / "matrix.csv"
        save_matrix_csv(path, m, header_lines=["tool test", "q=7"])
        back = load_matrix_csv(path)
        assert np.array_equal(back, m)
        text = path.read_text()
        assert text.startswith("# tool test\n# q=7\n")

    def test_binary_round_trip_is_exact(self, rng, tmp_path):
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        path = tmp_path / "matrix.bin"
        save_matrix_binary(path, m, dim=1, max_degree=4)
        back, dim, max_degree = load_matrix_binary(path)
        assert np.array_equal(back, m)
        assert (dim, max_degree) == (1, 4)

    def test_binary_magic_check(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="export"):
            load_matrix_binary(path)

    def test_binary_requires_square(self, tmp_path):
        with pytest.raises(ValueError):
            save_matrix_binary(tmp_path / "m.bin", np.zeros((2, 3)), 1, 1)
