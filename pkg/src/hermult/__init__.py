"""hermult: numerical verification of Hermite pseudo-multiplier calculus."""

from hermult.hermite import (
    BasisSpec,
    HermiteExpansion,
    MultiIndex,
    apply_annihilation,
    apply_creation,
    apply_derivative,
    basis_vector,
    enumerate_shell,
    eval_hermite_1d,
    eval_hermite_derivative,
    eval_hermite_nd,
    half_ladder_coefficient,
    hermite_polynomial_table,
    hermite_table,
    ladder_lower_coefficient,
    ladder_raise_coefficient,
    multiply_by_coordinate,
    oscillator_eigenvalue,
    shell_bounds,
    shell_degrees,
)
from hermult.quadrature import (
    MAX_NODES,
    QuadratureRule1D,
    TensorRule,
    gauss_hermite,
    gaussian_inner_product,
    inner_product,
    tensor_rule,
)
from hermult.byparts import (
    LADDER_IDENTITY_KEYS,
    BiExpansion,
    FreqTerm,
    SpatialTerm,
    almost_orthogonality_entry,
    d_factor,
    double_factorial,
    freq_attachment_report,
    freq_block_coefficient,
    freq_coefficients_by_recursion,
    freq_expansion,
    pair_basis,
    spatial_coefficient,
    spatial_coefficient_bound_ratio,
    spatial_expansion,
    verify_freq_identity,
    verify_ladder_identity,
    verify_lagrange,
    verify_spatial_identity,
)
from hermult.symbols import (
    REGISTRY_KEYS,
    Symbol,
    SymbolClassReport,
    builtin_symbol,
    bump_by_degree,
    bump_difference_bound,
    dyadic_bump,
    finite_difference,
    gaussian_window,
    littlewood_paley_bump,
    monomial_gaussian,
    seminorm_report,
    sine_gaussian,
    smooth_step,
)
from hermult.pseudomult import (
    KernelGrid,
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
from hermult.estimates import (
    BoundednessSweep,
    CksLedger,
    DecaySweep,
    ProjectionSweep,
    SobolevReport,
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

__version__ = "0.1.0"
