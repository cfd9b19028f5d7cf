"""Pseudo-multiplier operators: application, matrices, and kernels.

The operator attached to a symbol acts on a band-limited expansion by

    (T f)(x) = sum_xi sigma(x, xi) <f, h_xi> h_xi(x),

so its matrix in the Hermite basis is M[eta, xi] = <sigma(., xi) h_xi,
h_eta>, computed here by Gauss quadrature.  A symbol with no x
dependence must produce a diagonal matrix; ``assemble_matrix`` checks
that internally whenever it applies, which doubles as a self-test of
the quadrature resolution.

Block operators cut the symbol by the eigenvalue bump phi_j before
assembly; columns outside the block's shell are exact zeros by
construction, never small numbers.  Block kernels

    K_j(x, y) = sum_xi sigma(x, xi) phi_j(xi) h_xi(x) h_xi(y)

are evaluated degree by degree from the recurrence tables.

The same operator can be assembled in the Gaussian-measure picture,
using Hermite polynomials orthonormal under pi^(-n/2) exp(-|x|^2) dx;
both matrices must agree entrywise because the two bases differ by the
unitary weight transfer.  ``transfer_isometry_defect`` measures how far
the polynomial Gram is from the identity under a given rule.

Norms of matrices are estimated by power iteration on M* M from a
deterministic all-ones start; results carry an iteration count and a
convergence flag rather than silently truncating.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from hermult.hermite import (
    BasisSpec,
    HermiteExpansion,
    enumerate_shell,
    eval_hermite_nd,
    hermite_polynomial_table,
    hermite_table,
    shell_degrees,
)
from hermult.quadrature import TensorRule
from hermult.symbols import Symbol, bump_by_degree, littlewood_paley_bump

__all__ = [
    "KernelGrid",
    "PowerIterationResult",
    "apply",
    "assemble_matrix",
    "block_operator",
    "block_kernel",
    "block_kernel_adjoint",
    "block_kernel_grid",
    "projection_kernel_diag",
    "gaussian_transfer_matrix",
    "transfer_isometry_defect",
    "operator_norm",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_matrix_binary",
    "load_matrix_binary",
]

MAX_KERNEL_INDICES = 1 << 22

_BINARY_MAGIC = b"HMX1"


def apply(sigma: Symbol, f: HermiteExpansion, x_points) -> np.ndarray:
    """Evaluate the operator of ``sigma`` on a band-limited expansion."""
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    out = np.zeros(x.shape[0], dtype=complex)
    for pos, xi in enumerate(f.spec.indices):
        c = f.coefficients[pos]
        if c == 0:
            continue
        out += c * np.asarray(sigma.value(x, xi)) * eval_hermite_nd(xi, x)
    return out


def _basis_table(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    """Rows of h_xi over the point cloud, one row per basis index."""
    dim = spec.dim
    axis_tables = [
        hermite_table(spec.max_degree, points[:, ax]) for ax in range(dim)
    ]
    out = np.empty((spec.size, points.shape[0]))
    for pos, xi in enumerate(spec.indices):
        row = axis_tables[0][xi[0]]
        for ax in range(1, dim):
            row = row * axis_tables[ax][xi[ax]]
        out[pos] = row
    return out


def assemble_matrix(
    sigma: Symbol,
    spec: BasisSpec,
    rule: TensorRule,
    bump_block: int | None = None,
) -> np.ndarray:
    """Operator matrix M[eta, xi] = <sigma(., xi) h_xi, h_eta>.

    With ``bump_block`` set, the symbol is multiplied by phi_j first and
    columns with vanishing bump are exact zeros.  For x-independent
    symbols the result must be diagonal; a quadrature-consistency check
    enforces that to 1e-10 and raises if the rule is too coarse.
    """
    if rule.dim != spec.dim:
        raise ValueError("rule and basis dimension differ")
    pts = rule.points
    table = _basis_table(spec, pts)
    weighted = table * rule.lebesgue_weights
    matrix = np.zeros((spec.size, spec.size), dtype=complex)
    for col, xi in enumerate(spec.indices):
        if bump_block is not None:
            bump = littlewood_paley_bump(bump_block, xi)
            if bump == 0.0:
                continue
        else:
            bump = 1.0
        col_values = bump * np.asarray(sigma.value(pts, xi)) * table[col]
        matrix[:, col] = weighted @ col_values
    if sigma.x_independent and bump_block is None:
        diag = np.abs(np.diagonal(matrix))
        off = matrix - np.diag(np.diagonal(matrix))
        defect = float(np.max(np.abs(off))) / max(1.0, float(diag.max()))
        if defect > 1e-10:
            raise RuntimeError(
                "multiplier symbol produced off-diagonal mass "
                f"{defect:.3e}; quadrature rule is too coarse"
            )
    return matrix


def block_operator(
    sigma: Symbol, j: int, spec: BasisSpec, rule: TensorRule
) -> np.ndarray:
    """Matrix of the j-th block symbol sigma(x, xi) phi_j(xi)."""
    return assemble_matrix(sigma, spec, rule, bump_block=j)


def _shell_index_budget(j: int, dim: int) -> None:
    count = sum(
        math.comb(d + dim - 1, dim - 1) for d in shell_degrees(j, dim)
    )
    if count > MAX_KERNEL_INDICES:
        raise ValueError(
            f"shell {j} in dimension {dim} has {count} indices, over the "
            f"kernel budget {MAX_KERNEL_INDICES}"
        )


def block_kernel(
    sigma: Symbol, j: int, x_points, y_points, dim: int | None = None
) -> np.ndarray:
    """K_j on the product cloud: entry [p, q] pairs x_p with y_q.

    One dimension runs on degree tables; higher dimensions enumerate
    the shell index by index and are guarded by an index budget.
    """
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    y = np.atleast_2d(np.asarray(y_points, dtype=float))
    n = x.shape[1] if dim is None else dim
    if x.shape[1] != n or y.shape[1] != n:
        raise ValueError("point clouds disagree with the dimension")
    degrees = list(shell_degrees(j, n))
    if not degrees:
        return np.zeros((x.shape[0], y.shape[0]), dtype=complex)
    top = max(degrees)

    if n == 1:
        bump = bump_by_degree(j, np.asarray(degrees), 1)
        live = [d for d, b in zip(degrees, bump) if b != 0.0]
        if not live:
            return np.zeros((x.shape[0], y.shape[0]), dtype=complex)
        hx = hermite_table(top, x[:, 0])
        hy = hermite_table(top, y[:, 0])
        out = np.zeros((x.shape[0], y.shape[0]), dtype=complex)
        if sigma.radial and sigma.degree_profile is not None:
            bump_live = bump_by_degree(j, np.asarray(live), 1)
            for p in range(x.shape[0]):
                prof = np.asarray(sigma.degree_profile(x[p], np.asarray(live)))
                weights = prof * bump_live * hx[live, p]
                out[p] = weights @ hy[live, :]
            return out
        for d in live:
            b = littlewood_paley_bump(j, (d,))
            sval = np.asarray(sigma.value(x, (d,)))
            out += b * (sval * hx[d])[:, None] * hy[d][None, :]
        return out

    _shell_index_budget(j, n)
    axis_x = [hermite_table(top, x[:, ax]) for ax in range(n)]
    axis_y = [hermite_table(top, y[:, ax]) for ax in range(n)]
    bumps = bump_by_degree(j, np.asarray(degrees), n)
    bump_of = dict(zip(degrees, bumps))
    out = np.zeros((x.shape[0], y.shape[0]), dtype=complex)
    for xi in enumerate_shell(j, n):
        b = bump_of[sum(xi)]
        if b == 0.0:
            continue
        hx = axis_x[0][xi[0]]
        hy = axis_y[0][xi[0]]
        for ax in range(1, n):
            hx = hx * axis_x[ax][xi[ax]]
            hy = hy * axis_y[ax][xi[ax]]
        sval = np.asarray(sigma.value(x, xi))
        out += b * (sval * hx)[:, None] * hy[None, :]
    return out


def block_kernel_adjoint(
    sigma: Symbol, j: int, x_points, y_points, dim: int | None = None
) -> np.ndarray:
    """Adjoint kernel K_j*(x, y) = conj(K_j(y, x))."""
    return np.conj(block_kernel(sigma, j, y_points, x_points, dim)).T


@dataclass(frozen=True)
class KernelGrid:
    """A kernel sampled on a rectangular product of point clouds."""

    x_points: np.ndarray
    y_points: np.ndarray
    values: np.ndarray

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def block_kernel_grid(
    sigma: Symbol, j: int, x_points, y_points, dim: int | None = None
) -> KernelGrid:
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    y = np.atleast_2d(np.asarray(y_points, dtype=float))
    return KernelGrid(x, y, block_kernel(sigma, j, x, y, dim))


def projection_kernel_diag(max_degree: int, x_points, dim: int = 1) -> np.ndarray:
    """Diagonal Q_N(x, x) = sum_{|xi| <= N} h_xi(x)^2.

    In one dimension this is a cumulative sum of squared rows; in two,
    the equal-degree slice is a convolution of per-axis squares, summed
    over degrees up to N.
    """
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    if x.shape[1] != dim:
        raise ValueError("points disagree with the dimension")
    if dim == 1:
        table = hermite_table(max_degree, x[:, 0])
        return np.sum(table * table, axis=0)
    if dim == 2:
        t1 = hermite_table(max_degree, x[:, 0]) ** 2
        t2 = hermite_table(max_degree, x[:, 1]) ** 2
        out = np.empty(x.shape[0])
        for p in range(x.shape[0]):
            conv = np.convolve(t1[:, p], t2[:, p])[: max_degree + 1]
            out[p] = float(np.sum(conv))
        return out
    raise ValueError("projection diagonal implemented for dim 1 and 2")


def _poly_basis_table(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    axis_tables = [
        hermite_polynomial_table(spec.max_degree, points[:, ax])
        for ax in range(spec.dim)
    ]
    out = np.empty((spec.size, points.shape[0]))
    for pos, xi in enumerate(spec.indices):
        row = axis_tables[0][xi[0]]
        for ax in range(1, spec.dim):
            row = row * axis_tables[ax][xi[ax]]
        out[pos] = row
    return out


def gaussian_transfer_matrix(
    sigma: Symbol, spec: BasisSpec, rule: TensorRule
) -> np.ndarray:
    """The operator matrix assembled in the Gaussian-measure picture.

    Uses Hermite polynomials orthonormal under the Gaussian probability
    measure; by the unitary weight transfer this must reproduce
    ``assemble_matrix`` entry by entry.
    """
    if rule.dim != spec.dim:
        raise ValueError("rule and basis dimension differ")
    pts = rule.points
    table = _poly_basis_table(spec, pts)
    norm = np.pi ** (-spec.dim / 2.0)
    weighted = table * (norm * rule.weights)
    matrix = np.zeros((spec.size, spec.size), dtype=complex)
    for col, xi in enumerate(spec.indices):
        col_values = np.asarray(sigma.value(pts, xi)) * table[col]
        matrix[:, col] = weighted @ col_values
    return matrix


def transfer_isometry_defect(spec: BasisSpec, rule: TensorRule) -> float:
    """Sup distance of the Gaussian-measure polynomial Gram from the
    identity; zero defect is what makes the two assemblies agree."""
    pts = rule.points
    table = _poly_basis_table(spec, pts)
    norm = np.pi ** (-spec.dim / 2.0)
    gram = (table * (norm * rule.weights)) @ table.T
    return float(np.max(np.abs(gram - np.eye(spec.size))))


@dataclass(frozen=True)
class PowerIterationResult:
    """Largest singular value estimate with convergence bookkeeping."""

    value: float
    iterations: int
    converged: bool


def operator_norm(
    matrix: np.ndarray,
    rel_tol: float = 1e-10,
    max_iterations: int = 10_000,
) -> PowerIterationResult:
    """Largest singular value by power iteration on M* M.

    Starts from the all-ones vector so repeated runs are identical.  If
    the relative change has not fallen below ``rel_tol`` within the
    iteration cap, the last iterate is returned with the flag unset.
    """
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("need a matrix")
    if m.size == 0 or not np.any(m):
        return PowerIterationResult(0.0, 0, True)
    v = np.ones(m.shape[1], dtype=complex)
    v /= np.linalg.norm(v)
    previous = 0.0
    for iteration in range(1, max_iterations + 1):
        w = m @ v
        estimate = float(np.linalg.norm(w))
        v = np.conj(m.T) @ w
        scale = np.linalg.norm(v)
        if scale == 0.0:
            return PowerIterationResult(0.0, iteration, True)
        v /= scale
        if abs(estimate - previous) <= rel_tol * max(estimate, 1e-300):
            return PowerIterationResult(estimate, iteration, True)
        previous = estimate
    return PowerIterationResult(previous, max_iterations, False)


def save_matrix_csv(path, matrix: np.ndarray, header_lines=()) -> None:
    """Row-major CSV with interleaved re,im columns and 17 significant
    digits; optional comment lines go first, prefixed with '#'."""
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w", encoding="ascii") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for row in m:
            cells = []
            for entry in row:
                cells.append(f"{entry.real:.17g}")
                cells.append(f"{entry.imag:.17g}")
            fh.write(",".join(cells) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [float(c) for c in line.split(",")]
            if len(cells) % 2:
                raise ValueError("expected interleaved re,im cells")
            rows.append([complex(cells[k], cells[k + 1])
                         for k in range(0, len(cells), 2)])
    return np.asarray(rows, dtype=complex)


def save_matrix_binary(path, matrix: np.ndarray, dim: int, max_degree: int) -> None:
    """Binary export: magic, little-endian uint32 dim, max degree and
    matrix side, then row-major interleaved re,im float64."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("need a square matrix")
    side = m.shape[0]
    interleaved = np.empty((side, side, 2))
    interleaved[..., 0] = m.real
    interleaved[..., 1] = m.imag
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<III", dim, max_degree, side))
        fh.write(interleaved.astype("<f8").tobytes())


def load_matrix_binary(path) -> tuple[np.ndarray, int, int]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BINARY_MAGIC:
            raise ValueError("not a matrix export")
        dim, max_degree, side = struct.unpack("<III", fh.read(12))
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != side * side * 2:
        raise ValueError("truncated matrix payload")
    shaped = payload.reshape(side, side, 2)
    return shaped[..., 0] + 1j * shaped[..., 1], dim, max_degree
