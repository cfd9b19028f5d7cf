"""Quantitative estimates: kernel decay, almost orthogonality, norms.

Kernel moment norms.  For the block kernel K_j(x, y) the quantity

    k_{j,gamma}(x) = ( int |(x - y)^gamma K_j(x, y)|^2 dy )^(1/2)

is computed exactly in coefficient space: K_j(x, .) is a band-limited
Hermite expansion in y, multiplying by (x_i - y_i) is a tridiagonal map
on coefficients, and the L^2 norm is the coefficient norm by Parseval.
No quadrature in y is involved, so degrees in the thousands are fine.
In two dimensions the coefficient grid is streamed in column blocks,
which keeps the delicate ladder cancellations inside each entry; the
blocked route needs the symbol to depend on xi only through the total
degree, which every registry symbol does.  A quadrature route over a
supplied rule is kept as an independent cross-check for small blocks.

Against the dyadic prediction sup_x k_{j,gamma}(x) ~ 2^(j (mu + n/2 - M))
with M = |gamma|, the sweep fits log2 of the measured suprema against j.
Note the exponent convention: mu here is the power-bound exponent of
sigma against (1 + |xi|)^mu per difference order, which for the class
parameter m of the registry (normalized as m/2 per half-power) means
mu = m / 2.  For the multiplier-free case m = 0 the two agree.

Almost orthogonality.  The composition norms of block operators reduce
to bump-scaled blocks of the single Gram matrix

    G[eta, xi] = <sigma(., xi) h_xi, sigma(., eta) h_eta>,

since sigma_j* sigma_k has matrix diag(phi_j) G diag(phi_k) and
sigma_j sigma_k* is unitarily flattened onto the support overlap of
phi_j phi_k, which is empty for |j - k| >= 2: those norms are exact
zeros by construction, not small numbers.  The ledger fits the decay
exponent of the star-composition norms over well-separated pairs.

The remaining sweeps (operator norm growth in the band limit, the
Sobolev-style sufficient criterion, and the spectral projection
profile) are direct numerical surveys built on the same pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hermult.hermite import (
    _compositions,
    BasisSpec,
    hermite_table,
    shell_degrees,
)
from hermult.pseudomult import (
    assemble_matrix,
    block_kernel,
    operator_norm,
    projection_kernel_diag,
)
from hermult.quadrature import TensorRule, gauss_hermite, tensor_rule
from hermult.symbols import Symbol, bump_by_degree

__all__ = [
    "DecaySweep",
    "CksLedger",
    "BoundednessSweep",
    "SobolevReport",
    "ProjectionSweep",
    "fit_log2_line",
    "kernel_moment_norm",
    "kernel_moment_sweep",
    "gram_matrix",
    "cks_ledger",
    "boundedness_sweep",
    "sobolev_criterion_check",
    "projection_bound_sweep",
    "projection_tail_exponent",
]


def fit_log2_line(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through (xs, log2 ys); returns slope,
    intercept, and the rms residual of the fit."""
    xs = np.asarray(xs, dtype=float)
    logs = np.log2(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(xs, logs, 1)
    rms = float(np.sqrt(np.mean((logs - (slope * xs + intercept)) ** 2)))
    return float(slope), float(intercept), rms


def _shell_top(j: int, dim: int) -> int:
    degrees = shell_degrees(j, dim)
    if len(degrees) == 0:
        return -1
    return degrees[-1]


def _degree_weights(sigma: Symbol, j: int, x: np.ndarray, top: int) -> np.ndarray:
    """phi_j(d) sigma(x, d) over total degrees 0..top at one point."""
    degrees = np.arange(top + 1)
    bump = bump_by_degree(j, degrees, x.shape[-1])
    if sigma.radial and sigma.degree_profile is not None:
        prof = np.asarray(sigma.degree_profile(x, degrees))
    else:
        raise ValueError(
            "coefficient-space moment norms need a symbol with a "
            "total-degree profile; use the quadrature route instead"
        )
    return prof * bump


def _gap_axis0(block: np.ndarray, x1: float, a_of: np.ndarray) -> np.ndarray:
    """(x1 - Y1) on the first axis: tridiagonal ladder action."""
    out = x1 * block
    out[1:] -= a_of[1:, None] * block[:-1]
    out[:-1] -= a_of[1:, None] * block[1:]
    return out


def _gap_axis1(block: np.ndarray, x2: float, b_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(x2 - Y2) on the second axis, consuming one halo column per side."""
    kept = b_values[1:-1]
    a_k = np.sqrt(np.clip(kept, 0.0, None) / 2.0)
    a_k1 = np.sqrt(np.clip(kept + 1.0, 0.0, None) / 2.0)
    out = x2 * block[:, 1:-1] - a_k[None, :] * block[:, :-2] \
        - a_k1[None, :] * block[:, 2:]
    return out, kept


def _moment_norm_1d(sigma: Symbol, j: int, gamma: int, x: np.ndarray) -> float:
    top = _shell_top(j, 1)
    if top < 0:
        return 0.0
    length = top + gamma + 1
    weights = _degree_weights(sigma, j, x, top)
    h_at_x = hermite_table(top, np.asarray([x[0]]))[:, 0]
    c = np.zeros(length, dtype=complex)
    c[: top + 1] = weights * h_at_x
    a_of = np.sqrt(np.arange(length) / 2.0)
    col = c[:, None]
    for _ in range(gamma):
        col = _gap_axis0(col, float(x[0]), a_of)
    return float(np.linalg.norm(col))


def _moment_norm_2d(
    sigma: Symbol, j: int, gamma: tuple[int, int], x: np.ndarray,
    block_columns: int = 512,
) -> float:
    top = _shell_top(j, 2)
    if top < 0:
        return 0.0
    g1, g2 = gamma
    rows = top + g1 + 1
    cols = top + g2 + 1
    weights = _degree_weights(sigma, j, x, top)
    u = hermite_table(rows - 1, np.asarray([x[0]]))[:, 0]
    v = hermite_table(cols + g2, np.asarray([x[1]]))[:, 0]
    a_of = np.sqrt(np.arange(rows) / 2.0)
    aa = np.arange(rows)[:, None]

    total = 0.0
    for b0 in range(0, cols, block_columns):
        b1 = min(b0 + block_columns, cols)
        b_halo = np.arange(b0 - g2, b1 + g2)
        idx = aa + b_halo[None, :]
        valid = (idx >= 0) & (idx <= top) & (b_halo[None, :] >= 0)
        block = np.where(valid, weights[np.clip(idx, 0, top)], 0.0)
        v_halo = np.where(b_halo >= 0, v[np.clip(b_halo, 0, None)], 0.0)
        block = block * u[:, None] * v_halo[None, :]
        for _ in range(g1):
            block = _gap_axis0(block, float(x[0]), a_of)
        b_values = b_halo.astype(float)
        for _ in range(g2):
            block, b_values = _gap_axis1(block, float(x[1]), b_values)
        total += float(np.sum(np.abs(block) ** 2))
    return math.sqrt(total)


def _moment_norm_quadrature(
    sigma: Symbol, j: int, gamma: tuple[int, ...], x: np.ndarray,
    rule: TensorRule,
) -> float:
    kernel = block_kernel(sigma, j, x[None, :], rule.points)[0]
    gaps = np.ones(rule.points.shape[0])
    for ax, power in enumerate(gamma):
        if power:
            gaps = gaps * (x[ax] - rule.points[:, ax]) ** power
    values = gaps * kernel
    return math.sqrt(float(np.sum(rule.lebesgue_weights * np.abs(values) ** 2)))


def kernel_moment_norm(
    sigma: Symbol,
    j: int,
    gamma,
    x_point,
    method: str = "coefficient",
    rule: TensorRule | None = None,
) -> float:
    """The weighted kernel norm ( int |(x-y)^gamma K_j(x,y)|^2 dy )^(1/2).

    The coefficient route is exact in y and is the default; pass
    ``method="quadrature"`` with a rule resolving twice the shell degree
    to cross-check small blocks by integration.
    """
    x = np.asarray(x_point, dtype=float).reshape(-1)
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != x.shape[0]:
        raise ValueError("gamma and point dimension differ")
    if any(g < 0 for g in gamma):
        raise ValueError("moment orders must be nonnegative")
    if method == "quadrature":
        if rule is None:
            raise ValueError("quadrature route needs a rule")
        return _moment_norm_quadrature(sigma, j, gamma, x, rule)
    if method != "coefficient":
        raise ValueError("method must be 'coefficient' or 'quadrature'")
    if x.shape[0] == 1:
        return _moment_norm_1d(sigma, j, gamma[0], x)
    if x.shape[0] == 2:
        return _moment_norm_2d(sigma, j, gamma, x)
    raise ValueError("coefficient route implemented for dimensions 1 and 2")


@dataclass(frozen=True)
class DecaySweep:
    """Fitted dyadic decay of kernel moment norms across blocks."""

    symbol: str
    dim: int
    moment: int
    j_values: tuple[int, ...]
    sup_norms: tuple[float, ...]
    slope: float
    intercept: float
    rms_residual: float
    expected_slope: float

    @property
    def slope_error(self) -> float:
        return abs(self.slope - self.expected_slope)


def _default_x_sample(dim: int) -> np.ndarray:
    if dim == 1:
        nodes = gauss_hermite(4).nodes
        return np.concatenate([nodes, [0.0]])[:, None]
    base = gauss_hermite(2).nodes
    grid = np.array([(s, t) for s in base for t in base])
    return np.vstack([grid, np.zeros((1, 2))])


def kernel_moment_sweep(
    sigma: Symbol,
    dim: int,
    moment: int,
    j_values=(3, 4, 5, 6, 7),
    x_sample=None,
) -> DecaySweep:
    """Fit log2 of sup_x kernel moment norms against the block index.

    For each j the sup runs over the sample cloud (small Gauss nodes
    plus the origin by default) and over all moment splittings gamma
    with |gamma| = M.  The expected slope is mu + dim/2 - M with mu
    the per-difference power of the symbol, i.e. half its class order.
    """
    j_values = tuple(int(j) for j in j_values)
    if len(j_values) < 4:
        raise ValueError("slope fits need at least four block indices")
    if x_sample is None:
        x_sample = _default_x_sample(dim)
    x_sample = np.atleast_2d(np.asarray(x_sample, dtype=float))
    gammas = [tuple(g) for g in _compositions(moment, dim)]
    sups = []
    for j in j_values:
        worst = 0.0
        for x in x_sample:
            for gamma in gammas:
                worst = max(worst, kernel_moment_norm(sigma, j, gamma, x))
        sups.append(worst)
    slope, intercept, rms = fit_log2_line(j_values, sups)
    expected = sigma.order / 2.0 + dim / 2.0 - moment
    return DecaySweep(
        symbol=sigma.name,
        dim=dim,
        moment=moment,
        j_values=j_values,
        sup_norms=tuple(float(s) for s in sups),
        slope=slope,
        intercept=intercept,
        rms_residual=rms,
        expected_slope=expected,
    )


def gram_matrix(sigma: Symbol, max_degree: int, dim: int = 1,
                quad_margin: int = 64) -> np.ndarray:
    """G[eta, xi] = <sigma(., xi) h_xi, sigma(., eta) h_eta> by Gauss
    quadrature, for all indices of total degree up to ``max_degree``."""
    spec = BasisSpec(dim, max_degree)
    per_axis = max_degree + quad_margin
    if per_axis > 4096:
        raise ValueError(
            f"degree {max_degree} needs {per_axis} nodes per axis, past "
            "the 4096-node quadrature budget"
        )
    rule = tensor_rule(dim, per_axis)
    pts = rule.points
    table = np.empty((spec.size, pts.shape[0]), dtype=complex)
    axis_tables = [hermite_table(max_degree, pts[:, ax]) for ax in range(dim)]
    for pos, xi in enumerate(spec.indices):
        row = axis_tables[0][xi[0]]
        for ax in range(1, dim):
            row = row * axis_tables[ax][xi[ax]]
        table[pos] = np.asarray(sigma.value(pts, xi)) * row
    weighted = np.conj(table) * rule.lebesgue_weights
    return weighted @ table.T


@dataclass(frozen=True)
class CksLedger:
    """Composition norms of block operators and the fitted decay.

    ``star_norms[j, k]`` holds the norm of sigma_j* sigma_k and
    ``co_norms[j, k]`` that of sigma_j sigma_k*; the latter are exact
    zeros for |j - k| >= 2 because the bump supports are disjoint.
    ``epsilon`` is the fitted decay exponent of the star norms over
    separated pairs, and ``c0_values[j]`` the individual block norms.
    """

    symbol: str
    dim: int
    jmax: int
    star_norms: np.ndarray
    co_norms: np.ndarray
    epsilon: float
    c0_values: tuple[float, ...]

    @property
    def c0(self) -> float:
        return max(self.c0_values)

    def c0_spread(self, j_lo: int, j_hi: int) -> float:
        vals = self.c0_values[j_lo : j_hi + 1]
        return (max(vals) - min(vals)) / max(vals)


def cks_ledger(
    sigma: Symbol,
    jmax: int,
    dim: int = 1,
    quad_margin: int = 64,
) -> CksLedger:
    """Assemble the almost-orthogonality ledger up to block ``jmax``.

    One Gram matrix over all degrees reached by the last shell feeds
    every composition norm; see the module notes for the reductions.
    Multiplier symbols (no x dependence) make every block operator
    diagonal, so their composition norms are written down exactly as
    the largest doubly-bumped multiplier value instead of iterated.
    """
    if dim != 1:
        raise ValueError("the composition ledger is implemented for dim 1")
    top = _shell_top(jmax, dim)
    degrees = np.arange(top + 1)
    bumps = [bump_by_degree(j, degrees, dim) for j in range(jmax + 1)]
    size = jmax + 1
    star = np.zeros((size, size))
    co = np.zeros((size, size))

    if sigma.x_independent:
        origin = np.zeros(dim)
        mults = np.array(
            [abs(sigma.value(origin, (int(d),))) for d in degrees]
        )
        for j in range(size):
            for k in range(size):
                both = bumps[j] * bumps[k] * mults**2
                if np.any(both):
                    star[j, k] = float(np.max(both))
                    co[j, k] = star[j, k]
    else:
        gram = gram_matrix(sigma, top, dim, quad_margin)
        live = [np.nonzero(b)[0] for b in bumps]
        for j in range(size):
            for k in range(size):
                rows = live[j]
                cols = live[k]
                if rows.size and cols.size:
                    block = (
                        bumps[j][rows][:, None]
                        * gram[np.ix_(rows, cols)]
                        * bumps[k][cols][None, :]
                    )
                    star[j, k] = operator_norm(block).value
                overlap = np.nonzero(bumps[j] * bumps[k])[0]
                if overlap.size:
                    weight = np.sqrt(bumps[j][overlap] * bumps[k][overlap])
                    core = (
                        weight[:, None]
                        * gram[np.ix_(overlap, overlap)]
                        * weight[None, :]
                    )
                    co[j, k] = operator_norm(core).value

    pairs_x = []
    pairs_y = []
    for j in range(size):
        for k in range(size):
            if abs(j - k) >= 2 and star[j, k] > 0.0:
                pairs_x.append(abs(j - k))
                pairs_y.append(star[j, k])
    if len(pairs_y) >= 2 and len(set(pairs_x)) >= 2:
        slope, _, _ = fit_log2_line(pairs_x, pairs_y)
        epsilon = -slope
    else:
        epsilon = math.nan
    c0_values = tuple(math.sqrt(star[j, j]) for j in range(size))
    return CksLedger(
        symbol=sigma.name,
        dim=dim,
        jmax=jmax,
        star_norms=star,
        co_norms=co,
        epsilon=epsilon,
        c0_values=c0_values,
    )


@dataclass(frozen=True)
class BoundednessSweep:
    """Operator norms across band limits, with convergence flags."""

    symbol: str
    dim: int
    lambdas: tuple[int, ...]
    norms: tuple[float, ...]
    converged: tuple[bool, ...]

    def growth(self, lam_a: int, lam_b: int) -> float:
        a = self.norms[self.lambdas.index(lam_a)]
        b = self.norms[self.lambdas.index(lam_b)]
        return (b - a) / a


def boundedness_sweep(
    sigma: Symbol,
    dim: int = 1,
    lambdas=(8, 16, 32, 64),
    quad_margin: int = 32,
) -> BoundednessSweep:
    """Largest singular value of the assembled operator per band limit."""
    norms = []
    flags = []
    for lam in lambdas:
        spec = BasisSpec(dim, int(lam))
        rule = tensor_rule(dim, int(lam) + quad_margin)
        matrix = assemble_matrix(sigma, spec, rule)
        result = operator_norm(matrix)
        norms.append(result.value)
        flags.append(result.converged)
    return BoundednessSweep(
        symbol=sigma.name,
        dim=dim,
        lambdas=tuple(int(l) for l in lambdas),
        norms=tuple(norms),
        converged=tuple(flags),
    )


@dataclass(frozen=True)
class SobolevReport:
    """Sufficient-criterion value against measured operator norms."""

    symbol: str
    dim: int
    criterion: float
    lambdas: tuple[int, ...]
    norms: tuple[float, ...]
    ratios: tuple[float, ...]

    def ratio_spread(self) -> float:
        return (max(self.ratios) - min(self.ratios)) / max(self.ratios)


def sobolev_criterion_check(
    sigma: Symbol,
    dim: int = 1,
    lambdas=(8, 16, 32),
    xi_probe=((0,), (4,), (16,)),
    quad_margin: int = 32,
) -> SobolevReport:
    """Compare operator norms with the derivative-sum criterion.

    The criterion is sum over |nu| <= floor(dim/2) + 1 of the squared
    L^2 norms sup_xi || d^nu sigma(., xi) ||; the report carries the
    ratio norm / sqrt(criterion) per band limit, whose stability is the
    quantitative check.
    """
    if sigma.x_derivative is None:
        raise ValueError("criterion needs analytic x-derivatives")
    quad = tensor_rule(dim, 64)
    pts = quad.points
    orders = BasisSpec(dim, dim // 2 + 1).indices
    criterion = 0.0
    for nu in orders:
        worst = 0.0
        for xi in xi_probe:
            vals = np.asarray(sigma.x_derivative(nu, pts, tuple(xi)))
            worst = max(worst, float(np.sum(quad.lebesgue_weights * np.abs(vals) ** 2)))
        criterion += worst
    sweep = boundedness_sweep(sigma, dim, lambdas, quad_margin)
    ratios = tuple(n / math.sqrt(criterion) for n in sweep.norms)
    return SobolevReport(
        symbol=sigma.name,
        dim=dim,
        criterion=criterion,
        lambdas=sweep.lambdas,
        norms=sweep.norms,
        ratios=ratios,
    )


@dataclass(frozen=True)
class ProjectionSweep:
    """Spectral projection diagonal: bulk ratios and tail exponents."""

    dim: int
    degrees: tuple[int, ...]
    sup_values: tuple[float, ...]
    ratios: tuple[float, ...]
    thetas: tuple[float, ...]

    def ratio_spread(self) -> float:
        return max(self.ratios) / min(self.ratios)


def projection_tail_exponent(max_degree: int, dim: int = 1, span: float = 2.0,
                             samples: int = 40) -> float:
    """Gaussian tail exponent of Q_N along a ray outside the bulk.

    Fits log Q_N(x, x) against |x|^2 for |x| past sqrt(4N + 2) and
    returns minus half the slope; positive values certify square
    exponential decay at that degree.
    """
    start = math.sqrt(4.0 * max_degree + 2.0)
    radii = np.linspace(start, start + span, samples)
    pts = np.zeros((samples, dim))
    pts[:, 0] = radii
    vals = projection_kernel_diag(max_degree, pts, dim)
    slope = np.polyfit(radii**2, np.log(vals), 1)[0]
    return float(-0.5 * slope)


def projection_bound_sweep(
    dim: int = 1,
    degrees=(4, 8, 16, 32, 64, 128, 256),
    grid_points: int = 240,
) -> ProjectionSweep:
    """Survey sup_x Q_N(x, x) / N^(dim/2) and the tail exponents."""
    sups = []
    ratios = []
    thetas = []
    for n_deg in degrees:
        reach = math.sqrt(2.0 * n_deg + 1.0) + 2.0
        radii = np.linspace(0.0, reach, grid_points)
        pts = np.zeros((grid_points, dim))
        pts[:, 0] = radii
        vals = projection_kernel_diag(int(n_deg), pts, dim)
        sup = float(np.max(vals))
        sups.append(sup)
        ratios.append(sup / float(n_deg) ** (dim / 2.0))
        thetas.append(projection_tail_exponent(int(n_deg), dim))
    return ProjectionSweep(
        dim=dim,
        degrees=tuple(int(d) for d in degrees),
        sup_values=tuple(sups),
        ratios=tuple(ratios),
        thetas=tuple(thetas),
    )
