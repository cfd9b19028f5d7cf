"""Discrete integration-by-parts identities for Hermite kernel sums.

Two families of exact identities are implemented and verified here.

Frequency side.  For a finitely supported coefficient function k(xi)
and the kernel K(x, y) = sum_xi k(xi) h_xi(x) h_xi(y), repeated Abel
summation against the ladder difference A^y - A^x trades powers of
(x_i - y_i) for forward differences of k:

    2^N (x_i - y_i)^N K(x, y)
      = sum_xi sum_{l, nu + omega = 2l - N}
          c(nu, l, N) D_i^l k(xi) d_nu(xi_i) d_omega(xi_i)
          h_{xi + omega e_i}(x) h_{xi + nu e_i}(y),

with l ranging over N/2 <= l <= N, integer coefficients

    c(nu, l, N) = (-1)^(l - nu) 4^(N - l) (2N - 2l - 1)!!
                  binom(N, 2l - N) binom(2l - N, nu),

and ladder products d_m(s) = prod_{r < m} sqrt(2(s + r) + 2).  The
per-level totals c(l, N) = (-4)^(N - l) (2N - 2l - 1)!! binom(N, 2l - N)
also satisfy a two-term recursion used as an independent cross-check.
Swapping which of nu, omega attaches to the x factor flips the whole
right side by (-1)^N; ``freq_attachment_report`` measures both.

Spatial side.  For integrals G = int g(x) h_xi(x) h_eta(x) dx the
classical Lagrange identity for the one-dimensional oscillator gives

    2 (xi_i - eta_i) int g u v dx
      = int d_i g (d_i u v - u d_i v) dx + 2 (beta - alpha) int g u v dx

for shifted factors u = h_{xi + alpha e_i}, v = h_{eta + beta e_i}.
Iterating N times yields an expansion of 2^N (xi_i - eta_i)^N G into at
most 5^N terms int d_i^l g h_{xi + alpha e_i} h_{eta + beta e_i} whose
coefficients are integer multiples of products of half-ladder factors
a_s = sqrt(s / 2); terms are merged only when the whole symbolic factor
list agrees, so the bookkeeping stays exact.

Everything here is checked pointwise or by Gauss quadrature; the
verifiers return worst-case errors and never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from hermult.hermite import (
    MultiIndex,
    eval_hermite_derivative,
    eval_hermite_nd,
    half_ladder_coefficient,
    ladder_lower_coefficient,
    ladder_raise_coefficient,
)
from hermult.quadrature import TensorRule
from hermult.symbols import Symbol, littlewood_paley_bump

__all__ = [
    "FreqTerm",
    "SpatialTerm",
    "BiExpansion",
    "LADDER_IDENTITY_KEYS",
    "double_factorial",
    "freq_block_coefficient",
    "freq_coefficients_by_recursion",
    "freq_expansion",
    "freq_expansion_rows",
    "d_factor",
    "pair_basis",
    "verify_ladder_identity",
    "verify_freq_identity",
    "freq_attachment_report",
    "spatial_expansion",
    "spatial_expansion_rows",
    "spatial_coefficient",
    "spatial_coefficient_bound_ratio",
    "verify_spatial_identity",
    "verify_lagrange",
    "almost_orthogonality_entry",
    "FreqVerification",
]


def _shift(xi: MultiIndex, i: int, step: int) -> MultiIndex:
    out = list(xi)
    out[i] += step
    return tuple(out)


def _as_pair_points(x_points, y_points):
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    y = np.atleast_2d(np.asarray(y_points, dtype=float))
    if x.shape != y.shape:
        raise ValueError("x and y point clouds must have matching shape")
    return x, y


def _sup_relative(lhs, rhs, scale_parts=None, floor: float = 1e-12) -> float:
    """Sup error against the magnitude of the computation's ingredients.

    For identities whose two sides cancel to zero the honest yardstick
    is the size of the terms that cancel, so callers can pass those as
    ``scale_parts``; by default the sides themselves set the scale.
    """
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    parts = (lhs, rhs) if scale_parts is None else scale_parts
    scale = max(*(float(np.max(np.abs(p))) for p in parts), floor)
    return float(np.max(np.abs(lhs - rhs))) / scale


def double_factorial(n: int) -> int:
    """n!! for odd n >= -1, with (-1)!! = 1."""
    if n < -1 or n % 2 == 0:
        raise ValueError("defined for odd integers >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def freq_block_coefficient(ell: int, order: int) -> int:
    """Per-level total c(l, N) = (-4)^(N-l) (2N-2l-1)!! binom(N, 2l-N)."""
    if not (order / 2 <= ell <= order):
        return 0
    return ((-4) ** (order - ell)
            * double_factorial(2 * order - 2 * ell - 1)
            * math.comb(order, 2 * ell - order))


def freq_coefficients_by_recursion(order: int) -> dict[int, int]:
    """Per-level totals by the two-term recursion, independent of the
    closed form: c(l, N+1) = c(N, N) at the top level, otherwise
    c(l-1, N) - 4 (2l - N) c(l, N), starting from c(1, 1) = 1."""
    if order < 1:
        raise ValueError("order must be >= 1")
    table = {1: 1}
    for n in range(1, order):
        nxt: dict[int, int] = {}
        for ell in range(math.ceil((n + 1) / 2), n + 2):
            if ell == n + 1:
                nxt[ell] = table[n]
            else:
                nxt[ell] = table.get(ell - 1, 0) - 4 * (2 * ell - n) * table.get(ell, 0)
        table = nxt
    return table


@dataclass(frozen=True)
class FreqTerm:
    """One right-hand term of the frequency identity at fixed level."""

    ell: int
    nu: int
    omega: int
    coefficient: int


def freq_expansion(order: int, attachment: str = "proof") -> list[FreqTerm]:
    """All terms of the order-N frequency identity.

    ``attachment`` selects which split index rides on which variable:
    the working form ("proof") pairs nu with y and makes the identity
    hold as written; the transposed form ("statement") pairs nu with x
    and differs by a global (-1)^N.  Terms are returned in the proof
    convention; the verifier applies the attachment when evaluating.
    """
    if attachment not in ("proof", "statement"):
        raise ValueError("attachment must be 'proof' or 'statement'")
    if order < 1:
        raise ValueError("order must be >= 1")
    terms = []
    for ell in range(math.ceil(order / 2), order + 1):
        level = freq_block_coefficient(ell, order)
        split = 2 * ell - order
        for nu in range(split + 1):
            omega = split - nu
            coeff = level * ((-1) ** (order - nu)) * math.comb(split, nu)
            terms.append(FreqTerm(ell, nu, omega, coeff))
    return terms


def freq_expansion_rows(order: int) -> list[dict]:
    """The expansion as plain dict rows for serialization."""
    return [
        {"ell": t.ell, "nu": t.nu, "omega": t.omega, "coefficient": t.coefficient}
        for t in freq_expansion(order)
    ]


def d_factor(m: int, lam: int) -> float:
    """Ladder product d_m(lam) = prod_{r<m} sqrt(2(lam+r)+2); d_0 = 1."""
    if m < 0:
        raise ValueError("m must be >= 0")
    out = 1.0
    for r in range(m):
        out *= math.sqrt(2.0 * (lam + r) + 2.0)
    return out


class BiExpansion:
    """Finite sum of separated products c h_xi(x) h_eta(y).

    The ladder maps act index-wise, so every operator needed by the
    two-point identities is a sparse map on the coefficient dict.  All
    operations return new objects.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[tuple[MultiIndex, MultiIndex], complex] | None = None):
        self.dim = dim
        self.terms: dict[tuple[MultiIndex, MultiIndex], complex] = {}
        if terms:
            for key, val in terms.items():
                if val != 0:
                    self.terms[key] = self.terms.get(key, 0) + val

    def _built(self, terms: dict) -> "BiExpansion":
        out = BiExpansion(self.dim)
        out.terms = {k: v for k, v in terms.items() if v != 0}
        return out

    def scale(self, c: complex) -> "BiExpansion":
        return self._built({k: c * v for k, v in self.terms.items()})

    def __add__(self, other: "BiExpansion") -> "BiExpansion":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return self._built(terms)

    def __sub__(self, other: "BiExpansion") -> "BiExpansion":
        return self + other.scale(-1)

    def raise_x(self, i: int) -> "BiExpansion":
        """A_i acting on the x factor: h_xi -> sqrt(2 xi_i + 2) h_{xi+e_i}."""
        terms: dict = {}
        for (xi, eta), c in self.terms.items():
            key = (_shift(xi, i, 1), eta)
            terms[key] = terms.get(key, 0) + c * ladder_raise_coefficient(xi[i])
        return self._built(terms)

    def raise_y(self, i: int) -> "BiExpansion":
        terms: dict = {}
        for (xi, eta), c in self.terms.items():
            key = (xi, _shift(eta, i, 1))
            terms[key] = terms.get(key, 0) + c * ladder_raise_coefficient(eta[i])
        return self._built(terms)

    def difference(self, i: int) -> "BiExpansion":
        """The ladder gap A^y_i - A^x_i."""
        return self.raise_y(i) - self.raise_x(i)

    def multiply_coordinate_x(self, i: int) -> "BiExpansion":
        """Multiplication by x_i via the half-sum split of the ladder."""
        terms: dict = {}
        for (xi, eta), c in self.terms.items():
            up = (_shift(xi, i, 1), eta)
            terms[up] = terms.get(up, 0) + 0.5 * c * ladder_raise_coefficient(xi[i])
            low = ladder_lower_coefficient(xi[i])
            if low:
                down = (_shift(xi, i, -1), eta)
                terms[down] = terms.get(down, 0) + 0.5 * c * low
        return self._built(terms)

    def multiply_coordinate_y(self, i: int) -> "BiExpansion":
        terms: dict = {}
        for (xi, eta), c in self.terms.items():
            up = (xi, _shift(eta, i, 1))
            terms[up] = terms.get(up, 0) + 0.5 * c * ladder_raise_coefficient(eta[i])
            low = ladder_lower_coefficient(eta[i])
            if low:
                down = (xi, _shift(eta, i, -1))
                terms[down] = terms.get(down, 0) + 0.5 * c * low
        return self._built(terms)

    def multiply_gap(self, i: int) -> "BiExpansion":
        """Multiplication by (x_i - y_i)."""
        return self.multiply_coordinate_x(i) - self.multiply_coordinate_y(i)

    def evaluate(self, x_points: np.ndarray, y_points: np.ndarray) -> np.ndarray:
        x, y = _as_pair_points(x_points, y_points)
        out = np.zeros(x.shape[0], dtype=complex)
        for (xi, eta), c in self.terms.items():
            out += c * eval_hermite_nd(xi, x) * eval_hermite_nd(eta, y)
        return out


def pair_basis(xi: MultiIndex, eta: MultiIndex | None = None) -> BiExpansion:
    """The elementary product h_xi(x) h_eta(y) (eta defaults to xi)."""
    xi = tuple(xi)
    eta = xi if eta is None else tuple(eta)
    return BiExpansion(len(xi), {(xi, eta): 1.0})


LADDER_IDENTITY_KEYS = (
    "ladder-raise",
    "ladder-lower",
    "coordinate-split",
    "difference-commutator",
    "pair-difference",
    "coordinate-transfer",
    "summation-shift",
)


def _index_pair_difference(xi: MultiIndex, i: int) -> BiExpansion:
    """Forward index difference of zeta -> h_zeta h_zeta at zeta = xi - e_i,
    with the vanishing convention below the bottom rung."""
    upper = pair_basis(xi)
    if xi[i] >= 1:
        return upper - pair_basis(_shift(xi, i, -1))
    return upper


def verify_ladder_identity(
    key: str,
    xi: MultiIndex,
    i: int,
    x_points,
    y_points=None,
    r: int = 1,
    weights: Mapping[MultiIndex, complex] | None = None,
    power: int = 0,
) -> float:
    """Worst-case relative error of one exact ladder identity.

    Single-variable identities (``ladder-raise``, ``ladder-lower``,
    ``coordinate-split``) use only ``x_points``.  The two-point ones
    evaluate on paired clouds; ``difference-commutator`` takes the
    operator power ``r`` and ``summation-shift`` takes the finitely
    supported weight function plus the gap power ``power``.
    """
    if key not in LADDER_IDENTITY_KEYS:
        raise KeyError(f"unknown identity {key!r}; choose from {LADDER_IDENTITY_KEYS}")
    xi = tuple(xi)
    x = np.atleast_2d(np.asarray(x_points, dtype=float))

    if key == "ladder-raise":
        lhs = -eval_hermite_derivative(i, xi, x) + x[:, i] * eval_hermite_nd(xi, x)
        rhs = ladder_raise_coefficient(xi[i]) * eval_hermite_nd(_shift(xi, i, 1), x)
        return _sup_relative(lhs, rhs)

    if key == "ladder-lower":
        deriv = eval_hermite_derivative(i, xi, x)
        carried = x[:, i] * eval_hermite_nd(xi, x)
        rhs = ladder_lower_coefficient(xi[i]) * eval_hermite_nd(_shift(xi, i, -1), x)
        return _sup_relative(deriv + carried, rhs, scale_parts=(deriv, carried, rhs))

    if key == "coordinate-split":
        lhs = 2.0 * x[:, i] * eval_hermite_nd(xi, x)
        rhs = (ladder_raise_coefficient(xi[i]) * eval_hermite_nd(_shift(xi, i, 1), x)
               + ladder_lower_coefficient(xi[i]) * eval_hermite_nd(_shift(xi, i, -1), x))
        return _sup_relative(lhs, rhs)

    if y_points is None:
        raise ValueError(f"identity {key!r} needs a paired point cloud")
    y = np.atleast_2d(np.asarray(y_points, dtype=float))

    if key == "difference-commutator":
        if r < 1:
            raise ValueError("operator power r must be >= 1")
        base = pair_basis(xi)
        powered = base
        for _ in range(r):
            powered = powered.difference(i)
        lhs = powered.multiply_gap(i)
        lowered = base
        for _ in range(r - 1):
            lowered = lowered.difference(i)
        gap_first = base.multiply_gap(i)
        for _ in range(r):
            gap_first = gap_first.difference(i)
        rhs = gap_first - lowered.scale(2.0 * r)
        return _sup_relative(lhs.evaluate(x, y), rhs.evaluate(x, y))

    if key == "pair-difference":
        lhs = pair_basis(xi).difference(i)
        coeff = ladder_raise_coefficient(xi[i])
        up = _shift(xi, i, 1)
        rhs = BiExpansion(len(xi), {(xi, up): coeff, (up, xi): -coeff})
        return _sup_relative(lhs.evaluate(x, y), rhs.evaluate(x, y))

    if key == "coordinate-transfer":
        lhs = pair_basis(xi).multiply_gap(i).scale(2.0)
        rhs = _index_pair_difference(xi, i).difference(i).scale(-1.0)
        return _sup_relative(lhs.evaluate(x, y), rhs.evaluate(x, y))

    if key == "summation-shift":
        if weights is None:
            raise ValueError("summation-shift needs a weight dictionary")
        weights = {tuple(k): v for k, v in weights.items() if v != 0}
        lhs = np.zeros(x.shape[0], dtype=complex)
        for idx, w in weights.items():
            expr = pair_basis(idx).multiply_gap(i).scale(2.0)
            for _ in range(power):
                expr = expr.difference(i)
            lhs += w * expr.evaluate(x, y)
        rhs = np.zeros(x.shape[0], dtype=complex)
        shifted_support = set(weights)
        shifted_support.update(
            _shift(idx, i, -1) for idx in weights if idx[i] >= 1
        )
        for idx in shifted_support:
            dw = weights.get(_shift(idx, i, 1), 0) - weights.get(idx, 0)
            if dw == 0:
                continue
            expr = pair_basis(idx)
            for _ in range(power + 1):
                expr = expr.difference(i)
            rhs += dw * expr.evaluate(x, y)
        return _sup_relative(lhs, rhs)

    raise AssertionError("unreachable")


@dataclass(frozen=True)
class FreqVerification:
    """Worst-case errors of one frequency-identity evaluation."""

    max_abs_error: float
    scale: float

    @property
    def relative_error(self) -> float:
        return self.max_abs_error / max(self.scale, 1e-12)


def verify_freq_identity(
    coefficients: Mapping[MultiIndex, complex],
    i: int,
    order: int,
    x_points,
    y_points,
    attachment: str = "proof",
    terms: Sequence[FreqTerm] | None = None,
) -> FreqVerification:
    """Evaluate both sides of the order-N frequency identity.

    ``coefficients`` is the finitely supported k(xi); the kernel sum and
    the difference-expanded right side are compared on the paired point
    cloud.  The returned scale is the larger sup magnitude of the two
    sides, so callers can form either absolute or relative errors.
    ``terms`` overrides the expansion used for the right side; negative
    controls pass a deliberately perturbed term list through it.
    """
    if attachment not in ("proof", "statement"):
        raise ValueError("attachment must be 'proof' or 'statement'")
    support = {tuple(k): v for k, v in coefficients.items() if v != 0}
    if not support:
        raise ValueError("coefficient support is empty")
    dim = len(next(iter(support)))
    x, y = _as_pair_points(x_points, y_points)

    kernel = np.zeros(x.shape[0], dtype=complex)
    for idx, val in support.items():
        kernel += val * eval_hermite_nd(idx, x) * eval_hermite_nd(idx, y)
    lhs = (2.0 ** order) * (x[:, i] - y[:, i]) ** order * kernel

    probe = set()
    for idx in support:
        for back in range(order + 1):
            if idx[i] - back >= 0:
                probe.add(_shift(idx, i, -back))
    if terms is None:
        terms = freq_expansion(order)
    rhs = np.zeros(x.shape[0], dtype=complex)
    for idx in sorted(probe):
        for term in terms:
            dk = sum(
                ((-1) ** (term.ell - rr)) * math.comb(term.ell, rr)
                * support.get(_shift(idx, i, rr), 0)
                for rr in range(term.ell + 1)
            )
            if dk == 0:
                continue
            weight = (term.coefficient * dk
                      * d_factor(term.nu, idx[i]) * d_factor(term.omega, idx[i]))
            if attachment == "proof":
                hx = eval_hermite_nd(_shift(idx, i, term.omega), x)
                hy = eval_hermite_nd(_shift(idx, i, term.nu), y)
            else:
                hx = eval_hermite_nd(_shift(idx, i, term.nu), x)
                hy = eval_hermite_nd(_shift(idx, i, term.omega), y)
            rhs += weight * hx * hy
    scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return FreqVerification(float(np.max(np.abs(lhs - rhs))), scale)


def freq_attachment_report(
    coefficients: Mapping[MultiIndex, complex],
    i: int,
    order: int,
    x_points,
    y_points,
) -> dict:
    """Errors of both attachment conventions plus the matching one.

    The two conventions differ by a global (-1)^N, so for odd orders
    exactly one of them satisfies the identity as written.
    """
    out = {}
    for attachment in ("proof", "statement"):
        out[attachment] = verify_freq_identity(
            coefficients, i, order, x_points, y_points, attachment
        ).relative_error
    out["matching"] = min(out, key=lambda k: out[k] if k != "matching" else np.inf)
    return out


@dataclass(frozen=True)
class SpatialTerm:
    """One term of the spatial expansion.

    ``factors`` is a sorted tuple of symbolic half-ladder factors
    ('xi' or 'eta', offset), each standing for a_{s + offset} with s the
    relevant concrete index; ``scalar`` collects the exact integer
    multiplier.  Terms merge only when the full key agrees.
    """

    ell: int
    alpha: int
    beta: int
    factors: tuple[tuple[str, int], ...]
    scalar: int

    def coefficient(self, xi_i: int, eta_i: int) -> float:
        out = float(self.scalar)
        for side, offset in self.factors:
            base = xi_i if side == "xi" else eta_i
            out *= half_ladder_coefficient(base + offset)
            if out == 0.0:
                return 0.0
        return out


def _spatial_children(term: SpatialTerm) -> list[SpatialTerm]:
    ell, alpha, beta, factors, s = (
        term.ell, term.alpha, term.beta, term.factors, term.scalar,
    )

    def with_factor(side, offset, scalar, d_alpha=0, d_beta=0):
        fac = tuple(sorted(factors + ((side, offset),)))
        return SpatialTerm(ell + 1, alpha + d_alpha, beta + d_beta, fac, scalar)

    children = [
        with_factor("xi", alpha + 1, -s, d_alpha=+1),
        with_factor("xi", alpha, +s, d_alpha=-1),
        with_factor("eta", beta + 1, +s, d_beta=+1),
        with_factor("eta", beta, -s, d_beta=-1),
    ]
    drift = 2 * (beta - alpha) * s
    if drift:
        children.append(SpatialTerm(ell, alpha, beta, factors, drift))
    return children


def _merge_spatial(terms: list[SpatialTerm]) -> list[SpatialTerm]:
    merged: dict[tuple, int] = {}
    for t in terms:
        key = (t.ell, t.alpha, t.beta, t.factors)
        merged[key] = merged.get(key, 0) + t.scalar
    return [
        SpatialTerm(ell, alpha, beta, factors, scalar)
        for (ell, alpha, beta, factors), scalar in sorted(merged.items())
        if scalar != 0
    ]


def spatial_expansion(order: int, xi_i: int, eta_i: int) -> list[SpatialTerm]:
    """Expansion of 2^N (xi_i - eta_i)^N G into derivative integrals.

    The concrete indices are used only to prune terms whose half-ladder
    factors hit the bottom rung (a_s = 0 for s <= 0); the symbolic
    content of surviving terms does not depend on them.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    terms = [
        SpatialTerm(1, +1, 0, (("xi", 1),), -1),
        SpatialTerm(1, -1, 0, (("xi", 0),), +1),
        SpatialTerm(1, 0, +1, (("eta", 1),), +1),
        SpatialTerm(1, 0, -1, (("eta", 0),), -1),
    ]
    for _ in range(order - 1):
        expanded: list[SpatialTerm] = []
        for t in terms:
            expanded.extend(_spatial_children(t))
        terms = _merge_spatial(expanded)
        terms = [t for t in terms if t.coefficient(xi_i, eta_i) != 0.0]
    return [t for t in terms if t.coefficient(xi_i, eta_i) != 0.0]


def spatial_expansion_rows(order: int, xi_i: int, eta_i: int) -> list[dict]:
    """The expansion as plain dict rows for serialization."""
    return [
        {
            "ell": t.ell,
            "alpha": t.alpha,
            "beta": t.beta,
            "factors": [list(f) for f in t.factors],
            "scalar": t.scalar,
            "coefficient": t.coefficient(xi_i, eta_i),
        }
        for t in spatial_expansion(order, xi_i, eta_i)
    ]


def spatial_coefficient(
    terms: Sequence[SpatialTerm], ell: int, alpha: int, beta: int,
    xi_i: int, eta_i: int,
) -> float:
    """Total numeric coefficient of the (l, alpha, beta) integral."""
    return sum(
        t.coefficient(xi_i, eta_i)
        for t in terms
        if (t.ell, t.alpha, t.beta) == (ell, alpha, beta)
    )


def spatial_coefficient_bound_ratio(order: int, xi_i: int, eta_i: int) -> float:
    """max_{l,alpha,beta} |C| / (1 + max(xi_i, eta_i))^(N/2).

    Stability of this ratio across index sweeps is the quantitative
    content of the coefficient bound.
    """
    terms = spatial_expansion(order, xi_i, eta_i)
    keys = {(t.ell, t.alpha, t.beta) for t in terms}
    denom = (1.0 + max(xi_i, eta_i)) ** (order / 2.0)
    best = 0.0
    for ell, alpha, beta in keys:
        c = abs(spatial_coefficient(terms, ell, alpha, beta, xi_i, eta_i))
        best = max(best, c / denom)
    return best


def verify_spatial_identity(
    g: Symbol,
    xi: MultiIndex,
    eta: MultiIndex,
    i: int,
    order: int,
    rule: TensorRule,
) -> float:
    """Error between both sides of the spatial identity.

    ``g`` must carry analytic x-derivatives up to order N along axis i;
    integrals are evaluated with the supplied Gauss rule.  The error is
    measured against the largest absolute quadrature mass among the
    participating integrals, so index pairs whose integrals vanish by
    parity still test the cancellation at an honest scale.
    """
    xi = tuple(xi)
    eta = tuple(eta)
    pts = rule.points
    w = rule.lebesgue_weights
    base_values = (np.asarray(g.value(pts))
                   * eval_hermite_nd(xi, pts) * eval_hermite_nd(eta, pts))
    gap_power = (2.0 ** order) * float(xi[i] - eta[i]) ** order
    lhs = gap_power * complex(np.sum(w * base_values))
    mass = abs(gap_power) * float(np.sum(w * np.abs(base_values)))
    rhs = 0.0 + 0.0j
    for term in spatial_expansion(order, xi[i], eta[i]):
        c = term.coefficient(xi[i], eta[i])
        nu = tuple(term.ell if ax == i else 0 for ax in range(len(xi)))
        dg = np.asarray(g.x_derivative(nu, pts))
        values = dg * eval_hermite_nd(_shift(xi, i, term.alpha), pts) \
            * eval_hermite_nd(_shift(eta, i, term.beta), pts)
        rhs += c * complex(np.sum(w * values))
        mass = max(mass, abs(c) * float(np.sum(w * np.abs(values))))
    return abs(lhs - rhs) / max(mass, 1e-12)


def _second_derivative(i: int, xi: MultiIndex, pts: np.ndarray) -> np.ndarray:
    """d_i^2 h_xi by composing the ladder first-derivative rule."""
    a = half_ladder_coefficient
    k = xi[i]
    down2 = a(k) * a(k - 1)
    mid = -(a(k) ** 2 + a(k + 1) ** 2)
    up2 = a(k + 1) * a(k + 2)
    out = mid * eval_hermite_nd(xi, pts)
    if down2:
        out = out + down2 * eval_hermite_nd(_shift(xi, i, -2), pts)
    out = out + up2 * eval_hermite_nd(_shift(xi, i, 2), pts)
    return out


def verify_lagrange(
    xi: MultiIndex,
    eta: MultiIndex,
    i: int,
    g: Symbol,
    rule: TensorRule,
    alpha: int = 0,
    beta: int = 0,
) -> tuple[float, float]:
    """Errors of the oscillator Lagrange identity, two ways.

    First the pointwise core, 2 (xi_i - eta_i) h_xi h_eta equal to the
    antisymmetrized second-derivative combination, on the rule's nodes.
    Then the integrated single-step identity with shifted factors
    u = h_{xi + alpha e_i}, v = h_{eta + beta e_i}:

        2 (xi_i - eta_i) int g u v
          = int d_i g (d_i u v - u d_i v) + 2 (beta - alpha) int g u v.
    """
    xi = tuple(xi)
    eta = tuple(eta)
    pts = rule.points
    h_xi = eval_hermite_nd(xi, pts)
    h_eta = eval_hermite_nd(eta, pts)
    lhs_point = 2.0 * (xi[i] - eta[i]) * h_xi * h_eta
    rhs_point = h_xi * _second_derivative(i, eta, pts) - h_eta * _second_derivative(i, xi, pts)
    pointwise = _sup_relative(lhs_point, rhs_point)

    u_idx = _shift(xi, i, alpha)
    v_idx = _shift(eta, i, beta)
    u = eval_hermite_nd(u_idx, pts)
    v = eval_hermite_nd(v_idx, pts)
    du = eval_hermite_derivative(i, u_idx, pts)
    dv = eval_hermite_derivative(i, v_idx, pts)
    gv = np.asarray(g.value(pts))
    nu = tuple(1 if ax == i else 0 for ax in range(len(xi)))
    dgv = np.asarray(g.x_derivative(nu, pts))
    w = rule.lebesgue_weights
    base = complex(np.sum(w * gv * u * v))
    flux = dgv * (du * v - u * dv)
    lhs_int = 2.0 * (xi[i] - eta[i]) * base
    rhs_int = complex(np.sum(w * flux)) + 2.0 * (beta - alpha) * base
    mass = max(
        2.0 * abs(xi[i] - eta[i]) * float(np.sum(w * np.abs(gv * u * v))),
        float(np.sum(w * np.abs(flux))),
        1e-12,
    )
    integrated = abs(lhs_int - rhs_int) / mass
    return pointwise, integrated


def almost_orthogonality_entry(
    sigma: Symbol,
    j: int,
    k: int,
    xi: MultiIndex,
    eta: MultiIndex,
    rule: TensorRule,
) -> complex:
    """Gram entry <sigma_j(., xi) h_xi, sigma_k(., eta) h_eta>.

    The block symbols are sigma cut by the eigenvalue bumps; entries
    with either bump zero vanish without touching the quadrature.
    """
    xi = tuple(xi)
    eta = tuple(eta)
    bj = littlewood_paley_bump(j, xi)
    bk = littlewood_paley_bump(k, eta)
    if bj == 0.0 or bk == 0.0:
        return 0.0 + 0.0j
    pts = rule.points
    left = np.asarray(sigma.value(pts, xi)) * eval_hermite_nd(xi, pts)
    right = np.asarray(sigma.value(pts, eta)) * eval_hermite_nd(eta, pts)
    return bj * bk * complex(np.sum(rule.lebesgue_weights * left * np.conj(right)))
