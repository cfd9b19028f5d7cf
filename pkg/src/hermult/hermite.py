"""Hermite functions, multi-index bookkeeping, and ladder calculus.

Conventions used throughout the package:

* ``h_k`` is the L2-normalized Hermite function on the real line,

      h_k(t) = (2^k k! sqrt(pi))^(-1/2) H_k(t) exp(-t^2/2),

  with ``H_k`` the physicists' Hermite polynomial.  The three-term
  recurrence in this normalization is

      h_{k+1}(t) = sqrt(2/(k+1)) t h_k(t) - sqrt(k/(k+1)) h_{k-1}(t),

  seeded by ``h_0 = pi^(-1/4) exp(-t^2/2)`` and ``h_1 = sqrt(2) t h_0``.

* In ``n`` variables, ``h_xi = prod_i h_{xi_i}(x_i)`` for a multi-index
  ``xi`` (a plain tuple of ints here).  Any negative component means the
  function is identically zero; evaluation helpers honor that so ladder
  formulas can be written without boundary cases.

* The ladder maps follow the raising/lowering normalization

      (x_i - d/dx_i) h_xi = sqrt(2 xi_i + 2) h_{xi + e_i},
      (x_i + d/dx_i) h_xi = sqrt(2 xi_i)     h_{xi - e_i},

  and the coordinate and derivative actions decompose as

      2 x_i h_xi   = sqrt(2 xi_i + 2) h_{xi+e_i} + sqrt(2 xi_i) h_{xi-e_i},
      d/dx_i h_xi  = a(xi_i) h_{xi-e_i} - a(xi_i + 1) h_{xi+e_i},

  with ``a(k) = sqrt(k/2)``.

Table evaluation carries a power-of-two exponent next to the mantissa.
The Gaussian seed ``exp(-t^2/2)`` underflows in float64 once ``|t|``
passes about 38.6, yet ``h_k(t)`` for ``k`` near ``t^2/2`` is of
order one over a mild power of ``k``; running the recurrence on the raw
seed would zero out every degree at such nodes.  The scaled recurrence
keeps ``h_k(t) = m * 2^E`` with the integer ``E`` shared by the two live
registers and rescales whenever the mantissa drifts past ``2^(+-600)``,
so emitted values are exact to rounding wherever they are representable
and flush to zero only where the true value is below float64 range.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MultiIndex",
    "half_ladder_coefficient",
    "ladder_raise_coefficient",
    "ladder_lower_coefficient",
    "oscillator_eigenvalue",
    "hermite_table",
    "hermite_polynomial_table",
    "eval_hermite_1d",
    "eval_hermite_nd",
    "eval_hermite_derivative",
    "BasisSpec",
    "HermiteExpansion",
    "basis_vector",
    "apply_annihilation",
    "apply_creation",
    "multiply_by_coordinate",
    "apply_derivative",
    "shell_bounds",
    "shell_degrees",
    "enumerate_shell",
]

MultiIndex = tuple[int, ...]

_SEED_0 = math.pi ** -0.25
_LOG2 = math.log(2.0)
_RESCALE_EXP = 600
_RESCALE_UP = 2.0 ** _RESCALE_EXP
_RESCALE_DOWN = 2.0 ** -_RESCALE_EXP


def half_ladder_coefficient(k: int) -> float:
    """a(k) = sqrt(k/2), the half-ladder coefficient; a(0) = 0 exactly."""
    if k <= 0:
        return 0.0
    return math.sqrt(0.5 * k)


def ladder_raise_coefficient(k: int) -> float:
    """Coefficient sqrt(2k + 2) produced by the raising map on degree k."""
    return math.sqrt(2.0 * k + 2.0)


def ladder_lower_coefficient(k: int) -> float:
    """Coefficient sqrt(2k) produced by the lowering map; 0 at k = 0."""
    if k <= 0:
        return 0.0
    return math.sqrt(2.0 * k)


def oscillator_eigenvalue(xi: Sequence[int]) -> int:
    """Eigenvalue 2|xi| + n of the Hermite operator on ``h_xi``."""
    return 2 * sum(xi) + len(xi)


def _scaled_rows(k_max: int, t: np.ndarray, weighted: bool) -> np.ndarray:
    """Run the three-term recurrence with a carried power-of-two exponent.

    Parameters
    ----------
    k_max : int
        Highest degree to tabulate.
    t : ndarray, shape (p,)
        Evaluation nodes.
    weighted : bool
        True seeds the Hermite *functions* (Gaussian included), False the
        orthonormalized Hermite *polynomials* (seed 1, sqrt(2) t).

    Returns
    -------
    ndarray, shape (k_max + 1, p)
        Row k holds degree-k values at every node.  Polynomial rows can
        overflow to inf at extreme nodes; function rows cannot.
    """
    p = t.shape[0]
    out = np.empty((k_max + 1, p))
    if weighted:
        log2_seed = -(t * t) / (2.0 * _LOG2)
        exp = np.floor(log2_seed)
        m_prev = _SEED_0 * np.exp2(log2_seed - exp)
        exp = exp.astype(np.int64)
    else:
        m_prev = np.ones(p)
        exp = np.zeros(p, dtype=np.int64)
    with np.errstate(over="ignore", under="ignore"):
        out[0] = np.ldexp(m_prev, exp)
        if k_max == 0:
            return out
        m_cur = math.sqrt(2.0) * t * m_prev
        out[1] = np.ldexp(m_cur, exp)
        for k in range(1, k_max):
            m_next = math.sqrt(2.0 / (k + 1)) * t * m_cur \
                - math.sqrt(k / (k + 1.0)) * m_prev
            m_prev, m_cur = m_cur, m_next
            mag = np.maximum(np.abs(m_cur), np.abs(m_prev))
            big = mag > _RESCALE_UP
            if big.any():
                m_cur[big] *= _RESCALE_DOWN
                m_prev[big] *= _RESCALE_DOWN
                exp[big] += _RESCALE_EXP
            small = (mag < _RESCALE_DOWN) & (mag > 0.0)
            if small.any():
                m_cur[small] *= _RESCALE_UP
                m_prev[small] *= _RESCALE_UP
                exp[small] -= _RESCALE_EXP
            out[k + 1] = np.ldexp(m_cur, exp)
    return out


def hermite_table(k_max: int, t: np.ndarray) -> np.ndarray:
    """Tabulate h_0 .. h_{k_max} at the 1-d nodes ``t``.

    Returns an array of shape ``(k_max + 1, len(t))``.  Stable at nodes
    far outside the classically allowed region; see the module notes.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return _scaled_rows(k_max, t, weighted=True)


def hermite_polynomial_table(k_max: int, t: np.ndarray) -> np.ndarray:
    """Tabulate the orthonormalized Hermite polynomials (no Gaussian).

    Same recurrence and shape as :func:`hermite_table` but seeded with
    1 and sqrt(2) t, so row k equals ``pi^(1/4) exp(t^2/2) h_k(t)``.
    Values at large ``|t|`` grow like ``exp(t^2/2)`` and will overflow
    to inf past float64 range; callers on the Gaussian-measure side are
    expected to keep nodes moderate.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return _scaled_rows(k_max, t, weighted=False)


def eval_hermite_1d(k: int, t):
    """Evaluate h_k at scalar or array ``t`` (returns float for scalar)."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    vals = hermite_table(k, arr.ravel())[k].reshape(arr.shape)
    return float(vals) if scalar else vals


def eval_hermite_nd(xi: Sequence[int], x) -> np.ndarray:
    """Evaluate the tensor Hermite function h_xi at points ``x``.

    Parameters
    ----------
    xi : sequence of int
        Multi-index; any negative component gives the zero function.
    x : array_like, shape (..., n)
        Points; the trailing axis is the coordinate axis.

    Returns
    -------
    ndarray of shape ``x.shape[:-1]`` (float scalar for a single point).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
        squeeze = True
    else:
        squeeze = False
    n = x.shape[-1]
    if len(xi) != n:
        raise ValueError(f"multi-index length {len(xi)} != dimension {n}")
    lead = x.shape[:-1]
    flat = x.reshape(-1, n)
    if any(k < 0 for k in xi):
        vals = np.zeros(flat.shape[0])
    else:
        vals = np.ones(flat.shape[0])
        for i, k in enumerate(xi):
            vals = vals * hermite_table(k, flat[:, i])[k]
    vals = vals.reshape(lead)
    return float(vals[0]) if squeeze else vals


def eval_hermite_derivative(i: int, xi: Sequence[int], x) -> np.ndarray:
    """Evaluate d/dx_i of h_xi at ``x`` via the two-term ladder form."""
    xi = tuple(xi)
    lo = _shift(xi, i, -1)
    hi = _shift(xi, i, +1)
    a_lo = half_ladder_coefficient(xi[i])
    a_hi = half_ladder_coefficient(xi[i] + 1)
    return a_lo * eval_hermite_nd(lo, x) - a_hi * eval_hermite_nd(hi, x)


def _shift(xi: MultiIndex, i: int, step: int) -> MultiIndex:
    out = list(xi)
    out[i] += step
    return tuple(out)


def _compositions(total: int, dim: int) -> Iterable[MultiIndex]:
    """Multi-indices of given total degree, first coordinate descending."""
    if dim == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, dim - 1):
            yield (head,) + tail


@dataclass(frozen=True)
class BasisSpec:
    """Finite Hermite basis: all multi-indices with |xi| <= max_degree.

    Indices are ordered by total degree, then lexicographically with the
    first coordinate descending, so the flat position of an index is a
    stable contract across the package (matrix rows, expansion slots,
    file formats all use it).
    """

    dim: int
    max_degree: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")

    @cached_property
    def indices(self) -> tuple[MultiIndex, ...]:
        return tuple(
            itertools.chain.from_iterable(
                _compositions(d, self.dim)
                for d in range(self.max_degree + 1)
            )
        )

    @cached_property
    def size(self) -> int:
        return len(self.indices)

    @cached_property
    def _positions(self) -> dict[MultiIndex, int]:
        return {xi: p for p, xi in enumerate(self.indices)}

    def position(self, xi: Sequence[int]) -> int:
        """Flat position of a multi-index; KeyError if out of range."""
        return self._positions[tuple(xi)]

    def __contains__(self, xi) -> bool:
        return tuple(xi) in self._positions

    @cached_property
    def degrees(self) -> np.ndarray:
        """Total degree |xi| per flat position, shape (size,)."""
        return np.array([sum(xi) for xi in self.indices], dtype=np.int64)


@dataclass
class HermiteExpansion:
    """Coefficient vector over a :class:`BasisSpec`.

    ``coefficients[p]`` multiplies ``h_xi`` for ``xi = spec.indices[p]``.
    Coefficients are stored complex; Parseval gives ``norm``.
    """

    spec: BasisSpec
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.spec.size,):
            raise ValueError(
                f"expected {self.spec.size} coefficients, got {c.shape}"
            )
        self.coefficients = c

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values at ``x`` of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        lead = x.shape[:-1]
        flat = x.reshape(-1, self.spec.dim)
        tables = [
            hermite_table(self.spec.max_degree, flat[:, i])
            for i in range(self.spec.dim)
        ]
        vals = np.zeros(flat.shape[0], dtype=complex)
        for p, xi in enumerate(self.spec.indices):
            c = self.coefficients[p]
            if c == 0:
                continue
            term = tables[0][xi[0]].astype(complex) * c
            for i in range(1, self.spec.dim):
                term = term * tables[i][xi[i]]
            vals += term
        vals = vals.reshape(lead)
        return complex(vals[0]) if single else vals

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def copy(self) -> "HermiteExpansion":
        return HermiteExpansion(self.spec, self.coefficients.copy())


def basis_vector(spec: BasisSpec, xi: Sequence[int]) -> HermiteExpansion:
    """The expansion equal to a single h_xi."""
    c = np.zeros(spec.size, dtype=complex)
    c[spec.position(xi)] = 1.0
    return HermiteExpansion(spec, c)


def apply_annihilation(i: int, f: HermiteExpansion) -> HermiteExpansion:
    """Raising map (x_i - d/dx_i): h_xi -> sqrt(2 xi_i + 2) h_{xi+e_i}.

    The name follows the operator calculus this package verifies, where
    (x - d/dx) is written A; note it raises the degree in the Hermite
    normalization used here.  The result lives on max_degree + 1.
    """
    spec = f.spec
    target = BasisSpec(spec.dim, spec.max_degree + 1)
    out = np.zeros(target.size, dtype=complex)
    for p, xi in enumerate(spec.indices):
        c = f.coefficients[p]
        if c == 0:
            continue
        out[target.position(_shift(xi, i, +1))] += (
            ladder_raise_coefficient(xi[i]) * c
        )
    return HermiteExpansion(target, out)


def apply_creation(i: int, f: HermiteExpansion) -> HermiteExpansion:
    """Lowering map (x_i + d/dx_i): h_xi -> sqrt(2 xi_i) h_{xi-e_i}.

    Written A* in the operator calculus.  Degree can only drop, so the
    result reuses the input spec.
    """
    spec = f.spec
    out = np.zeros(spec.size, dtype=complex)
    for p, xi in enumerate(spec.indices):
        c = f.coefficients[p]
        if c == 0 or xi[i] == 0:
            continue
        out[spec.position(_shift(xi, i, -1))] += (
            ladder_lower_coefficient(xi[i]) * c
        )
    return HermiteExpansion(spec, out)


def multiply_by_coordinate(i: int, f: HermiteExpansion) -> HermiteExpansion:
    """Multiply by x_i: the half-sum of the raising and lowering maps."""
    spec = f.spec
    target = BasisSpec(spec.dim, spec.max_degree + 1)
    out = np.zeros(target.size, dtype=complex)
    for p, xi in enumerate(spec.indices):
        c = f.coefficients[p]
        if c == 0:
            continue
        out[target.position(_shift(xi, i, +1))] += (
            0.5 * ladder_raise_coefficient(xi[i]) * c
        )
        if xi[i] > 0:
            out[target.position(_shift(xi, i, -1))] += (
                0.5 * ladder_lower_coefficient(xi[i]) * c
            )
    return HermiteExpansion(target, out)


def apply_derivative(i: int, f: HermiteExpansion) -> HermiteExpansion:
    """d/dx_i in coefficient space, image on max_degree + 1."""
    spec = f.spec
    target = BasisSpec(spec.dim, spec.max_degree + 1)
    out = np.zeros(target.size, dtype=complex)
    for p, xi in enumerate(spec.indices):
        c = f.coefficients[p]
        if c == 0:
            continue
        if xi[i] > 0:
            out[target.position(_shift(xi, i, -1))] += (
                half_ladder_coefficient(xi[i]) * c
            )
        out[target.position(_shift(xi, i, +1))] -= (
            half_ladder_coefficient(xi[i] + 1) * c
        )
    return HermiteExpansion(target, out)


def shell_bounds(j: int, n: int) -> tuple[float, float]:
    """Closed degree bounds of the j-th dyadic eigenvalue shell.

    The shell collects multi-indices whose eigenvalue 2|xi| + n lies in
    [4^(j-1)/4, 4^j], i.e. total degrees in

        [4^(j-2)/2 - n/2, 4^j/2 - n/2].

    Bounds are returned as floats; they need not be integers, and the
    shell is empty when the interval misses the nonnegative integers.
    """
    if j < 0:
        raise ValueError("shell index must be >= 0")
    lo = 0.5 * 4.0 ** (j - 2) - 0.5 * n
    hi = 0.5 * 4.0 ** j - 0.5 * n
    return lo, hi


def shell_degrees(j: int, n: int) -> range:
    """Integer total degrees inside the closed shell bounds."""
    lo, hi = shell_bounds(j, n)
    start = max(0, math.ceil(lo))
    stop = math.floor(hi)
    return range(start, stop + 1)


def enumerate_shell(j: int, n: int) -> list[MultiIndex]:
    """All multi-indices in the j-th shell, grouped by total degree.

    Sizes grow quickly with j in dimension >= 2; callers doing norm
    computations at large j should work degree-blocked instead.
    """
    out: list[MultiIndex] = []
    for d in shell_degrees(j, n):
        out.extend(_compositions(d, n))
    return out
