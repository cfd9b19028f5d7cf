"""Gauss-Hermite quadrature and the inner products built on it.

Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix
(zero diagonal, off-diagonal sqrt(k/2)), computed by LAPACK and then
symmetrized so the rule is exactly antisymmetric about the origin.

Weights are recovered through the Christoffel function instead of the
squared first eigenvector component: with the orthonormal Hermite
*functions* ``h_m`` of :mod:`hermult.hermite`,

    lebesgue_weight_k = 1 / sum_{m < q} h_m(x_k)^2,

which equals the classical weight times ``exp(x_k^2)``.  This is the
quantity actually needed to integrate Hermite-type integrands against
Lebesgue measure, and unlike the classical weight it never underflows:
for large ``q`` the extreme nodes sit near ``|x| ~ sqrt(2q)`` where
``exp(-x^2)`` alone is far below float64 range.  The classical weights
are derived from it and simply flush to zero out there, losing nothing
representable.

Two inner products cover the package's two pictures:

* ``inner_product``: Lebesgue L2, for Hermite functions,
* ``gaussian_inner_product``: L2 of the Gaussian probability measure
  ``pi^(-n/2) exp(-|x|^2) dx``, for Hermite polynomials.

A rule with ``q`` nodes integrates ``p(x) exp(-x^2)`` exactly for
polynomials ``p`` up to degree ``2q - 1``, so products of Hermite
functions of degrees ``a`` and ``b`` need ``a + b <= 2q - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from hermult.hermite import hermite_table

__all__ = [
    "MAX_NODES",
    "QuadratureRule1D",
    "TensorRule",
    "gauss_hermite",
    "tensor_rule",
    "inner_product",
    "gaussian_inner_product",
]

MAX_NODES = 4096


@dataclass(frozen=True)
class QuadratureRule1D:
    """A symmetric Gauss-Hermite rule.

    Attributes
    ----------
    nodes : ndarray, shape (q,)
        Strictly increasing, exactly antisymmetric; odd q has a node at
        exactly 0.0.
    weights : ndarray, shape (q,)
        Classical weights for integrands written as f(x) exp(-x^2).
        Zero (underflowed) at extreme nodes of large rules.
    lebesgue_weights : ndarray, shape (q,)
        weights * exp(nodes^2), computed directly; always finite and
        positive.  Use these with integrands that already carry their
        own Gaussian-type decay, e.g. pairs of Hermite functions.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lebesgue_weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.shape[0]

    def check(self) -> None:
        """Validate symmetry and total mass; raises AssertionError."""
        x = self.nodes
        assert np.all(np.diff(x) > 0), "nodes must increase"
        assert np.array_equal(x, -x[::-1]), "nodes must be antisymmetric"
        assert np.all(self.lebesgue_weights > 0)
        with np.errstate(under="ignore"):
            mass = float(np.sum(self.lebesgue_weights * np.exp(-x * x)))
        assert abs(mass - math.sqrt(math.pi)) < 1e-12 * math.sqrt(math.pi)


@lru_cache(maxsize=64)
def gauss_hermite(q: int) -> QuadratureRule1D:
    """Build (and cache) the q-node Gauss-Hermite rule, q <= 4096."""
    if not 1 <= q <= MAX_NODES:
        raise ValueError(f"node count must be in [1, {MAX_NODES}], got {q}")
    if q == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, q) / 2.0)
        nodes = eigvalsh_tridiagonal(np.zeros(q), off)
        nodes = 0.5 * (nodes - nodes[::-1])
    table = hermite_table(q - 1, nodes)
    lebesgue = 1.0 / np.einsum("kp,kp->p", table, table)
    with np.errstate(under="ignore"):
        weights = lebesgue * np.exp(-nodes * nodes)
    for arr in (nodes, weights, lebesgue):
        arr.setflags(write=False)
    return QuadratureRule1D(nodes, weights, lebesgue)


@dataclass(frozen=True)
class TensorRule:
    """Tensor product of one 1-d rule per axis (same order on each)."""

    dim: int
    points: np.ndarray  # (p, dim)
    weights: np.ndarray  # (p,)
    lebesgue_weights: np.ndarray  # (p,)

    @property
    def order(self) -> int:
        return round(self.points.shape[0] ** (1.0 / self.dim))


def tensor_rule(dim: int, q: int) -> TensorRule:
    """Tensor Gauss-Hermite rule on R^dim with q nodes per axis."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if q ** dim > 2 ** 24:
        raise ValueError(f"tensor rule with {q}^{dim} points is too large")
    base = gauss_hermite(q)
    grids = np.meshgrid(*([base.nodes] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    leb = np.ones(1)
    w = np.ones(1)
    with np.errstate(under="ignore"):
        for _ in range(dim):
            leb = np.multiply.outer(leb, base.lebesgue_weights).ravel()
            w = np.multiply.outer(w, base.weights).ravel()
    for arr in (points, w, leb):
        arr.setflags(write=False)
    return TensorRule(dim, points, w, leb)


def inner_product(f: np.ndarray, g: np.ndarray, rule) -> complex:
    """Lebesgue inner product <f, g> = integral of f conj(g).

    ``f`` and ``g`` are value arrays sampled at the rule's nodes (1-d
    rule) or points (tensor rule).
    """
    w = rule.lebesgue_weights
    return np.sum(w * np.asarray(f) * np.conj(np.asarray(g)))


def gaussian_inner_product(f: np.ndarray, g: np.ndarray, rule) -> complex:
    """Inner product in L2 of the Gaussian probability measure.

    Computes pi^(-n/2) * sum w_k f(x_k) conj(g(x_k)) with the classical
    weights, i.e. the integral of f conj(g) against the measure
    pi^(-n/2) exp(-|x|^2) dx.  Intended for Hermite polynomials and
    other integrands without built-in decay, at moderate node counts.
    """
    dim = getattr(rule, "dim", 1)
    w = rule.weights
    scale = math.pi ** (-0.5 * dim)
    return scale * np.sum(w * np.asarray(f) * np.conj(np.asarray(g)))
