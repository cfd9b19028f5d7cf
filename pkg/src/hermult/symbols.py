"""Symbols, frequency finite differences, and the dyadic eigenvalue bump.

A symbol is a function sigma(x, xi) of a spatial point and a multi-index.
The package treats symbols as immutable records carrying, besides the
evaluation map, optional analytic x-derivatives and the declared class
parameters (m, rho, delta) of the power-bound family

    |d_x^nu  D_xi^kappa  sigma(x, xi)|
        <= C * (1 + |xi|)^(m/2 - rho |kappa| + (delta/2) |nu|),

where D is the forward difference in xi.  ``seminorm_report`` fits the
constants of that display over a documented finite grid; they are lower
bounds for the true suprema and are used only for uniformity checks.

The dyadic bump is built from the classical exp(-1/s) cutoff: psi == 1
on (-inf, 1/2], 0 on [1, inf), smooth in between, and

    phi(lam) = psi(lam) - psi(2 lam),       supp phi in [1/4, 1],
    phi_j(xi) = phi(2^-j sqrt(2|xi| + n)),

so that sum_j phi(2^-j lam) telescopes to 1 for lam >= 1/2.  Since the
oscillator eigenvalue 2|xi| + n is at least 1, the family {phi_j} is a
partition of unity on every multi-index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from hermult.hermite import MultiIndex, shell_bounds

__all__ = [
    "Symbol",
    "SymbolClassReport",
    "builtin_symbol",
    "REGISTRY_KEYS",
    "finite_difference",
    "smooth_step",
    "dyadic_bump",
    "littlewood_paley_bump",
    "bump_by_degree",
    "bump_difference_bound",
    "seminorm_report",
    "gaussian_window",
    "monomial_gaussian",
    "sine_gaussian",
]


@dataclass(frozen=True)
class Symbol:
    """An immutable symbol record.

    ``value(x, xi)`` evaluates at points ``x`` of shape (..., n) and a
    single multi-index, returning an array of shape ``x.shape[:-1]``
    (scalar for a single point).  ``x_derivative(nu, x, xi)``, when
    present, is the analytic derivative of x-multi-order ``nu``; order
    zero must coincide with ``value``.

    ``radial`` marks symbols that depend on xi only through the total
    degree; ``degree_profile(x, degrees)`` then evaluates the symbol at
    one point for a whole vector of total degrees at once, which the
    kernel-norm fast paths rely on.
    """

    name: str
    order: float
    rho: float
    delta: float
    value: Callable[[np.ndarray, Sequence[int]], np.ndarray]
    x_derivative: Callable[[Sequence[int], np.ndarray, Sequence[int]], np.ndarray] | None = None
    x_independent: bool = False
    radial: bool = False
    degree_profile: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def class_params(self) -> tuple[float, float, float]:
        return (self.order, self.rho, self.delta)


def _lead(x: np.ndarray) -> tuple:
    return x.shape[:-1]


def _as_points(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def _bracket(xi: Sequence[int]) -> float:
    """Japanese bracket of a multi-index: 1 + |xi|."""
    return 1.0 + float(sum(xi))


def _physicists_hermite(k: int, z: np.ndarray) -> np.ndarray:
    """H_k(z) by the 2z H_k - 2k H_{k-1} recurrence; complex-safe."""
    prev = np.ones_like(z)
    if k == 0:
        return prev
    cur = 2.0 * z
    for r in range(1, k):
        prev, cur = cur, 2.0 * z * cur - 2.0 * r * prev
    return cur


def _gaussian_derivative(nu: Sequence[int], x: np.ndarray) -> np.ndarray:
    """d^nu of exp(-|x|^2): product of (-1)^k H_k(x_i) factors."""
    out = np.exp(-np.sum(x * x, axis=-1))
    for i, k in enumerate(nu):
        if k:
            out = out * ((-1.0) ** k) * _physicists_hermite(k, x[..., i])
    return out


REGISTRY_KEYS = (
    "identity",
    "power",
    "gaussian_x",
    "oscillatory",
    "rough_x",
    "sobolev_x",
)


def builtin_symbol(name: str, **params) -> Symbol:
    """Construct a registry symbol.

    Keys and parameters:

    * ``identity``: sigma == 1.
    * ``power`` (m): sigma = (1+|xi|)^(m/2), x-independent multiplier.
    * ``gaussian_x``: sigma = exp(-|x|^2), pure multiplication operator.
    * ``oscillatory`` (delta): sigma = exp(i x_1 (1+|xi|)^(delta/2))
      exp(-|x|^2 / 4).  The width-2 Gaussian envelope is this package's
      witness choice; it is wide enough that the dyadic block operator
      norms stay level across shells while keeping rapid decay in x.
      Analytic x-derivatives come from the complex-shifted Hermite
      formula.
    * ``rough_x`` (m): sigma = (-1)^(sum_i floor(x_i)) (1+|xi|)^(m/2);
      deterministic unit-cell sign pattern, no x-derivatives.
    * ``sobolev_x``: sigma = exp(-|x|^2) times the constant xi-factor 1.
    """
    if name == "identity":

        def value(x, xi):
            x, single = _as_points(x)
            out = np.ones(_lead(x))
            return float(out[0]) if single else out

        def deriv(nu, x, xi):
            x, single = _as_points(x)
            out = np.ones(_lead(x)) if not any(nu) else np.zeros(_lead(x))
            return float(out[0]) if single else out

        return Symbol("identity", 0.0, 1.0, 0.0, value, deriv,
                      x_independent=True, radial=True,
                      degree_profile=lambda x, d: np.ones(len(d)))

    if name == "power":
        m = float(params["m"])

        def value(x, xi, m=m):
            x, single = _as_points(x)
            out = np.full(_lead(x), _bracket(xi) ** (0.5 * m))
            return float(out[0]) if single else out

        def deriv(nu, x, xi, m=m):
            x, single = _as_points(x)
            if any(nu):
                out = np.zeros(_lead(x))
            else:
                out = np.full(_lead(x), _bracket(xi) ** (0.5 * m))
            return float(out[0]) if single else out

        def profile(x, degrees, m=m):
            return (1.0 + np.asarray(degrees, dtype=float)) ** (0.5 * m)

        return Symbol("power", m, 1.0, 0.0, value, deriv,
                      x_independent=True, radial=True,
                      degree_profile=profile, params={"m": m})

    if name in ("gaussian_x", "sobolev_x"):

        def value(x, xi):
            x, single = _as_points(x)
            out = np.exp(-np.sum(x * x, axis=-1))
            return float(out[0]) if single else out

        def deriv(nu, x, xi):
            x, single = _as_points(x)
            out = _gaussian_derivative(nu, x)
            return float(out[0]) if single else out

        def profile(x, degrees):
            x = np.asarray(x, dtype=float)
            return np.full(len(degrees), math.exp(-float(np.sum(x * x))))

        return Symbol(name, 0.0, 1.0, 0.0, value, deriv,
                      x_independent=False, radial=True,
                      degree_profile=profile)

    if name == "oscillatory":
        delta = float(params["delta"])

        def phase_speed(xi_or_degree, delta=delta):
            if np.isscalar(xi_or_degree):
                return (1.0 + float(xi_or_degree)) ** (0.5 * delta)
            return _bracket(xi_or_degree) ** (0.5 * delta)

        def value(x, xi, delta=delta):
            x, single = _as_points(x)
            c = phase_speed(xi)
            out = np.exp(1j * c * x[..., 0]
                         - 0.25 * np.sum(x * x, axis=-1))
            return complex(out[0]) if single else out

        def deriv(nu, x, xi, delta=delta):
            # Along the oscillation axis, e^{ict} e^{-t^2/4} is a shifted
            # Gaussian in t/2:
            #   d^k/dt^k = 2^{-k} (-1)^k H_k(t/2 - ic) e^{ict} e^{-t^2/4}.
            x, single = _as_points(x)
            c = phase_speed(xi)
            t = x[..., 0]
            k = nu[0]
            out = np.exp(1j * c * t - 0.25 * np.sum(x * x, axis=-1))
            if k:
                out = out * ((-0.5) ** k) * _physicists_hermite(
                    k, 0.5 * t - 1j * c
                )
            for i, ki in enumerate(nu):
                if i == 0 or not ki:
                    continue
                out = out * ((-0.5) ** ki) * _physicists_hermite(
                    ki, 0.5 * x[..., i]
                )
            return complex(out[0]) if single else out

        def profile(x, degrees, delta=delta):
            x = np.asarray(x, dtype=float)
            c = (1.0 + np.asarray(degrees, dtype=float)) ** (0.5 * delta)
            return np.exp(1j * c * x[0]) * math.exp(
                -0.25 * float(np.sum(x * x))
            )

        return Symbol("oscillatory", 0.0, 1.0, delta, value, deriv,
                      radial=True, degree_profile=profile,
                      params={"delta": delta})

    if name == "rough_x":
        m = float(params["m"])

        def value(x, xi, m=m):
            x, single = _as_points(x)
            signs = 1.0 - 2.0 * (np.sum(np.floor(x), axis=-1) % 2)
            out = signs * _bracket(xi) ** (0.5 * m)
            return float(out[0]) if single else out

        def profile(x, degrees, m=m):
            x = np.asarray(x, dtype=float)
            sign = 1.0 - 2.0 * (float(np.sum(np.floor(x))) % 2)
            return sign * (1.0 + np.asarray(degrees, dtype=float)) ** (0.5 * m)

        return Symbol("rough_x", m, 1.0, 0.0, value, None,
                      radial=True, degree_profile=profile, params={"m": m})

    raise KeyError(f"unknown symbol {name!r}; choose from {REGISTRY_KEYS}")


def gaussian_window(dim: int = 1) -> Symbol:
    """exp(-|x|^2) as a xi-independent test function with derivatives."""
    base = builtin_symbol("gaussian_x")

    def value(x, xi=None, base=base):
        return base.value(x, (0,) * dim)

    def deriv(nu, x, xi=None, base=base):
        return base.x_derivative(nu, x, (0,) * dim)

    return Symbol("gaussian_window", 0.0, 1.0, 0.0, value, deriv)


def _monomial_gaussian_axis(power: int, k: int, t: np.ndarray) -> np.ndarray:
    """d^k/dt^k of t^power exp(-t^2), by the Leibniz rule."""
    gauss = np.exp(-t * t)
    total = np.zeros_like(t)
    for r in range(min(k, power) + 1):
        poly = math.comb(k, r) * math.perm(power, r) * t ** (power - r)
        total = total + poly * ((-1.0) ** (k - r)) * _physicists_hermite(
            k - r, t
        )
    return total * gauss


def monomial_gaussian(powers: Sequence[int]) -> Symbol:
    """x^powers exp(-|x|^2), e.g. powers=(2, 0) gives x_1^2 exp(-|x|^2)."""
    powers = tuple(int(p) for p in powers)
    if any(p < 0 for p in powers):
        raise ValueError("powers must be nonnegative")

    def value(x, xi=None, powers=powers):
        x, single = _as_points(x)
        out = np.exp(-np.sum(x * x, axis=-1))
        for i, p in enumerate(powers):
            if p:
                out = out * x[..., i] ** p
        return float(out[0]) if single else out

    def deriv(nu, x, xi=None, powers=powers):
        x, single = _as_points(x)
        out = np.ones(_lead(x))
        for i, p in enumerate(powers):
            out = out * _monomial_gaussian_axis(p, nu[i], x[..., i])
        return float(out[0]) if single else out

    return Symbol("monomial_gaussian", 0.0, 1.0, 0.0, value, deriv,
                  params={"powers": powers})


def sine_gaussian(freq: float, axis: int = 0, dim: int = 1) -> Symbol:
    """sin(freq x_axis) exp(-|x|^2); derivatives via the imaginary part
    of the complex-shifted Gaussian formula (x is real here)."""
    freq = float(freq)

    def value(x, xi=None):
        x, single = _as_points(x)
        out = np.sin(freq * x[..., axis]) * np.exp(-np.sum(x * x, axis=-1))
        return float(out[0]) if single else out

    def deriv(nu, x, xi=None):
        x, single = _as_points(x)
        t = x[..., axis]
        k = nu[axis]
        osc = np.exp(1j * freq * t - t * t)
        if k:
            osc = osc * ((-1.0) ** k) * _physicists_hermite(
                k, t - 0.5j * freq
            )
        out = np.imag(osc)
        for i, ki in enumerate(nu):
            if i == axis:
                continue
            factor = np.exp(-x[..., i] ** 2)
            if ki:
                factor = factor * ((-1.0) ** ki) * _physicists_hermite(
                    ki, x[..., i]
                )
            out = out * factor
        return float(out[0]) if single else out

    return Symbol("sine_gaussian", 0.0, 1.0, 0.0, value, deriv,
                  params={"freq": freq, "axis": axis})


def finite_difference(sigma: Symbol, kappa: Sequence[int], x, xi: Sequence[int]):
    """Iterated forward difference D^kappa sigma at (x, xi).

    Evaluated as the alternating binomial sum
    sum_r (-1)^(|kappa| - |r|) C(kappa, r) sigma(x, xi + r); axes
    commute exactly because the sum is symmetric in the axis order.
    """
    kappa = tuple(int(k) for k in kappa)
    if any(k < 0 for k in kappa):
        raise ValueError("difference orders must be nonnegative")
    xi = tuple(xi)
    total = None
    ranges = [range(k + 1) for k in kappa]
    import itertools

    for r in itertools.product(*ranges):
        coeff = (-1.0) ** (sum(kappa) - sum(r))
        for k_i, r_i in zip(kappa, r):
            coeff *= math.comb(k_i, r_i)
        shifted = tuple(a + b for a, b in zip(xi, r))
        term = coeff * np.asarray(sigma.value(x, shifted))
        total = term if total is None else total + term
    return total


def smooth_step(lam) -> np.ndarray:
    """psi(lam): 1 on (-inf, 1/2], 0 on [1, inf), exp(-1/s) glue between."""
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    t = 2.0 * lam - 1.0
    out = np.empty_like(lam)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[hi] = 0.0
    if mid.any():
        tm = t[mid]
        with np.errstate(under="ignore"):
            rising = np.exp(-1.0 / tm)
            falling = np.exp(-1.0 / (1.0 - tm))
        out[mid] = falling / (rising + falling)
    return float(out[0]) if scalar else out


def dyadic_bump(lam) -> np.ndarray:
    """phi(lam) = psi(lam) - psi(2 lam), supported in [1/4, 1]."""
    return smooth_step(lam) - smooth_step(2.0 * np.asarray(lam, dtype=float))


def littlewood_paley_bump(j: int, xi: Sequence[int], dim: int | None = None) -> float:
    """phi_j(xi) = phi(2^-j sqrt(2|xi| + n)) for a single multi-index."""
    if j < 0:
        raise ValueError("block index must be >= 0")
    n = len(xi) if dim is None else dim
    lam = math.sqrt(2.0 * sum(xi) + n)
    return float(dyadic_bump(lam * 2.0 ** (-j)))


def bump_by_degree(j: int, degrees, dim: int) -> np.ndarray:
    """Vectorized phi_j over total degrees (all indices of equal degree
    share the bump value, since it sees xi only through 2|xi| + n)."""
    if j < 0:
        raise ValueError("block index must be >= 0")
    d = np.asarray(degrees, dtype=float)
    lam = np.sqrt(2.0 * d + dim)
    return np.asarray(dyadic_bump(lam * 2.0 ** (-j)), dtype=float)


def _degree_difference(values: np.ndarray, ell: int) -> np.ndarray:
    """ell-th forward difference along a degree-indexed value table."""
    out = values
    for _ in range(ell):
        out = out[1:] - out[:-1]
    return out


def bump_difference_bound(
    ell: int,
    j: int,
    smoothness: int,
    degrees=None,
    dim: int = 1,
) -> float:
    """Fitted constant of the bump finite-difference bound.

    Returns sup over the degree grid of

        |D^ell phi_j(xi)| / (2^(-j N) (1+|xi|)^(N/2 - ell)),

    with N = ``smoothness`` >= ell.  Across j this should stay bounded
    (the bump is smooth and the shells scale dyadically); callers assert
    uniformity, not a specific value.
    """
    if not 1 <= ell <= smoothness:
        raise ValueError("need smoothness >= ell >= 1")
    if degrees is None:
        hi = shell_bounds(j, dim)[1]
        degrees = range(0, int(math.floor(hi)) + ell + 2)
    degrees = np.asarray(list(degrees), dtype=np.int64)
    top = int(degrees.max()) + ell
    table = bump_by_degree(j, np.arange(top + 1), dim)
    diffs = _degree_difference(table, ell)[degrees]
    bracket = 1.0 + degrees.astype(float)
    scale = 2.0 ** (-j * smoothness) * bracket ** (0.5 * smoothness - ell)
    return float(np.max(np.abs(diffs) / scale))


@dataclass(frozen=True)
class SymbolClassReport:
    """Fitted seminorm constants over a documented finite grid.

    ``constants[(nu, kappa)]`` is the sup over the grid of the
    derivative/difference magnitude against the class normalizer.  The
    grid (xi list and number of x sample points) is recorded so reports
    are comparable; values are lower bounds for the true suprema.
    """

    symbol: str
    class_params: tuple[float, float, float]
    constants: dict[tuple[MultiIndex, MultiIndex], float]
    xi_count: int
    x_count: int

    def max_constant(self) -> float:
        return max(self.constants.values())


def _multi_orders(dim: int, max_total: int):
    """All multi-indices on `dim` axes with total <= max_total."""
    from hermult.hermite import BasisSpec

    return BasisSpec(dim, max_total).indices


def seminorm_report(
    sigma: Symbol,
    max_difference: int,
    max_derivative: int,
    xi_list: Sequence[MultiIndex],
    x_points=None,
) -> SymbolClassReport:
    """Fit the symbol-class constants C_{nu,kappa} over a finite grid.

    Differences up to total order ``max_difference`` and derivatives up
    to ``max_derivative`` (requires the symbol's analytic derivatives
    when > 0).  ``x_points`` defaults to a small Gauss-Hermite cloud
    plus the origin; x-independent symbols are sampled at one point.
    """
    xi_list = [tuple(xi) for xi in xi_list]
    if not xi_list:
        raise ValueError("xi grid must be nonempty")
    dim = len(xi_list[0])
    if max_derivative > 0 and sigma.x_derivative is None:
        raise ValueError(
            f"symbol {sigma.name!r} has no analytic x-derivatives"
        )
    if x_points is None:
        if sigma.x_independent:
            x_points = np.zeros((1, dim))
        else:
            from hermult.quadrature import tensor_rule

            per_axis = 9 if dim == 1 else 5
            pts = tensor_rule(dim, per_axis).points
            x_points = np.vstack([pts, np.zeros((1, dim))])
    x_points = np.asarray(x_points, dtype=float)

    m, rho, delta = sigma.class_params
    constants: dict[tuple[MultiIndex, MultiIndex], float] = {}
    for nu in _multi_orders(dim, max_derivative):
        for kappa in _multi_orders(dim, max_difference):
            worst = 0.0
            for xi in xi_list:
                if any(nu):
                    def probe(x, s, nu=nu):
                        return sigma.x_derivative(nu, x, s)

                    probe_symbol = Symbol(
                        sigma.name, m, rho, delta, probe
                    )
                else:
                    probe_symbol = sigma
                vals = finite_difference(probe_symbol, kappa, x_points, xi)
                denom = _bracket(xi) ** (
                    0.5 * m - rho * sum(kappa) + 0.5 * delta * sum(nu)
                )
                worst = max(worst, float(np.max(np.abs(vals))) / denom)
            constants[(nu, kappa)] = worst
    return SymbolClassReport(
        symbol=sigma.name,
        class_params=sigma.class_params,
        constants=constants,
        xi_count=len(xi_list),
        x_count=x_points.shape[0],
    )
