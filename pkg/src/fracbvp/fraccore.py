"""Fractional integrals, Caputo derivatives and the p-Laplacian map.

Everything here works on uniform grids ``t_i = i/N`` of ``[0, 1]``.  The
Riemann-Liouville integral uses product integration: the kernel
``(t - s)**(alpha - 1)`` is integrated exactly against the piecewise-linear
interpolant of the samples, so the rule is exact whenever ``y`` is
piecewise linear on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError, QuadratureError, ValidationError

__all__ = [
    "Order",
    "PExponent",
    "GridFunction",
    "FracPoly",
    "as_order",
    "phi",
    "phi_inverse",
    "gamma_fn",
    "rl_integral",
    "rl_integral_at",
    "power_kernel_weights",
    "caputo_power",
    "caputo_grid",
    "frac_poly_eval",
    "graded_quad",
    "sample",
]

GAMMA_MAX_ARG = 171.0


@dataclass(frozen=True)
class Order:
    """A fractional order together with ``n = ceil(value)``."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v <= 0.0:
            raise ValidationError(f"order must be a positive finite number, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def n(self) -> int:
        return math.ceil(self.value)

    def __float__(self) -> float:
        return self.value


def as_order(alpha: float | Order) -> Order:
    return alpha if isinstance(alpha, Order) else Order(alpha)


@dataclass(frozen=True)
class PExponent:
    """The exponent ``p > 1`` of the p-Laplacian and its conjugate ``q``."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise ValidationError(f"p must satisfy p > 1, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)


def _check_p(p: float) -> float:
    return PExponent(p).p


def phi(s, p: float):
    """``|s|**(p-2) * s``, written as ``sign(s)|s|**(p-1)`` so ``s = 0`` is safe for p < 2."""
    p = _check_p(p)
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("phi: argument must be finite")
    out = np.sign(arr) * np.abs(arr) ** (p - 1.0)
    return float(out) if out.ndim == 0 else out


def phi_inverse(s, p: float):
    """Inverse of ``phi(., p)``, which is ``phi(., q)`` with ``1/p + 1/q = 1``."""
    return phi(s, PExponent(p).q)


def gamma_fn(x: float) -> float:
    """Gamma function on ``(0, 171)``.

    Backed by :func:`math.gamma`, whose relative error on this interval is
    below 1e-15.
    """
    x = float(x)
    if not (0.0 < x < GAMMA_MAX_ARG):
        raise DomainError(f"gamma_fn defined on (0, {GAMMA_MAX_ARG:g}), got {x!r}")
    return math.gamma(x)


def _rgamma(x: float) -> float:
    # 1/Gamma, zero at the poles
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def sample(func: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``func`` on an array, falling back to a scalar loop."""
    x = np.asarray(x, dtype=float)
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(func(x), dtype=float)
        if out.shape == x.shape:
            return out
        if out.ndim == 0:
            return np.full(x.shape, float(out))
    except (TypeError, ValueError):
        pass
    return np.array([float(func(v)) for v in x.ravel()]).reshape(x.shape)


class GridFunction:
    """Samples of a function on ``t_i = i/N``, ``i = 0..N``."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable[float]):
        v = np.array(values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValidationError("a grid function needs N >= 2 (at least 3 samples)")
        if not np.all(np.isfinite(v)):
            raise ValidationError("grid function values must be finite")
        v.setflags(write=False)
        self.values = v

    @classmethod
    def from_function(cls, func: Callable, N: int) -> "GridFunction":
        return cls(sample(func, np.linspace(0.0, 1.0, int(N) + 1)))

    @classmethod
    def constant(cls, value: float, N: int) -> "GridFunction":
        return cls(np.full(int(N) + 1, float(value)))

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def step(self) -> float:
        return 1.0 / self.N

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"GridFunction(N={self.N})"


def _as_grid(y) -> GridFunction:
    return y if isinstance(y, GridFunction) else GridFunction(y)


class FracPoly:
    """Finite sum ``sum(c * t**e)`` with real exponents ``e >= 0``.

    Terms are kept sorted by exponent with duplicates merged; exact zero
    coefficients are dropped, so the zero polynomial has no terms.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[float, float]] = ()):
        merged: dict[float, float] = {}
        for coeff, expo in terms:
            coeff, expo = float(coeff), float(expo)
            if not (math.isfinite(coeff) and math.isfinite(expo)):
                raise ValidationError("FracPoly terms must be finite")
            if expo < 0.0:
                raise ValidationError(f"negative exponent {expo} in FracPoly")
            merged[expo] = merged.get(expo, 0.0) + coeff
        self.terms = tuple((c, e) for e, c in sorted(merged.items()) if c != 0.0)

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(e for _, e in self.terms)

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(c for c, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, t):
        return frac_poly_eval(self, t)

    def __eq__(self, other) -> bool:
        return isinstance(other, FracPoly) and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "FracPoly(0)"
        body = " + ".join(f"{c:.12g}*t^{e:g}" for c, e in self.terms)
        return f"FracPoly({body})"


def frac_poly_eval(fp: FracPoly, t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("FracPoly is evaluated on t >= 0 only")
    out = np.zeros_like(arr)
    for c, e in fp.terms:
        out = out + c * arr**e
    return float(out) if out.ndim == 0 else out


def caputo_power(mu: float, alpha: float | Order) -> FracPoly:
    """Caputo derivative of ``t**mu`` as a single-term :class:`FracPoly`.

    ``mu(mu-1)...(mu-n+1) * Gamma(1+mu-n)/Gamma(1+mu-alpha) * t**(mu-alpha)``,
    and zero for ``mu`` in ``{0, ..., n-1}``.
    """
    alpha = as_order(alpha)
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"caputo_power needs mu >= 0, got {mu!r}")
    n = alpha.n
    if mu == math.floor(mu) and mu <= n - 1:
        return FracPoly()
    if mu - alpha.value < 0.0:
        # t**mu with non-integer mu < alpha has a singular (or undefined) image
        raise DomainError(f"D^{alpha.value:g} t^{mu:g} is not a FracPoly (exponent {mu - alpha.value:g} < 0)")
    falling = 1.0
    for i in range(n):
        falling *= mu - i
    coeff = falling * math.gamma(1.0 + mu - n) * _rgamma(1.0 + mu - alpha.value)
    return FracPoly([(coeff, mu - alpha.value)])


# -- product-integration weights -------------------------------------------
#
# In units of the grid step, with w = X - tau and c = expo + 2,
# F(A) = A**c / (c (c-1)) satisfies F'' = A**expo, and the hat-function
# moments reduce to differences of F.  Those differences are evaluated with
# expm1/log1p to avoid cancellation for nodes far from X.


def _second_difference(A, c: float):
    # (A+1)^c - 2 A^c + (A-1)^c for A >= 1
    A = np.asarray(A, dtype=float)
    x = 1.0 / A
    with np.errstate(divide="ignore"):
        return A**c * (np.expm1(c * np.log1p(x)) + np.expm1(c * np.log1p(-x)))


def _left_end(A, c: float):
    # (A-1)^c - A^c + c A^(c-1) for A >= 1
    A = np.asarray(A, dtype=float)
    x = 1.0 / A
    with np.errstate(divide="ignore"):
        return A**c * (np.expm1(c * np.log1p(-x)) + c * x)


def _poly_moment(lo: float, hi: float, expo: float, c0: float, c1: float) -> float:
    # integral over [lo, hi] of w**expo * (c0 + c1*w)
    e1, e2 = expo + 1.0, expo + 2.0
    return c0 * (hi**e1 - lo**e1) / e1 + c1 * (hi**e2 - lo**e2) / e2


@lru_cache(maxsize=32)
def _toeplitz_weights(N: int, expo: float) -> tuple[np.ndarray, np.ndarray]:
    c = expo + 2.0
    norm = c * (c - 1.0)
    k = np.arange(1, N + 1, dtype=float)
    b = np.empty(N + 1)
    b[0] = 1.0 / norm
    b[1:] = _second_difference(k, c) / norm
    first = np.zeros(N + 1)
    first[1:] = _left_end(k, c) / norm
    b.setflags(write=False)
    first.setflags(write=False)
    return b, first


def power_kernel_weights(N: int, x: float, expo: float) -> np.ndarray:
    """Weights ``w`` with ``w @ y == int_0^x (x - tau)**expo * L[y](tau) dtau``.

    ``L[y]`` is the piecewise-linear interpolant of samples ``y`` on the
    uniform grid with ``N`` intervals; ``x`` may fall between nodes.
    Requires ``expo > -1``.
    """
    if expo <= -1.0:
        raise ValidationError("kernel exponent must exceed -1")
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    w = np.zeros(N + 1)
    X = x * N
    m = min(int(math.floor(X)), N)
    theta = X - m
    c = expo + 2.0
    norm = c * (c - 1.0)
    if m >= 1:
        w[0] = _left_end(X, c) / norm
        if m >= 2:
            j = np.arange(1, m, dtype=float)
            w[1:m] = _second_difference(X - j, c) / norm
        w[m] += _poly_moment(theta, theta + 1.0, expo, theta + 1.0, -1.0)
    if theta > 0.0 and m < N:
        w[m] += _poly_moment(0.0, theta, expo, 1.0 - theta, 1.0)
        w[m + 1] += _poly_moment(0.0, theta, expo, theta, -1.0)
    return w * (1.0 / N) ** (expo + 1.0)


def rl_integral(y, alpha: float | Order) -> GridFunction:
    """Riemann-Liouville integral ``I^alpha y`` at every grid node.

    Second order for smooth ``y``; exact for piecewise-linear ``y``.
    """
    y = _as_grid(y)
    a = as_order(alpha).value
    N = y.N
    b, first = _toeplitz_weights(N, a - 1.0)
    v = y.values
    out = np.zeros(N + 1)
    out[1:] = np.convolve(b[:N], v[1:])[:N] + first[1:] * v[0]
    out *= (1.0 / N) ** a / math.gamma(a)
    return GridFunction(out)


def rl_integral_at(y, alpha: float | Order, x: float) -> float:
    """``I^alpha y`` at a single point ``x`` in ``[0, 1]``, on or off the grid."""
    y = _as_grid(y)
    a = as_order(alpha).value
    w = power_kernel_weights(y.N, x, a - 1.0)
    return float(w @ y.values) / math.gamma(a)


MIN_CAPUTO_NODES = 64


def caputo_grid(y, alpha: float | Order) -> GridFunction:
    """Grid Caputo derivative ``I^(n-alpha)`` of an n-th finite difference.

    Verification tool only: first-order accurate on smooth data.
    """
    y = _as_grid(y)
    alpha = as_order(alpha)
    if y.N < MIN_CAPUTO_NODES:
        raise ValidationError(f"caputo_grid needs N >= {MIN_CAPUTO_NODES}, got {y.N}")
    d = y.values
    for _ in range(alpha.n):
        d = np.gradient(d, y.step, edge_order=2)
    rest = alpha.n - alpha.value
    if rest <= 0.0:
        return GridFunction(d)
    return rl_integral(GridFunction(d), rest)


# -- adaptive quadrature for callables ---------------------------------------


def _graded_breakpoints(a: float, b: float, levels: int, ratio: float) -> np.ndarray:
    half = 0.5 * (b - a)
    mid = a + half
    pts = [a, mid, b]
    for end, sign in ((a, 1.0), (b, -1.0)):
        # nodes cannot get closer to a nonzero endpoint than its float spacing
        floor_width = 8.0 * np.finfo(float).eps * abs(end)
        width = half
        for _ in range(levels):
            width *= ratio
            if width <= floor_width or width < 1e-290:
                break
            pts.append(end + sign * width)
    return np.unique(np.array(pts))


def _graded_rule(func: Callable, a: float, b: float, levels: int, order: int, ratio: float) -> float:
    bp = _graded_breakpoints(a, b, levels, ratio)
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = bp[:-1, None], bp[1:, None]
    nodes = (0.5 * (hi - lo) * (xg + 1.0) + lo).ravel()
    weights = (0.5 * (hi - lo) * wg).ravel()
    keep = (nodes > a) & (nodes < b)
    vals = sample(func, nodes[keep])
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is not finite at an interior quadrature node")
    return float(weights[keep] @ vals)


def graded_quad(
    func: Callable,
    a: float,
    b: float,
    *,
    tol: float = 1e-9,
    max_level: int = 10,
    ratio: float = 0.25,
) -> float:
    """Integrate ``func`` over ``[a, b]`` allowing integrable endpoint singularities.

    Gauss-Legendre panels are graded geometrically toward both endpoints;
    each refinement adds grading levels and raises the panel order, and the
    result is accepted once two successive refinements differ by less than
    ``tol`` (relative to the value when it exceeds one).

    Nodes cannot approach a nonzero endpoint closer than its float spacing,
    so a singularity there is resolved only to about ``sqrt(eps)`` for an
    inverse square root.  Reflect the integrand to put it at 0 instead.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise ValidationError("graded_quad needs finite a <= b")
    if b == a:
        return 0.0
    estimates: list[float] = []
    for level in range(1, max_level + 1):
        val = _graded_rule(func, a, b, 60 * level, 8 + 4 * level, ratio)
        if estimates and abs(val - estimates[-1]) < tol * max(1.0, abs(val)):
            return val
        estimates.append(val)
    raise QuadratureError("graded quadrature did not settle under refinement", estimates)
