"""Green's function of the beta-order sub-problem and related integrals.

For ``3 < beta <= 4``::

    H(t, s) = [t (beta-1) (1-s)**(beta-2) - (t-s)**(beta-1)] / Gamma(beta),  s <= t
    H(t, s) =  t (beta-1) (1-s)**(beta-2)                    / Gamma(beta),  t <= s

so ``int_0^1 H(t, tau) y(tau) dtau`` splits into a full-interval moment of
``(1 - tau)**(beta-2)`` and a Riemann-Liouville integral of order ``beta``
evaluated at ``t``.  Both are computed by product integration, which keeps
the kink at ``tau = t`` on an interval boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, RangeWarning, ValidationError
from .fraccore import (
    GridFunction,
    Order,
    as_order,
    graded_quad,
    phi,
    power_kernel_weights,
    rl_integral,
    sample,
)

__all__ = [
    "kernel_order",
    "green_eval",
    "green_branches",
    "green_inner_integral",
    "green_row_integrals",
    "H1Result",
    "h1_integral",
    "c_delta",
    "lower_kernel_integral",
    "KernelSummary",
    "kernel_property_summary",
]


def kernel_order(beta: float | Order) -> Order:
    beta = as_order(beta)
    if not (3.0 < beta.value <= 4.0):
        raise ValidationError(f"the kernel needs 3 < beta <= 4, got {beta.value}")
    return beta


def _check_unit(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def green_branches(t, s, beta: float | Order) -> tuple[np.ndarray, np.ndarray]:
    """Both closed forms of ``H(t, s)``, without choosing between them."""
    b = kernel_order(beta).value
    t = _check_unit("t", t)
    s = _check_unit("s", s)
    g = math.gamma(b)
    common = t * (b - 1.0) * (1.0 - s) ** (b - 2.0)
    below = (common - np.clip(t - s, 0.0, None) ** (b - 1.0)) / g
    return below, common / g


def green_eval(t, s, beta: float | Order):
    """``H(t, s)``; accepts scalars or broadcastable arrays."""
    below, above = green_branches(t, s, beta)
    t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
    out = np.where(s <= t, below, above)
    return float(out) if out.ndim == 0 else out


def _as_grid(w) -> GridFunction:
    return w if isinstance(w, GridFunction) else GridFunction(w)


def green_inner_integral(s: float, w, beta: float | Order) -> float:
    """``int_0^1 H(s, tau) w(tau) dtau`` for grid data ``w``."""
    b = kernel_order(beta).value
    w = _as_grid(w)
    s = float(_check_unit("s", s))
    full = power_kernel_weights(w.N, 1.0, b - 2.0) @ w.values
    head = power_kernel_weights(w.N, s, b - 1.0) @ w.values
    return float(s * (b - 1.0) * full - head) / math.gamma(b)


def green_row_integrals(w, beta: float | Order) -> GridFunction:
    """``green_inner_integral`` at every grid node, in O(N^2)."""
    b = kernel_order(beta).value
    w = _as_grid(w)
    full = power_kernel_weights(w.N, 1.0, b - 2.0) @ w.values
    out = w.t * (b - 1.0) * full / math.gamma(b) - rl_integral(w, b).values
    return GridFunction(out)


@dataclass(frozen=True)
class H1Result:
    value: float
    holds: bool


def h1_integral(a: Callable | GridFunction, beta: float | Order, lower: float = 0.0) -> H1Result:
    """``int_lower^1 H(1, tau) a(tau) dtau`` and whether it lies in ``(0, inf)``.

    Callables go through graded quadrature, which tolerates integrable
    endpoint singularities of ``a``; grid data uses product integration.
    """
    b = kernel_order(beta).value
    lower = float(lower)
    if not (0.0 <= lower < 1.0):
        raise DomainError("lower limit must lie in [0, 1)")
    g = math.gamma(b)
    if isinstance(a, GridFunction):
        if lower != 0.0:
            raise ValidationError("grid weights support lower = 0 only")
        value = green_inner_integral(1.0, a, b)
    else:
        def integrand(tau):
            r = 1.0 - tau
            return ((b - 1.0) * r ** (b - 2.0) - r ** (b - 1.0)) / g * sample(a, tau)

        value = graded_quad(integrand, lower, 1.0)
    return H1Result(value=value, holds=bool(0.0 < value < math.inf))


def c_delta(alpha: float | Order, beta: float | Order, q: float, delta: float) -> float:
    """``int_0^delta alpha (1-s)**(alpha-2) phi_q(s**(beta-1)) ds``.

    Emits :class:`RangeWarning` when the value falls outside ``(0, 1)``.
    """
    a = as_order(alpha).value
    b = as_order(beta).value
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")

    def integrand(s):
        return a * (1.0 - s) ** (a - 2.0) * phi(s ** (b - 1.0), q)

    value = graded_quad(integrand, 0.0, delta, tol=1e-13)
    if not (0.0 < value < 1.0):
        warnings.warn(f"c_delta = {value:.6g} lies outside (0, 1)", RangeWarning, stacklevel=2)
    return value


def lower_kernel_integral(alpha: float | Order, beta: float | Order, q: float) -> float:
    """``int_0^1 (1-s)**(alpha-2)/Gamma(alpha) * phi_q(s**(beta-1)) ds``."""
    a = as_order(alpha).value
    b = as_order(beta).value
    g = math.gamma(a)

    # reflected so the (1-s)**(alpha-2) singularity sits at 0
    def integrand(r):
        return r ** (a - 2.0) * phi((1.0 - r) ** (b - 1.0), q) / g

    return graded_quad(integrand, 0.0, 1.0, tol=1e-12)


@dataclass(frozen=True)
class KernelSummary:
    beta: float
    min_value: float
    max_dominance_excess: float  # max of H(t,s) - H(1,s)
    max_lower_bound_deficit: float  # max of t^(beta-1) H(1,s) - H(t,s) on (0,1)^2
    max_branch_gap: float  # max |below(t,t) - above(t,t)|

    def passes(self, slack: float = 1e-12, branch_slack: float = 1e-14) -> bool:
        return (
            self.min_value >= -slack
            and self.max_dominance_excess <= slack
            and self.max_lower_bound_deficit <= slack
            and self.max_branch_gap <= branch_slack
        )


def kernel_property_summary(beta: float | Order, n: int = 201, n_diag: int = 101) -> KernelSummary:
    """Evaluate nonnegativity, domination and the ``t^(beta-1)`` lower bound on an n-by-n grid."""
    b = kernel_order(beta).value
    x = np.linspace(0.0, 1.0, n)
    T, S = np.meshgrid(x, x, indexing="ij")
    H = green_eval(T, S, b)
    H1 = green_eval(np.ones_like(x), x, b)
    interior = slice(1, n - 1)
    lower = T[interior, interior] ** (b - 1.0) * H1[None, interior] - H[interior, interior]
    d = np.linspace(0.0, 1.0, n_diag)
    below, above = green_branches(d, d, b)
    return KernelSummary(
        beta=b,
        min_value=float(H.min()),
        max_dominance_excess=float((H - H1[None, :]).max()),
        max_lower_bound_deficit=float(lower.max()),
        max_branch_gap=float(np.abs(below - above).max()),
    )
