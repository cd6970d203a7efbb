"""Solvers for the p-Laplacian fractional boundary-value problem.

The problem ``D^beta(phi_p(D^alpha u)) + a(t) f(u) = 0`` on ``(0, 1)`` with
``u(0) = gamma*u(h) + lam`` and ``u'(0) = mu`` (plus homogeneous conditions
on ``phi_p(D^alpha u)``) is equivalent to ``u = T u`` where::

    T u(t) = I^alpha v(t) + mu*t + gamma/(1-gamma) * I^alpha v(h)
             + (lam + gamma*mu*h)/(1-gamma),
    v(s)   = phi_q( int_0^1 H(s, tau) a(tau) f(u(tau)) dtau ).

All integrals are product-integration rules on the uniform grid, so the
discrete operator can also be evaluated at off-grid points (Nystrom
interpolation), which is how ``u(h)`` is obtained when ``h`` is not a node.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import Diverged, MaxIterExceeded, ValidationError
from .fraccore import GridFunction, Order, PExponent, as_order, phi, power_kernel_weights, rl_integral, sample
from .green import c_delta as _c_delta
from .green import green_row_integrals, kernel_order

log = logging.getLogger(__name__)

__all__ = [
    "ProblemSpec",
    "SolverOptions",
    "Solution",
    "LowerBoundReport",
    "solve_linear",
    "evaluate_linear",
    "apply_w",
    "apply_T",
    "evaluate_T",
    "solve_fixed_point",
    "boundary_residuals",
    "lower_bound_check",
    "nondecreasing_on_samples",
]

DIVERGENCE_BOUND = 1e12
VALIDATION_SAMPLES = 1000


def _validate_linear_params(gamma: float, h: float) -> None:
    if not (0.0 <= gamma < 1.0):
        raise ValidationError(f"gamma must lie in [0, 1), got {gamma!r}")
    if not (0.0 <= h <= 1.0):
        raise ValidationError(f"h must lie in [0, 1], got {h!r}")


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    beta: float
    p: float
    gamma: float
    h: float
    lam: float
    mu: float
    a: Callable = field(compare=False, repr=False)
    f: Callable = field(compare=False, repr=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "p", "gamma", "h", "lam", "mu"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if not (1.0 < self.alpha <= 2.0):
            raise ValidationError(f"alpha must lie in (1, 2], got {self.alpha}")
        kernel_order(self.beta)
        PExponent(self.p)
        _validate_linear_params(self.gamma, self.h)
        if self.lam <= 0.0 or self.mu <= 0.0:
            raise ValidationError("lambda and mu must be positive")
        ts = np.linspace(0.0, 1.0, VALIDATION_SAMPLES + 2)[1:-1]
        av = sample(self.a, ts)
        bad = ~np.isfinite(av) | (av < 0.0)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(f"a(t) must be finite and nonnegative; a({ts[i]:.6g}) = {av[i]!r}")
        xs = np.concatenate(([0.0], np.logspace(-6, 3, VALIDATION_SAMPLES - 1)))
        fv = sample(self.f, xs)
        bad = ~np.isfinite(fv) | (fv < 0.0)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(f"f(u) must be finite and nonnegative; f({xs[i]:.6g}) = {fv[i]!r}")

    @property
    def alpha_order(self) -> Order:
        return Order(self.alpha)

    @property
    def beta_order(self) -> Order:
        return Order(self.beta)

    @property
    def q(self) -> float:
        return PExponent(self.p).q

    @property
    def boundary_constant(self) -> float:
        """``(lam + gamma*mu*h)/(1 - gamma)``, the lower bound of ``T u``."""
        return (self.lam + self.gamma * self.mu * self.h) / (1.0 - self.gamma)

    def with_params(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class SolverOptions:
    N: int = 257
    tol: float = 1e-10
    max_iter: int = 500
    damping: float | None = None  # None: 1.0 if f looks nondecreasing, else 0.5
    start: GridFunction | float | None = None

    def __post_init__(self):
        if int(self.N) < 64:
            raise ValidationError("solver grids need N >= 64")
        if not self.tol > 0.0:
            raise ValidationError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ValidationError("max_iter must be at least 1")
        if self.damping is not None and not (0.0 < self.damping <= 1.0):
            raise ValidationError("damping must lie in (0, 1]")


@dataclass
class Solution:
    u: GridFunction
    fp_residual: float
    bc_residuals: tuple[float, float]
    iterations: int
    converged: bool
    status: str = "converged"  # converged | max_iter | diverged
    damping: float = 1.0
    history: list[float] = field(default_factory=list, repr=False)


# -- linear sub-problem -------------------------------------------------------


def evaluate_linear(y, alpha, gamma: float, h: float, lam: float, mu: float, x):
    """Solution of ``D^alpha u = y`` with the two boundary conditions, at points ``x``."""
    y = y if isinstance(y, GridFunction) else GridFunction(y)
    a = as_order(alpha).value
    _validate_linear_params(gamma, h)
    g = math.gamma(a)
    Ih = power_kernel_weights(y.N, h, a - 1.0) @ y.values / g
    const = (gamma * Ih + lam + gamma * mu * h) / (1.0 - gamma)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.array([power_kernel_weights(y.N, xi, a - 1.0) @ y.values / g for xi in xs])
    out = vals + mu * xs + const
    return float(out[0]) if np.ndim(x) == 0 else out


def solve_linear(y, alpha, gamma: float, h: float, lam: float, mu: float) -> GridFunction:
    """Grid solution of the linear alpha-order problem.

    ``u = I^alpha y + mu*t + (gamma*I^alpha y(h) + lam + gamma*mu*h)/(1 - gamma)``.
    """
    y = y if isinstance(y, GridFunction) else GridFunction(y)
    a = as_order(alpha).value
    _validate_linear_params(gamma, h)
    Iy = rl_integral(y, a).values
    Ih = power_kernel_weights(y.N, h, a - 1.0) @ y.values / math.gamma(a)
    const = (gamma * Ih + lam + gamma * mu * h) / (1.0 - gamma)
    return GridFunction(Iy + mu * y.t + const)


def boundary_residuals(u: GridFunction, u_at_h: float, gamma: float, lam: float, mu: float) -> tuple[float, float]:
    """``(u(0) - gamma*u(h) - lam, u'(0) - mu)`` with a second-order one-sided ``u'(0)``."""
    v = u.values
    du0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * u.step)
    return float(v[0] - gamma * u_at_h - lam), float(du0 - mu)


# -- nonlinear operator ---------------------------------------------------------


def apply_w(y, beta) -> GridFunction:
    """``w(t) = int_0^1 H(t, tau) y(tau) dtau`` at every node."""
    return green_row_integrals(y, beta)


def _grid_weight(a: Callable, N: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, N + 1)
    vals = np.empty(N + 1)
    vals[1:-1] = sample(a, t[1:-1])
    # a is only required on (0, 1); integrable endpoint blow-ups fall back to the neighbour
    for i, nb in ((0, 1), (N, N - 1)):
        try:
            v = float(sample(a, t[i : i + 1])[0])
        except (ArithmeticError, ValueError):
            v = math.nan
        vals[i] = v if math.isfinite(v) else vals[nb]
    if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
        raise ValidationError("a(t) must be finite and nonnegative on the grid interior")
    return vals


def _check_cone(u: np.ndarray) -> None:
    if np.min(u) < -1e-12 * (1.0 + np.max(np.abs(u))):
        raise ValidationError("T is defined on nonnegative functions only")


def _source(u: np.ndarray, spec: ProblemSpec, a_vals: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        fu = sample(spec.f, np.clip(u, 0.0, None))
    if np.any(fu < 0.0):
        i = int(np.argmin(fu))
        raise ValidationError(f"f is negative on the range of u: f({u[i]:.6g}) = {fu[i]:.6g}")
    return a_vals * fu


def _phi_q_g(u: np.ndarray, spec: ProblemSpec, a_vals: np.ndarray) -> np.ndarray:
    y = _source(u, spec, a_vals)
    if not np.all(np.isfinite(y)):
        return np.full_like(u, np.inf)
    g = green_row_integrals(GridFunction(y), spec.beta).values
    return phi(g, spec.q)


class _Operator:
    """``T`` on a fixed grid with the sampled weight cached."""

    def __init__(self, spec: ProblemSpec, N: int):
        self.spec = spec
        self.N = N
        self.t = np.linspace(0.0, 1.0, N + 1)
        self.a_vals = _grid_weight(spec.a, N)
        self.g_alpha = math.gamma(spec.alpha)
        self.w_h = power_kernel_weights(N, spec.h, spec.alpha - 1.0) / self.g_alpha

    def v(self, u: np.ndarray) -> np.ndarray:
        return _phi_q_g(u, self.spec, self.a_vals)

    def tail(self, v: np.ndarray) -> float:
        s = self.spec
        return s.gamma / (1.0 - s.gamma) * float(self.w_h @ v) + s.boundary_constant

    def __call__(self, u: np.ndarray) -> np.ndarray:
        v = self.v(u)
        if not np.all(np.isfinite(v)):
            return v
        return rl_integral(GridFunction(v), self.spec.alpha).values + self.spec.mu * self.t + self.tail(v)

    def at(self, u: np.ndarray, x) -> np.ndarray:
        v = self.v(u)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        head = np.array([power_kernel_weights(self.N, xi, self.spec.alpha - 1.0) @ v for xi in xs]) / self.g_alpha
        return head + self.spec.mu * xs + self.tail(v)


def apply_T(u, spec: ProblemSpec) -> GridFunction:
    u = u if isinstance(u, GridFunction) else GridFunction(u)
    _check_cone(u.values)
    return GridFunction(_Operator(spec, u.N)(u.values))


def evaluate_T(u, spec: ProblemSpec, x):
    """``(T u)(x)`` at arbitrary points of ``[0, 1]`` (Nystrom interpolation)."""
    u = u if isinstance(u, GridFunction) else GridFunction(u)
    _check_cone(u.values)
    out = _Operator(spec, u.N).at(u.values, x)
    return float(out[0]) if np.ndim(x) == 0 else out


def nondecreasing_on_samples(f: Callable, n_pairs: int = 10_000, seed: int = 0, x_max: float = 1e3) -> bool:
    """Check ``f(x) <= f(y)`` on random ordered pairs from ``[0, x_max]``."""
    rng = np.random.default_rng(seed)
    half = n_pairs // 2
    pts = np.concatenate(
        [
            rng.uniform(0.0, x_max, size=(half, 2)),
            10.0 ** rng.uniform(-8.0, math.log10(x_max), size=(n_pairs - half, 2)),
        ]
    )
    pts.sort(axis=1)
    lo = sample(f, pts[:, 0])
    hi = sample(f, pts[:, 1])
    return bool(np.all(lo <= hi + 1e-12 * (1.0 + np.abs(hi))))


def _start_values(start, N: int) -> np.ndarray:
    if start is None:
        return np.zeros(N + 1)
    if isinstance(start, GridFunction):
        if start.N != N:
            raise ValidationError(f"start grid has N={start.N}, solver uses N={N}")
        return start.values.copy()
    return np.full(N + 1, float(start))


def solve_fixed_point(spec: ProblemSpec, opts: SolverOptions | None = None, *, raise_on_failure: bool = True) -> Solution:
    """Damped Picard iteration ``u <- (1-d) u + d T u``.

    Stops when the sup-norm increment drops below ``opts.tol``.  Raises
    :class:`MaxIterExceeded` or :class:`Diverged` (sup norm above 1e12) unless
    ``raise_on_failure`` is false, in which case the returned solution has
    ``converged=False`` and carries the last finite iterate.
    """
    opts = opts or SolverOptions()
    N = int(opts.N)
    op = _Operator(spec, N)
    d = opts.damping
    if d is None:
        d = 1.0 if nondecreasing_on_samples(spec.f) else 0.5
    u = _start_values(opts.start, N)
    _check_cone(u)
    history: list[float] = []
    status = "max_iter"
    iterations = 0
    for k in range(1, int(opts.max_iter) + 1):
        Tu = op(u)
        if not np.all(np.isfinite(Tu)) or np.max(np.abs(Tu)) > DIVERGENCE_BOUND:
            status = "diverged"
            iterations = k
            break
        new = (1.0 - d) * u + d * Tu
        inc = float(np.max(np.abs(new - u)))
        history.append(inc)
        u = new
        iterations = k
        if inc < opts.tol:
            status = "converged"
            break
    log.debug("fixed point: status=%s after %d iterations", status, iterations)

    if status != "converged" and raise_on_failure:
        last = GridFunction(u) if np.all(np.isfinite(u)) else None
        if status == "diverged":
            raise Diverged(f"iterates exceeded {DIVERGENCE_BOUND:g} after {iterations} iterations", history, last)
        raise MaxIterExceeded(f"no convergence in {opts.max_iter} iterations", history, last)

    Tu = op(u)
    if np.all(np.isfinite(Tu)):
        fp_res = float(np.max(np.abs(u - Tu)))
        u_h = float(op.at(u, spec.h)[0])
    else:
        fp_res, u_h = math.inf, math.nan
    sol_u = GridFunction(u)
    return Solution(
        u=sol_u,
        fp_residual=fp_res,
        bc_residuals=boundary_residuals(sol_u, u_h, spec.gamma, spec.lam, spec.mu),
        iterations=iterations,
        converged=status == "converged",
        status=status,
        damping=d,
        history=history,
    )


@dataclass(frozen=True)
class LowerBoundReport:
    min_margin: float  # min over [delta, 1] of u(t) - c_delta * ||u||
    c_delta: float
    norm: float
    passed: bool


def lower_bound_check(u, delta: float, alpha, beta, q: float, slack: float = 1e-9) -> LowerBoundReport:
    """Check ``u(t) >= c_delta * ||u||`` on ``[delta, 1]``."""
    u = u if isinstance(u, GridFunction) else GridFunction(u)
    cd = _c_delta(alpha, beta, q, delta)
    norm = u.sup_norm()
    mask = u.t >= delta - 1e-15
    margin = float(np.min(u.values[mask] - cd * norm))
    return LowerBoundReport(min_margin=margin, c_delta=cd, norm=norm, passed=margin >= -slack)
