"""Hypothesis checks and (lambda, mu) regime classification.

The checkers collect numerical evidence by sampling ``f(x)/phi_p(x)`` on
log-spaced points; they are not proofs.  Every witness found on the base
sample is re-verified on a ten times denser sample before it is reported.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bvp import ProblemSpec, Solution, SolverOptions, nondecreasing_on_samples, solve_fixed_point
from .errors import ConsistencyWarning
from .fraccore import PExponent, phi, sample
from .green import H1Result, c_delta, h1_integral, lower_kernel_integral

__all__ = [
    "LimitClass",
    "H2Witness",
    "H3Witness",
    "H4Witness",
    "HypothesisReport",
    "Verdict",
    "RegimeVerdict",
    "SweepRow",
    "estimate_limits",
    "growth_constant",
    "check_H2",
    "check_H3",
    "check_H4",
    "check_H5_H6",
    "check_hypotheses",
    "classify",
    "sweep",
]

LOG_X_RANGE = (-100.0, 100.0)
BASE_PER_DECADE = 20
DENSE_FACTOR = 10
THETA_SAMPLES = 10_000
DEFAULT_DELTA = 0.5


# -- ratio sampling -------------------------------------------------------------


def _ratio(f: Callable, p: float, x: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        fx = sample(f, x)
        px = np.abs(x) ** (p - 1.0)
        r = fx / px
    # 0/0 carries no information
    r[(fx == 0.0) & (px == 0.0)] = np.nan
    r[(fx == 0.0) & (px > 0.0)] = 0.0
    return r


class _RatioTable:
    """``f(x)/phi_p(x)`` on a log grid, with one-sided sup/inf queries."""

    def __init__(self, f: Callable, p: float, per_decade: int):
        lo, hi = LOG_X_RANGE
        self.f, self.p = f, p
        self.x = np.logspace(lo, hi, int((hi - lo) * per_decade) + 1)
        self.r = _ratio(f, p, self.x)

    # the query point itself is always sampled: monotone ratios peak there
    def _at(self, x: float) -> np.ndarray:
        return _ratio(self.f, self.p, np.array([x]))

    def sup_below(self, c: float) -> float:
        return _nanmax(np.concatenate([self.r[self.x <= c], self._at(c)]))

    def sup_above(self, d: float) -> float:
        return _nanmax(np.concatenate([self.r[self.x >= d], self._at(d)]))

    def inf_above(self, e: float) -> float:
        return _nanmin(np.concatenate([self.r[self.x >= e], self._at(e)]))


def _nanmax(a: np.ndarray) -> float:
    a = a[~np.isnan(a)]
    return float(a.max()) if a.size else 0.0


def _nanmin(a: np.ndarray) -> float:
    a = a[~np.isnan(a)]
    return float(a.min()) if a.size else 0.0


# -- limits f_0, f_inf ----------------------------------------------------------


@dataclass(frozen=True)
class LimitClass:
    kind: str  # zero | finite | infinite | indeterminate
    value: float | None = None

    def __str__(self) -> str:
        return f"finite({self.value:.17g})" if self.kind == "finite" else self.kind


def _classify_sequence(r: np.ndarray) -> LimitClass:
    # r is ordered in the direction of the limit
    if np.all(r == 0.0):
        return LimitClass("zero")
    if np.any(np.isnan(r)):
        return LimitClass("indeterminate")
    if np.isinf(r[-1]):
        return LimitClass("infinite")
    tail = r[-3:]
    scale = np.max(np.abs(tail))
    if scale > 0.0 and (tail.max() - tail.min()) <= 0.01 * scale:
        return LimitClass("finite", float(tail[-1]))
    trend = np.diff(r[-4:])
    if np.all(trend < 0.0):
        return LimitClass("zero")
    if np.all(trend > 0.0):
        return LimitClass("infinite")
    return LimitClass("indeterminate")


def estimate_limits(f: Callable, p: float) -> tuple[LimitClass, LimitClass]:
    """Classify ``lim f(x)/phi_p(x)`` at ``0+`` and at ``+inf`` from ``x = 10**(+-k)``, k = 1..8."""
    p = PExponent(p).p
    k = np.arange(1, 9, dtype=float)
    at_zero = _ratio(f, p, 10.0**-k)
    at_inf = _ratio(f, p, 10.0**k)
    return _classify_sequence(at_zero), _classify_sequence(at_inf)


# -- witnesses --------------------------------------------------------------------


@dataclass(frozen=True)
class H2Witness:
    sigma: float
    c: float
    L: float
    L_max: float


@dataclass(frozen=True)
class H3Witness:
    M: float
    d: float
    M_max: float


@dataclass(frozen=True)
class H4Witness:
    N: float
    e: float
    N_min: float
    delta: float


def growth_constant(alpha: float, gamma: float, h: float) -> float:
    """``(1 + gamma(h^alpha - 1)) / (Gamma(alpha+1)(1-gamma))``, the bound on ``||I^alpha||`` in T."""
    return (1.0 + gamma * (h**alpha - 1.0)) / (math.gamma(alpha + 1.0) * (1.0 - gamma))


def check_H2(f: Callable, p: float, alpha: float, gamma: float, h: float, h1_value: float) -> H2Witness | None:
    """Find ``c`` and ``sigma < 1`` with ``f(x) <= sigma*L*phi_p(x)`` on ``(0, c]``.

    ``L`` is taken at its upper bound.  Among the admissible ``c`` on the log
    grid ``1e-6..1e3`` the one maximising ``(1 - phi_q(sigma)) c`` (the
    existence threshold) is returned.
    """
    if not h1_value > 0.0:
        return None
    q = PExponent(p).q
    L_max = 1.0 / (phi(growth_constant(alpha, gamma, h), p) * h1_value)
    base = _RatioTable(f, p, BASE_PER_DECADE)
    candidates = []
    for c in np.logspace(-6, 3, 91):
        sigma = base.sup_below(c) / L_max
        if sigma < 1.0:
            candidates.append(((1.0 - phi(max(sigma, 0.0), q)) * c, c))
    if not candidates:
        return None
    dense = _RatioTable(f, p, BASE_PER_DECADE * DENSE_FACTOR)
    for _, c in sorted(candidates, reverse=True):
        sigma = dense.sup_below(c) / L_max
        if sigma < 1.0:
            return H2Witness(sigma=max(sigma, 1e-15), c=float(c), L=L_max, L_max=L_max)
    return None


def check_H3(f: Callable, p: float, alpha: float, gamma: float, h: float, h1_value: float) -> H3Witness | None:
    """Find the smallest grid ``d`` with ``sup_{x>d} f/phi_p < M_max``."""
    if not h1_value > 0.0:
        return None
    q = PExponent(p).q
    M_max = 1.0 / (phi(growth_constant(alpha, gamma, h) * 2.0 ** (q - 1.0), p) * h1_value)
    base = _RatioTable(f, p, BASE_PER_DECADE)
    dense = None
    for d in np.logspace(-6, 6, 121):
        if base.sup_above(d) < M_max:
            dense = dense or _RatioTable(f, p, BASE_PER_DECADE * DENSE_FACTOR)
            M = dense.sup_above(d)
            if M < M_max:
                return H3Witness(M=M if M > 0.0 else 0.5 * M_max, d=float(d), M_max=M_max)
    return None


def check_H4(
    f: Callable,
    p: float,
    alpha: float,
    beta: float,
    q: float | None,
    delta: float,
    a: Callable,
) -> H4Witness | None:
    """Find ``e`` with ``inf_{x>e} f/phi_p > N_min``; returns ``N`` as that infimum.

    ``e`` is first located on the base log grid and then moved down to the
    smallest admissible point of the dense grid.
    """
    p = PExponent(p).p
    q = PExponent(p).q if q is None else q
    tail = h1_integral(a, beta, lower=delta).value
    cd = c_delta(alpha, beta, q, delta)
    denom = phi(cd * lower_kernel_integral(alpha, beta, q), p) * tail
    if not denom > 0.0:
        return None
    N_min = 1.0 / denom
    base = _RatioTable(f, p, BASE_PER_DECADE)
    xs = base.x[base.x >= 1e-6]
    prev = 1e-6
    for e in xs:
        if base.inf_above(e) > N_min:
            dense = _RatioTable(f, p, BASE_PER_DECADE * DENSE_FACTOR)
            window = dense.x[(dense.x >= prev) & (dense.x <= e)]
            for e_d in window:
                N = dense.inf_above(e_d)
                if N > N_min:
                    return H4Witness(N=N, e=float(e_d), N_min=N_min, delta=delta)
            return None
        prev = e
    return None


def check_H5_H6(f: Callable, p: float, seed: int = 1) -> tuple[bool, float | None]:
    """Monotonicity of ``f`` and the smallest ``theta`` in ``f(kx) >= phi_p(k)**theta f(x)``.

    ``theta`` is estimated as the sup of ``ln(f(x)/f(kx)) / ((p-1) ln(1/k))``
    over sampled ``k`` in ``(0, 1)`` and ``x`` in ``(0, 1e3)``; pairs with
    ``f(x) = 0`` are skipped.  Returned only when below one on both the base
    and the dense sample.
    """
    p = PExponent(p).p
    h5 = nondecreasing_on_samples(f)
    rng = np.random.default_rng(seed)
    theta = None
    for n in (THETA_SAMPLES, THETA_SAMPLES * DENSE_FACTOR):
        half = n // 2
        x = np.concatenate([rng.uniform(0.0, 1e3, half), 10.0 ** rng.uniform(-6.0, 3.0, n - half)])
        k = 10.0 ** rng.uniform(-6.0, math.log10(0.99), n)
        x = np.where(x > 0.0, x, 1e-6)
        with np.errstate(all="ignore"):
            fx = sample(f, x)
            fkx = sample(f, k * x)
            keep = fx > 0.0
            quot = np.log(fx[keep] / fkx[keep]) / ((p - 1.0) * np.log(1.0 / k[keep]))
        quot = np.where(fkx[keep] <= 0.0, np.inf, quot)
        est = float(np.max(quot)) if quot.size else -np.inf
        if not est < 1.0:
            return h5, None
        theta = max(est, 0.0)
    return h5, theta


# -- report and classification --------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    h1: H1Result
    h2: H2Witness | None
    h3: H3Witness | None
    h4: H4Witness | None
    h5: bool
    h6: float | None  # theta
    f0: LimitClass
    finf: LimitClass

    def as_records(self) -> list[tuple[str, object]]:
        recs: list[tuple[str, object]] = [("h1", self.h1.holds), ("h1_integral", self.h1.value)]
        recs.append(("h2", self.h2 is not None))
        if self.h2:
            recs += [("h2_sigma", self.h2.sigma), ("h2_c", self.h2.c), ("h2_L", self.h2.L), ("h2_L_max", self.h2.L_max)]
        recs.append(("h3", self.h3 is not None))
        if self.h3:
            recs += [("h3_M", self.h3.M), ("h3_d", self.h3.d), ("h3_M_max", self.h3.M_max)]
        recs.append(("h4", self.h4 is not None))
        if self.h4:
            recs += [("h4_N", self.h4.N), ("h4_e", self.h4.e), ("h4_N_min", self.h4.N_min), ("h4_delta", self.h4.delta)]
        recs += [("h5", self.h5), ("h6", self.h6 is not None)]
        if self.h6 is not None:
            recs.append(("h6_theta", self.h6))
        recs += [("f0", str(self.f0)), ("finf", str(self.finf))]
        return recs


def check_hypotheses(spec: ProblemSpec, delta: float = DEFAULT_DELTA) -> HypothesisReport:
    h1 = h1_integral(spec.a, spec.beta)
    v = h1.value if h1.holds else 0.0
    h5, theta = check_H5_H6(spec.f, spec.p)
    f0, finf = estimate_limits(spec.f, spec.p)
    return HypothesisReport(
        h1=h1,
        h2=check_H2(spec.f, spec.p, spec.alpha, spec.gamma, spec.h, v),
        h3=check_H3(spec.f, spec.p, spec.alpha, spec.gamma, spec.h, v),
        h4=check_H4(spec.f, spec.p, spec.alpha, spec.beta, spec.q, delta, spec.a) if h1.holds else None,
        h5=h5,
        h6=theta,
        f0=f0,
        finf=finf,
    )


class Verdict(str, enum.Enum):
    EXISTS_SMALL_PARAM = "ExistsSmallParam"
    EXISTS_ALL_LAMBDA = "ExistsAllLambda"
    UNIQUE = "Unique"
    NO_SOLUTION = "NoSolution"
    INDETERMINATE = "Indeterminate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RegimeVerdict:
    lam: float
    mu: float
    verdict: Verdict
    lambda_exist_bound: float  # largest lam with lam + gamma*mu*h inside the existence band
    lambda_nonexist_bound: float  # lam above which lam + gamma*mu*h > (1-gamma) e
    lambda_exist_bound_statement: float  # same band with lam + gamma*mu in place of lam + gamma*mu*h
    warnings: tuple[str, ...] = ()


def classify(spec: ProblemSpec, report: HypothesisReport) -> RegimeVerdict:
    """Combine the regime rules into one verdict.

    Precedence: NoSolution, Unique, ExistsAllLambda, ExistsSmallParam,
    Indeterminate.  Contradictory applicable rules raise a
    :class:`ConsistencyWarning` and are recorded in the verdict.
    """
    g, mu, h, lam = spec.gamma, spec.mu, spec.h, spec.lam
    load = lam + g * mu * h
    h1 = report.h1.holds
    if report.h2 is not None:
        band = (1.0 - g) * (1.0 - phi(report.h2.sigma, spec.q)) * report.h2.c
        exist_bound, exist_stmt = band - g * mu * h, band - g * mu
    else:
        band = exist_bound = exist_stmt = math.nan
    nonexist = (1.0 - g) * report.h4.e - g * mu * h if report.h4 is not None else math.nan

    no_solution = h1 and report.h4 is not None and load > (1.0 - g) * report.h4.e
    unique = h1 and report.h5 and report.h6 is not None
    all_lambda = h1 and report.h3 is not None
    small = h1 and report.h2 is not None and load <= band

    notes = []
    if no_solution:
        for flag, name in ((unique, "Unique"), (all_lambda, "ExistsAllLambda"), (small, "ExistsSmallParam")):
            if flag:
                notes.append(f"NoSolution overlaps {name}")
    for note in notes:
        warnings.warn(f"({lam:g}, {mu:g}): {note}", ConsistencyWarning, stacklevel=2)

    if no_solution:
        verdict = Verdict.NO_SOLUTION
    elif unique:
        verdict = Verdict.UNIQUE
    elif all_lambda:
        verdict = Verdict.EXISTS_ALL_LAMBDA
    elif small:
        verdict = Verdict.EXISTS_SMALL_PARAM
    else:
        verdict = Verdict.INDETERMINATE
    return RegimeVerdict(lam, mu, verdict, exist_bound, nonexist, exist_stmt, tuple(notes))


# -- sweeps ---------------------------------------------------------------------


@dataclass
class SweepRow:
    verdict: RegimeVerdict
    solution: Solution | None = field(default=None, repr=False)


def sweep(
    template: ProblemSpec,
    lambdas: Sequence[float],
    mus: Sequence[float],
    *,
    delta: float = DEFAULT_DELTA,
    solve: bool = False,
    opts: SolverOptions | None = None,
    workers: int = 1,
    report: HypothesisReport | None = None,
) -> list[SweepRow]:
    """Classify (and optionally solve) every cell of a lambda-by-mu grid.

    The hypotheses do not depend on lambda or mu, so they are checked once.
    Rows come back lambda-major, mu-minor regardless of ``workers``.
    """
    report = report or check_hypotheses(template, delta)
    cells = [(float(l), float(m)) for l in lambdas for m in mus]

    def run(cell: tuple[float, float]) -> SweepRow:
        spec = template.with_params(lam=cell[0], mu=cell[1])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConsistencyWarning)
            verdict = classify(spec, report)
        sol = solve_fixed_point(spec, opts, raise_on_failure=False) if solve else None
        return SweepRow(verdict, sol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, cells))
    return [run(c) for c in cells]
