"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``[ACCEPTANCE n] PASS|FAIL`` line (visible in ``pytest -v``
output) before asserting.
"""

import time

import numpy as np
import pytest
from scipy import special

from conftest import demo_spec
from fracbvp.bvp import SolverOptions, lower_bound_check, solve_fixed_point, solve_linear
from fracbvp.cli import main
from fracbvp.errors import Diverged, MaxIterExceeded
from fracbvp.fraccore import GridFunction, caputo_power, phi, phi_inverse, rl_integral
from fracbvp.green import green_inner_integral, kernel_property_summary
from fracbvp.polyid import (
    FAMILIES,
    caputo_closed_form,
    higher_order_multinomial,
    numbers,
    polynomial,
    power_rule_oracle,
)
from fracbvp.regime import check_hypotheses, classify


@pytest.fixture
def verdict(capsys):
    def emit(n: int, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n[ACCEPTANCE {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def test_1_green_kernel(verdict):
    start = time.perf_counter()
    summaries = [kernel_property_summary(b, n=201) for b in (3.1, 3.5, 4.0)]
    elapsed = time.perf_counter() - start
    ok = all(s.passes(slack=1e-12, branch_slack=1e-14) for s in summaries) and elapsed < 1.0
    worst_gap = max(s.max_branch_gap for s in summaries)
    worst = max(max(-s.min_value, s.max_dominance_excess, s.max_lower_bound_deficit) for s in summaries)
    assert verdict(1, ok, f"worst violation {worst:.2e}, branch gap {worst_gap:.1e}, {elapsed:.3f} s")


def test_2_row_integral(verdict):
    w = GridFunction.constant(1.0, 1025)
    s = np.linspace(0.0, 1.0, 101)
    worst = 0.0
    for beta in (3.1, 3.5, 4.0):
        exact = s / special.gamma(beta) - s**beta / special.gamma(beta + 1)
        got = np.array([green_inner_integral(si, w, beta) for si in s])
        worst = max(worst, float(np.max(np.abs(got - exact))))
    assert verdict(2, worst <= 1e-8, f"max error {worst:.2e} over 101 s and beta in 3.1, 3.5, 4.0")


def _manufactured_error(alpha, N, gamma=0.5, h=0.5, lam=0.1, mu=0.1):
    (c, e), = caputo_power(2, alpha).terms
    y = GridFunction.from_function(lambda t: c * t**e, N)
    u = solve_linear(y, alpha, gamma, h, lam, mu)
    exact = u.t**2 + mu * u.t + (gamma * h**2 + lam + gamma * mu * h) / (1 - gamma)
    return float(np.max(np.abs(u.values - exact)))


def test_3_manufactured_linear(verdict):
    parts, ok = [], True
    for alpha in (1.25, 1.5, 2.0):
        e1 = _manufactured_error(alpha, 1025)
        e2 = _manufactured_error(alpha, 2050)
        ratio = e1 / e2 if e2 > 0 else np.inf
        good = e1 <= 1e-6 and 3.5 <= ratio <= 4.5
        ok &= good
        parts.append(f"alpha={alpha}: err={e1:.2e} ratio={ratio:.2f}")
    assert verdict(3, ok, "; ".join(parts))


@pytest.fixture(scope="module")
def demo_runs():
    spec = demo_spec()
    start = time.perf_counter()
    a = solve_fixed_point(spec, SolverOptions(N=2049, start=0.0))
    elapsed = time.perf_counter() - start
    b = solve_fixed_point(spec, SolverOptions(N=2049, start=10.0))
    return spec, a, b, elapsed


def test_4_fixed_point_demo(verdict, demo_runs):
    _, a, b, elapsed = demo_runs
    gap = float(np.max(np.abs(a.u.values - b.u.values)))
    bc = max(abs(r) for r in a.bc_residuals + b.bc_residuals)
    ok = (
        a.converged and b.converged
        and max(a.fp_residual, b.fp_residual) < 1e-8
        and bc < 1e-6
        and max(a.iterations, b.iterations) <= 200
        and elapsed < 5.0
        and gap <= 1e-6
    )
    detail = (
        f"fp={max(a.fp_residual, b.fp_residual):.1e} bc={bc:.1e} iters={a.iterations}/{b.iterations} "
        f"time={elapsed:.3f}s start-gap={gap:.1e}"
    )
    assert verdict(4, ok, detail)


@pytest.fixture(scope="module")
def square_runs():
    spec = demo_spec(f=np.square)
    report = check_hypotheses(spec)
    v = classify(spec, report)
    inside = spec.with_params(lam=0.5 * v.lambda_exist_bound)
    sol = solve_fixed_point(inside, SolverOptions(N=1025))
    lam_out = 10 * (1 - spec.gamma) * report.h4.e - spec.gamma * spec.mu * spec.h
    try:
        solve_fixed_point(spec.with_params(lam=lam_out))
        outside = "converged"
    except (MaxIterExceeded, Diverged) as err:
        outside = type(err).__name__
    return report, v, inside, sol, lam_out, outside


def test_5_regime_consistency(verdict, square_runs):
    report, v, inside, sol, lam_out, outside = square_runs
    ok = (
        report.h2 is not None
        and report.h4 is not None
        and 0 < inside.lam < v.lambda_exist_bound
        and sol.converged
        and sol.fp_residual < 1e-8
        and outside in ("MaxIterExceeded", "Diverged")
    )
    detail = (
        f"H2 c={report.h2.c:.3g} sigma={report.h2.sigma:.3g}; H4 e={report.h4.e:.4g}; "
        f"lam={inside.lam:.3g} fp={sol.fp_residual:.1e}; lam={lam_out:.4g} -> {outside}"
    )
    assert verdict(5, ok, detail)


def test_6_lower_bound(verdict, demo_runs, square_runs):
    spec, a, b, _ = demo_runs
    _, _, inside, sol, _, _ = square_runs
    checks = [
        lower_bound_check(u, 0.5, s.alpha, s.beta, s.q, slack=1e-9)
        for u, s in ((a.u, spec), (b.u, spec), (sol.u, inside))
    ]
    ok = all(c.passed for c in checks)
    margin = min(c.min_margin for c in checks)
    assert verdict(6, ok, f"3 solutions, smallest margin {margin:.3e}, c_delta={checks[0].c_delta:.5f}")


def test_7_polyid_suite(verdict):
    start = time.perf_counter()
    worst, exps_ok = 0.0, True
    for family in FAMILIES:
        for l in (1, 2, 3):
            for m in range(11):
                for alpha in (0.5, 1.25, 1.5, 2.5, 3.5):
                    closed = caputo_closed_form(family, l, m, alpha)
                    oracle = power_rule_oracle(polynomial(family, m, l), alpha)
                    exps_ok &= closed.exponents == oracle.exponents
                    for (c1, _), (c2, _) in zip(closed.terms, oracle.terms):
                        worst = max(worst, abs(c1 - c2) / abs(c2))
    multi_ok = all(
        higher_order_multinomial(f, l, m) == numbers(f, l, 12)[m]
        for f in FAMILIES
        for l in range(1, 5)
        for m in range(13)
    )
    b, g = numbers("bernoulli", 1, 20), numbers("genocchi", 1, 20)
    geno_ok = all(g[n] == 2 * (1 - 2**n) * b[n] for n in range(21))
    elapsed = time.perf_counter() - start
    ok = exps_ok and worst <= 1e-10 and multi_ok and geno_ok and elapsed < 10.0
    detail = f"max rel dev {worst:.1e}, exponents {exps_ok}, multinomial {multi_ok}, Genocchi {geno_ok}, {elapsed:.2f}s"
    assert verdict(7, ok, detail)


def _semigroup_gap(N):
    y = GridFunction.from_function(lambda t: np.sin(np.pi * t), N)
    return float(np.max(np.abs(rl_integral(rl_integral(y, 0.7), 0.5).values - rl_integral(y, 1.2).values)))


def test_8_fraccore_properties(verdict):
    rng = np.random.default_rng(2024)
    x = rng.uniform(-1e3, 1e3, 10_000)
    p = 1.0 + rng.uniform(0.0, 4.0, 10_000)
    p = np.where(p > 1.0, p, 5.0)
    trip = max(abs(phi_inverse(phi(xi, pi), pi) - xi) / (1.0 + abs(xi)) for xi, pi in zip(x, p))
    gaps = [_semigroup_gap(N) for N in (1025, 2050)]
    ratio = gaps[0] / gaps[1]
    ok = trip <= 1e-12 and gaps[0] <= 1e-4 and 3.5 <= ratio <= 4.5
    assert verdict(8, ok, f"phi round trip {trip:.1e}; semigroup gap {gaps[0]:.1e} at N=1025, N->2N ratio {ratio:.2f}")


def test_9_cli_determinism(verdict, tmp_path, capsys):
    cfg = tmp_path / "sq.cfg"
    cfg.write_text(
        "alpha = 1.5\nbeta = 3.5\np = 2\ngamma = 0.5\nh = 0.5\na = 1\nf = u^2\n"
        "lambda_range = 0.05:400:6\nmu_range = 0.1:2:3\n"
    )
    outs = []
    for i in range(2):
        out = tmp_path / f"sweep{i}.csv"
        assert main(["sweep", "--config", str(cfg), "--solve", "--grid", "128", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    capsys.readouterr()
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    assert verdict(9, ok, f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}")
