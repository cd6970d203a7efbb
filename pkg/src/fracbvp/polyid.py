"""Exact Bernoulli, Euler and Genocchi numbers and polynomials, ordinary and higher order.

Each family is defined by the exponential generating function of its numbers
``c_n``::

    bernoulli   z / (e^z - 1)
    euler       2 / (e^z + 1)      (so E_n = E_n(0), not the secant numbers)
    genocchi    2z / (e^z + 1)     (G_0 = 0)

Order ``l`` numbers are the coefficients of the ``l``-th power of that
function, and the polynomials carry an extra factor ``e^{tz}``.  All
arithmetic is done in :class:`fractions.Fraction`; Caputo derivatives
convert to floats only when dividing by the gamma factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .errors import DomainError, ResourceError, ValidationError
from .fraccore import FracPoly, Order, as_order, caputo_power

__all__ = [
    "FAMILIES",
    "M_MAX",
    "RationalSeq",
    "PolyRational",
    "numbers",
    "higher_order_multinomial",
    "polynomial",
    "caputo_closed_form",
    "caputo_integer_exact",
    "power_rule_oracle",
    "max_relative_deviation",
]

FAMILIES = ("bernoulli", "euler", "genocchi")
M_MAX = 200
MULTINOMIAL_MAX_L = 6
MULTINOMIAL_MAX_M = 20


def _family(name: str) -> str:
    key = str(name).strip().lower()
    if key not in FAMILIES:
        raise ValidationError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    return key


def _check_l(l: int) -> int:
    if isinstance(l, bool) or not isinstance(l, int) or l < 1:
        raise ValidationError(f"order l must be an integer >= 1, got {l!r}")
    return l


def _check_m(m: int, name: str = "m") -> int:
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise ValidationError(f"{name} must be a nonnegative integer, got {m!r}")
    if m > M_MAX:
        raise ResourceError(f"{name} = {m} exceeds the coefficient growth guard {M_MAX}")
    return m


@dataclass(frozen=True)
class RationalSeq:
    family: str
    l: int
    values: tuple[Fraction, ...]

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)


@lru_cache(maxsize=None)
def _base(family: str, m_max: int) -> tuple[Fraction, ...]:
    if family == "bernoulli":
        # sum_{k<=n} C(n+1, k) B_k = 0
        b = [Fraction(1)]
        for n in range(1, m_max + 1):
            b.append(-sum(math.comb(n + 1, k) * b[k] for k in range(n)) / (n + 1))
        return tuple(b)
    # (e^z + 1) E(z) = 2  gives  2 E_n = -sum_{k<n} C(n, k) E_k  for n >= 1
    e = [Fraction(1)]
    for n in range(1, m_max + 1):
        e.append(-sum(math.comb(n, k) * e[k] for k in range(n)) / 2)
    if family == "euler":
        return tuple(e)
    return (Fraction(0),) + tuple(n * e[n - 1] for n in range(1, m_max + 1))


@lru_cache(maxsize=None)
def _higher(family: str, l: int, m_max: int) -> tuple[Fraction, ...]:
    base = _base(family, m_max)
    if l == 1:
        return base
    prev = _higher(family, l - 1, m_max)
    return tuple(
        sum(math.comb(m, j) * prev[j] * base[m - j] for j in range(m + 1)) for m in range(m_max + 1)
    )


def numbers(family: str, l: int, m_max: int) -> RationalSeq:
    """``c^{(l)}_0 .. c^{(l)}_{m_max}`` for the family's order-``l`` generating function."""
    fam = _family(family)
    l = _check_l(l)
    m_max = _check_m(m_max, "m_max")
    return RationalSeq(fam, l, _higher(fam, l, m_max))


def _compositions(m: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _compositions(m - first, parts - 1):
            yield (first,) + rest


def higher_order_multinomial(family: str, l: int, m: int) -> Fraction:
    """Order-``l`` number by direct enumeration over compositions of ``m`` into ``l`` parts.

    Independent of the convolution used by :func:`numbers`; the enumeration
    size is bounded by ``l <= 6`` and ``m <= 20``.
    """
    fam = _family(family)
    l = _check_l(l)
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise ValidationError(f"m must be a nonnegative integer, got {m!r}")
    if l > MULTINOMIAL_MAX_L or m > MULTINOMIAL_MAX_M:
        raise ResourceError(
            f"enumeration budget exceeded (l={l}, m={m}; limits l<={MULTINOMIAL_MAX_L}, m<={MULTINOMIAL_MAX_M})"
        )
    c = _base(fam, m)
    total = Fraction(0)
    mfact = math.factorial(m)
    for parts in _compositions(m, l):
        coeff = mfact
        prod = Fraction(1)
        for s in parts:
            coeff //= math.factorial(s)
            prod *= c[s]
        total += coeff * prod
    return total


@dataclass(frozen=True)
class PolyRational:
    """Polynomial with exact rational coefficients of ``t**0 .. t**m`` (ascending)."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs or (Fraction(0),))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def __call__(self, t):
        # Horner; exact for Fraction/int input
        acc = 0 * t
        for c in reversed(self.coefficients):
            acc = acc * t + (c if isinstance(t, (int, Fraction)) else float(c))
        return acc

    def derivative(self, n: int = 1) -> "PolyRational":
        coeffs = list(self.coefficients)
        for _ in range(n):
            coeffs = [k * coeffs[k] for k in range(1, len(coeffs))] or [Fraction(0)]
        return PolyRational(tuple(coeffs))

    def scale(self, factor) -> "PolyRational":
        return PolyRational(tuple(Fraction(factor) * c for c in self.coefficients))


def polynomial(family: str, m: int, l: int = 1) -> PolyRational:
    """``P^{(l)}_m(t) = sum_k C(m, k) c^{(l)}_{m-k} t^k``."""
    fam = _family(family)
    m = _check_m(m)
    c = _higher(fam, _check_l(l), m)
    return PolyRational(tuple(math.comb(m, k) * c[m - k] for k in range(m + 1)))


def _div_gamma(r: Fraction, x: float) -> float:
    """``r / Gamma(x)`` as a float, in log space when either side overflows."""
    try:
        num = float(r)
        g = math.gamma(x)
        if math.isfinite(num) and math.isfinite(g):
            return num / g
    except OverflowError:
        pass
    sign = -1.0 if r < 0 else 1.0
    mag = math.log(abs(r.numerator)) - math.log(r.denominator) - math.lgamma(x)
    return sign * math.exp(mag)


def caputo_closed_form(family: str, l: int, m: int, alpha: float | Order) -> FracPoly:
    """Caputo derivative of ``P^{(l)}_m`` from the closed form.

    With ``n = ceil(alpha)`` the term ``k = 0 .. m-n`` is::

        m!/(m-n)! * k! * C(m-n, k) * c^{(l)}_{m-n-k} / Gamma(n+k-alpha+1) * t**(k-alpha+n)

    The rational part is exact.  ``m < n`` gives the zero polynomial.
    """
    fam = _family(family)
    l = _check_l(l)
    m = _check_m(m)
    a = as_order(alpha)
    n = a.n
    if m < n:
        return FracPoly()
    c = _higher(fam, l, m)
    lead = math.factorial(m) // math.factorial(m - n)
    terms = []
    for k in range(m - n + 1):
        exact = lead * math.factorial(k) * math.comb(m - n, k) * c[m - n - k]
        if exact == 0:
            continue
        j = n + k
        terms.append((_div_gamma(Fraction(exact), j - a.value + 1.0), float(j) - a.value))
    return FracPoly(terms)


def caputo_integer_exact(family: str, l: int, m: int, n: int) -> PolyRational:
    """Closed form at integer order ``n``: ``m!/(m-n)! * P^{(l)}_{m-n}``, all exact."""
    fam = _family(family)
    m = _check_m(m)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"integer order must be >= 1, got {n!r}")
    if m < n:
        return PolyRational((Fraction(0),))
    return polynomial(fam, m - n, l).scale(math.factorial(m) // math.factorial(m - n))


def power_rule_oracle(poly: PolyRational, alpha: float | Order) -> FracPoly:
    """Termwise Caputo derivative of an exact polynomial via the power rule."""
    a = as_order(alpha)
    terms = []
    for j, c in enumerate(poly.coefficients):
        if c == 0:
            continue
        for coeff, expo in caputo_power(j, a).terms:
            terms.append((float(c) * coeff, expo))
    return FracPoly(terms)


def max_relative_deviation(a: FracPoly, b: FracPoly) -> float:
    """Largest termwise relative difference; ``inf`` when the exponent sets differ."""
    if a.exponents != b.exponents:
        return math.inf
    worst = 0.0
    for (ca, _), (cb, _) in zip(a.terms, b.terms):
        worst = max(worst, abs(ca - cb) / max(abs(ca), abs(cb)))
    return worst
