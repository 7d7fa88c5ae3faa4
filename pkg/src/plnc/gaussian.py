"""Exact arithmetic on Gaussian integers and ratios of Gaussian integers.

Fade states that collapse a two-dimensional signal set live in the field of
fractions of Z[j], so everything here is integer-exact: no floats are used
except for explicit conversions requested by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "GaussianInt",
    "GaussianRational",
    "ZERO",
    "ONE",
    "J",
    "UNITS",
    "gi_norm",
    "gi_gcd",
    "gi_is_unit",
    "gi_relatively_prime",
    "gi_divides",
    "gi_factorize",
    "gr_reduce",
    "restricted_totient",
]


@dataclass(frozen=True, order=False)
class GaussianInt:
    """An element ``re + im*j`` of the lattice Z[j]."""

    re: int
    im: int

    def __add__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "GaussianInt":
        return GaussianInt(-self.re, -self.im)

    def conjugate(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def times_j(self) -> "GaussianInt":
        """Multiply by the unit j (a quarter turn counterclockwise)."""
        return GaussianInt(-self.im, self.re)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}j"
        return f"{self.re}{self.im:+d}j"


ZERO = GaussianInt(0, 0)
ONE = GaussianInt(1, 0)
J = GaussianInt(0, 1)
#: The four units of Z[j].
UNITS = (ONE, J, GaussianInt(-1, 0), GaussianInt(0, -1))


def gi_norm(x: GaussianInt) -> int:
    """Field norm ``re**2 + im**2`` (squared modulus, always a plain int)."""
    return x.re * x.re + x.im * x.im


def gi_is_unit(x: GaussianInt) -> bool:
    return gi_norm(x) == 1


def _round_half_down(num: int, den: int) -> int:
    # Nearest integer to num/den with ties toward -inf; den must be > 0.
    return -((den - 2 * num) // (2 * den))


def _divmod(x: GaussianInt, y: GaussianInt) -> tuple[GaussianInt, GaussianInt]:
    # Euclidean division: remainder norm is at most gi_norm(y) // 2.
    n = gi_norm(y)
    t = x * y.conjugate()
    q = GaussianInt(_round_half_down(t.re, n), _round_half_down(t.im, n))
    return q, x - q * y


def gi_divides(d: GaussianInt, x: GaussianInt) -> bool:
    """True when ``d`` divides ``x`` exactly in Z[j]."""
    if not d:
        raise ZeroDivisionError("zero divisor")
    t = x * d.conjugate()
    n = gi_norm(d)
    return t.re % n == 0 and t.im % n == 0


def _exact_div(x: GaussianInt, y: GaussianInt) -> GaussianInt:
    t = x * y.conjugate()
    n = gi_norm(y)
    if t.re % n or t.im % n:
        raise ValueError(f"{y} does not divide {x}")
    return GaussianInt(t.re // n, t.im // n)


def _canonical_associate(x: GaussianInt) -> tuple[GaussianInt, GaussianInt]:
    # Returns (c, u) with c = u*x, u a unit, c.re > 0 and c.im >= 0.  These
    # quarter-plane conditions pick exactly one of the four associates.
    if not x:
        raise ValueError("zero has no canonical associate")
    c, u = x, ONE
    while not (c.re > 0 and c.im >= 0):
        c = c.times_j()
        u = u.times_j()
    return c, u


def gi_gcd(x: GaussianInt, y: GaussianInt) -> GaussianInt:
    """Greatest common divisor in Z[j], normalized to re > 0, im >= 0."""
    if not x and not y:
        raise ValueError("gcd(0, 0) is undefined")
    while y:
        x, y = y, _divmod(x, y)[1]
    return _canonical_associate(x)[0]


def gi_relatively_prime(x: GaussianInt, y: GaussianInt) -> bool:
    return gi_is_unit(gi_gcd(x, y))


def _factor_int(n: int) -> list[tuple[int, int]]:
    # Trial division; n here is a norm, so it stays small in practice.
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _two_squares(p: int) -> tuple[int, int]:
    # p is a prime = 1 (mod 4); find (c, d) with c*c + d*d == p.
    for c in range(1, math.isqrt(p) + 1):
        d2 = p - c * c
        d = math.isqrt(d2)
        if d * d == d2:
            return c, d
    raise ValueError(f"{p} is not a sum of two squares")


def gi_factorize(x: GaussianInt) -> tuple[GaussianInt, tuple[GaussianInt, ...]]:
    """Factor ``x`` into ``unit * product(primes)`` over Z[j].

    Every prime in the returned tuple is normalized to the quarter plane
    re > 0, im >= 0, and the tuple is sorted by (norm, re).  The unit
    times the product of the primes reproduces ``x`` exactly.
    """
    if not x:
        raise ValueError("cannot factor zero")
    primes: list[GaussianInt] = []
    rest = x
    for p, _ in _factor_int(gi_norm(x)):
        if p == 2:
            cands = [GaussianInt(1, 1)]
        elif p % 4 == 3:
            cands = [GaussianInt(p, 0)]
        else:
            c, d = _two_squares(p)
            cands = [GaussianInt(c, d), GaussianInt(d, c)]
        for pi in cands:
            while gi_norm(rest) > 1 and gi_divides(pi, rest):
                rest = _exact_div(rest, pi)
                primes.append(pi)
    if not gi_is_unit(rest):
        raise AssertionError(f"factorization of {x} left non-unit {rest}")
    primes.sort(key=lambda q: (gi_norm(q), q.re))
    return rest, tuple(primes)


def restricted_totient(n: int) -> int:
    """Count integers k with 1 <= k < n and gcd(k, n) == 1.

    Unlike the classic totient this is 0 at n = 1: the value 1 itself is
    excluded, which is what the fade-state count needs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(1 for k in range(1, n) if math.gcd(k, n) == 1)


@dataclass(frozen=True)
class GaussianRational:
    """A ratio of Gaussian integers in lowest terms with canonical denominator.

    Instances should be built through :func:`gr_reduce`, which divides out
    the gcd and rotates the denominator into the quarter plane re > 0,
    im >= 0, so equal ratios compare equal as dataclasses.
    """

    num: GaussianInt
    den: GaussianInt

    def __complex__(self) -> complex:
        return complex(self.num) / complex(self.den)

    @property
    def real(self) -> Fraction:
        t = self.num * self.den.conjugate()
        return Fraction(t.re, gi_norm(self.den))

    @property
    def imag(self) -> Fraction:
        t = self.num * self.den.conjugate()
        return Fraction(t.im, gi_norm(self.den))

    def reciprocal(self) -> "GaussianRational":
        if not self.num:
            raise ZeroDivisionError("reciprocal of zero")
        return gr_reduce(self.den, self.num)

    def times_unit(self, u: GaussianInt) -> "GaussianRational":
        if not gi_is_unit(u):
            raise ValueError(f"{u} is not a unit")
        return gr_reduce(self.num * u, self.den)

    def __neg__(self) -> "GaussianRational":
        return gr_reduce(-self.num, self.den)

    def norm_le_one(self) -> bool:
        """True when the modulus is at most 1 (exact comparison)."""
        return gi_norm(self.num) <= gi_norm(self.den)

    def __str__(self) -> str:
        if self.den == ONE:
            return str(self.num)
        return f"({self.num})/({self.den})"


def gr_reduce(num: GaussianInt, den: GaussianInt) -> GaussianRational:
    """Build ``num/den`` in canonical reduced form."""
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return GaussianRational(ZERO, ONE)
    g = gi_gcd(num, den)
    num = _exact_div(num, g)
    den = _exact_div(den, g)
    den, u = _canonical_associate(den)
    return GaussianRational(num * u, den)
