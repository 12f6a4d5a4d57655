"""Exact Wigner 3j and 6j symbols.

The light-shift sum squares individually tiny symbols and adds dozens of
terms, so cancellation noise from floating-point Racah sums is not
acceptable.  Both symbols are therefore evaluated with the Racah closed
forms rearranged into pure big-integer binomial sums; the only floating
point operation is the final square root at the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, perm, sqrt

__all__ = ["AngularMomentumError", "HalfInt", "wigner3j", "wigner6j"]


class AngularMomentumError(ValueError):
    """Arguments are not valid angular-momentum quantum numbers."""


@dataclass(frozen=True, order=True)
class HalfInt:
    """Integer or half-integer quantum number stored as twice its value,
    so 3/2 is HalfInt(3) and 2 is HalfInt(4).  Exact by construction."""

    twice_value: int

    @classmethod
    def of(cls, x) -> "HalfInt":
        """Coerce an int, float, Fraction or HalfInt; reject anything that
        is not an exact multiple of 1/2."""
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, int):
            return cls(2 * x)
        doubled = 2 * x
        twice = int(doubled)
        if twice != doubled:
            raise AngularMomentumError(f"{x!r} is not an integer or half-integer")
        return cls(twice)

    @property
    def value(self) -> float:
        return self.twice_value / 2

    def __float__(self) -> float:
        return self.twice_value / 2

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


def _twice_j(x, what: str) -> int:
    t = HalfInt.of(x).twice_value
    if t < 0:
        raise AngularMomentumError(f"{what} must be >= 0, got {t / 2}")
    return t


def _twice_m(j_twice: int, x, what: str) -> int:
    t = HalfInt.of(x).twice_value
    if abs(t) > j_twice or (j_twice - t) % 2:
        raise AngularMomentumError(
            f"invalid (j, m) pair: j={j_twice / 2}, {what}={t / 2}")
    return t


def _triangle(ta: int, tb: int, tc: int) -> bool:
    return abs(ta - tb) <= tc <= ta + tb and (ta + tb + tc) % 2 == 0


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Arguments may be ints, exact half-integer floats/Fractions, or HalfInt.
    Selection-rule failures (m-sum, triangle, parity) return exactly 0.0;
    an invalid (j, m) pair raises AngularMomentumError instead, since that
    is a caller bug rather than a legitimate vanishing term.
    """
    tj1 = _twice_j(j1, "j1")
    tj2 = _twice_j(j2, "j2")
    tj3 = _twice_j(j3, "j3")
    tm1 = _twice_m(tj1, m1, "m1")
    tm2 = _twice_m(tj2, m2, "m2")
    tm3 = _twice_m(tj3, m3, "m3")
    return _w3(tj1, tj2, tj3, tm1, tm2, tm3)


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.

    Returns exactly 0.0 when any of the four triads fails the triangle
    rule or has a non-integer sum.
    """
    args = (_twice_j(j1, "j1"), _twice_j(j2, "j2"), _twice_j(j3, "j3"),
            _twice_j(j4, "j4"), _twice_j(j5, "j5"), _twice_j(j6, "j6"))
    return _w6(*args)


# lru_cache doubles as the concurrency story: entries are pure values, and
# CPython's cache is safe under concurrent readers/writers.

@lru_cache(maxsize=None)
def _w3(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    if tm1 + tm2 + tm3 != 0 or not _triangle(tj1, tj2, tj3):
        return 0.0
    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    x2 = (tj1 - tm1) // 2
    x3 = (tj2 + tm2) // 2
    # Racah sum folded into binomials: every term is an integer
    s = 0
    for t in range(max(0, x2 - b, x3 - c), min(a, x2, x3) + 1):
        s += (-1) ** t * comb(a, t) * comb(b, x2 - t) * comb(c, x3 - t)
    if s == 0:
        return 0.0
    num = (factorial((tj1 + tm1) // 2) * factorial((tj1 - tm1) // 2)
           * factorial((tj2 + tm2) // 2) * factorial((tj2 - tm2) // 2)
           * factorial((tj3 + tm3) // 2) * factorial((tj3 - tm3) // 2)) * s * s
    den = (factorial(a) * factorial(b) * factorial(c)
           * factorial((tj1 + tj2 + tj3) // 2 + 1))
    negative = (s < 0) ^ bool(((tj1 - tj2 - tm3) // 2) % 2)
    mag = sqrt(float(Fraction(num, den)))
    return -mag if negative else mag


def _delta2(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        factorial((ta + tb - tc) // 2)
        * factorial((ta - tb + tc) // 2)
        * factorial((-ta + tb + tc) // 2),
        factorial((ta + tb + tc) // 2 + 1),
    )


@lru_cache(maxsize=None)
def _w6(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    if not all(_triangle(*tri) for tri in triads):
        return 0.0
    t1 = (ta + tb + tc) // 2
    t2 = (ta + te + tf) // 2
    t3 = (td + tb + tf) // 2
    t4 = (td + te + tc) // 2
    q1 = (ta + tb + td + te) // 2
    q2 = (tb + tc + te + tf) // 2
    q3 = (ta + tc + td + tf) // 2
    s = 0
    for z in range(max(t1, t2, t3, t4), min(q1, q2, q3) + 1):
        s += ((-1) ** z * perm(z + 1, t4 + 1)
              * comb(q1 - t1, z - t1) * comb(q2 - t2, z - t2)
              * comb(q3 - t3, z - t3))
    if s == 0:
        return 0.0
    mag2 = Fraction(
        s * s,
        (factorial(q1 - t1) * factorial(q2 - t2) * factorial(q3 - t3)) ** 2,
    )
    for tri in triads:
        mag2 *= _delta2(*tri)
    mag = sqrt(float(mag2))
    return -mag if s < 0 else mag
