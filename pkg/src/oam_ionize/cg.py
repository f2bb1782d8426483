"""Exact Clebsch-Gordan coefficients for integer angular momenta.

The coefficient <l1,l2; m1,m2 | L,M> is evaluated from the Racah closed
form using exact integer/rational arithmetic (``fractions.Fraction``),
so that structural zeros (triangle violations, parity zeros such as
<l-1,2; 0,0 | l,0> = 0) are exact zeros, not small floats.  The value is
converted to floating point only at the API boundary.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, isqrt, sqrt

__all__ = ["clebsch_gordan", "clebsch_gordan_exact"]


def _validate(l1: int, l2: int, m1: int, m2: int, L: int, M: int) -> None:
    for name, l, m in (("l1", l1, m1), ("l2", l2, m2), ("L", L, M)):
        if l < 0:
            raise ValueError(f"{name} must be non-negative, got {l}")
        if abs(m) > l:
            raise ValueError(f"|m| <= {name} violated: l={l}, m={m}")


@lru_cache(maxsize=65536)
def clebsch_gordan_exact(
    l1: int, l2: int, m1: int, m2: int, L: int, M: int
) -> tuple[int, Fraction]:
    """Sign and exact square of <l1,l2; m1,m2 | L,M>.

    Returns
    -------
    (sign, square) : tuple[int, Fraction]
        ``sign`` in {-1, 0, +1} and the exact rational ``square`` such
        that the coefficient equals ``sign * sqrt(square)``.

    Raises
    ------
    ValueError
        If any l is negative or |m| > l.
    """
    _validate(l1, l2, m1, m2, L, M)
    if M != m1 + m2 or L < abs(l1 - l2) or L > l1 + l2:
        return 0, Fraction(0)

    kmin = max(0, l2 - L - m1, l1 - L + m2)
    kmax = min(l1 + l2 - L, l1 - m1, l2 + m2)
    if kmin > kmax:
        return 0, Fraction(0)

    # Alternating Racah sum, accumulated exactly.
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            factorial(k)
            * factorial(l1 + l2 - L - k)
            * factorial(l1 - m1 - k)
            * factorial(l2 + m2 - k)
            * factorial(L - l2 + m1 + k)
            * factorial(L - l1 - m2 + k)
        )
        s += Fraction((-1) ** k, den)
    if s == 0:
        return 0, Fraction(0)

    prefac = Fraction(
        (2 * L + 1)
        * factorial(L + l1 - l2)
        * factorial(L - l1 + l2)
        * factorial(l1 + l2 - L),
        factorial(l1 + l2 + L + 1),
    )
    prefac *= (
        factorial(L + M)
        * factorial(L - M)
        * factorial(l1 - m1)
        * factorial(l1 + m1)
        * factorial(l2 - m2)
        * factorial(l2 + m2)
    )
    sign = 1 if s > 0 else -1
    return sign, prefac * s * s


def _sqrt_fraction(f: Fraction) -> float:
    # Avoid overflow for large factorial ratios: take exact integer square
    # roots when available, otherwise fall back to float division first.
    num, den = f.numerator, f.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return rn / rd
    return sqrt(num / den)


def clebsch_gordan(l1: int, l2: int, m1: int, m2: int, L: int, M: int) -> float:
    """Clebsch-Gordan coefficient <l1,l2; m1,m2 | L,M> as a float.

    Exactly zero (the float ``0.0``) whenever the exact coefficient
    vanishes: M != m1+m2, triangle inequality failure, or a structural
    zero of the Racah sum.

    Examples
    --------
    >>> clebsch_gordan(1, 0, 1, 0, 1, 1)
    1.0
    >>> clebsch_gordan(0, 2, 0, 0, 1, 0)   # <l-1,2;0,0|l,0> at l=1
    0.0
    """
    sign, sq = clebsch_gordan_exact(l1, l2, m1, m2, L, M)
    if sign == 0:
        return 0.0
    return sign * _sqrt_fraction(sq)
