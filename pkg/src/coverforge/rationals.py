"""Exact rational arithmetic helpers.

All numeric state in this package is rational (arbitrary precision) or an
infinite endpoint sentinel.  gmpy2.mpq is used when available because the
sampling suites evaluate fields at 10^4+ points; plain Fraction is the
fallback.  Infinite endpoints are represented by ``math.inf`` / ``-math.inf``
floats, which compare correctly against rationals but must never enter
rational arithmetic.
"""

import math

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - gmpy2 is normally present
    from fractions import Fraction as Q

INF = math.inf
NEG_INF = -math.inf

ZERO = Q(0)
ONE = Q(1)


def is_finite(x):
    """True for rational endpoints, False for the +-inf sentinels."""
    return not isinstance(x, float)


def q_floor(x):
    x = Q(x)
    return int(x.numerator) // int(x.denominator)


def q_ceil(x):
    x = Q(x)
    return -((-int(x.numerator)) // int(x.denominator))


def q_min(*xs):
    return min(xs)


def q_max(*xs):
    return max(xs)


def parse_q(s):
    """Parse "p/q", "p", "+inf" or "-inf"."""
    if s == "+inf" or s == "inf":
        return INF
    if s == "-inf":
        return NEG_INF
    return Q(str(s))


def format_q(x):
    """Inverse of parse_q; rationals render as "p" or "p/q"."""
    if not is_finite(x):
        return "+inf" if x > 0 else "-inf"
    return str(Q(x))


def sqrt_lower(x, bits=40):
    """Largest rational of the form t / 2^bits*den with square <= x."""
    x = Q(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    num, den = int(x.numerator), int(x.denominator)
    scale = 1 << bits
    t = math.isqrt(num * den * scale * scale)
    return Q(t, den * scale)


def sqrt_upper(x, bits=40):
    """Rational upper bound for sqrt(x); exceeds sqrt_lower by < 2^-bits."""
    x = Q(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    num, den = int(x.numerator), int(x.denominator)
    scale = 1 << bits
    t = math.isqrt(num * den * scale * scale)
    if t * t == num * den * scale * scale:
        return Q(t, den * scale)
    return Q(t + 1, den * scale)


def is_perfect_square(x):
    x = Q(x)
    if x < 0:
        return False
    n, d = int(x.numerator), int(x.denominator)
    rn, rd = math.isqrt(n), math.isqrt(d)
    return rn * rn == n and rd * rd == d


def exact_sqrt(x):
    """Exact rational square root; raises if x is not a perfect square."""
    if not is_perfect_square(x):
        raise ValueError("not a perfect rational square: %s" % (x,))
    x = Q(x)
    return Q(math.isqrt(int(x.numerator)), math.isqrt(int(x.denominator)))
