"""Per-precision mpmath contexts and exact conversions."""

from fractions import Fraction
from functools import lru_cache

import mpmath


@lru_cache(maxsize=None)
def precision_context(bits: int) -> mpmath.MPContext:
    """A private mpmath context fixed at ``bits`` mantissa bits.

    Contexts are never re-configured after creation, so concurrent orbits at
    different precisions do not interfere through the global ``mpmath.mp``.
    """
    ctx = mpmath.MPContext()
    ctx.prec = int(bits)
    return ctx


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of a finite mpf."""
    man, exp = x.man_exp
    man = int(man)
    if exp >= 0:
        return Fraction(man * 2 ** exp)
    return Fraction(man, 2 ** (-exp))


def fraction_to_mpf(ctx: mpmath.MPContext, value: Fraction):
    """Round a rational to the context precision."""
    value = Fraction(value)
    return ctx.mpf(value.numerator) / value.denominator
