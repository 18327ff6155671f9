"""Exact rational scalars with +/-infinity endpoints.

Finite values are ``fractions.Fraction``; the only non-finite values are the
float sentinels ``INF`` and ``NEG_INF``.  Arithmetic never mixes a Fraction
with a float: the helpers below dispatch on the infinities first, so a
computation either stays exact or is a genuine extended value.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Q = Fraction
Ext = Union[Fraction, float]  # Fraction, INF or NEG_INF; no other floats

INF = float("inf")
NEG_INF = float("-inf")


def rat(value) -> Fraction:
    """Parse a finite rational from int, Fraction or a 'p/q' string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not a rational: {value!r}")


def ext(value) -> Ext:
    """Parse an extended rational; accepts 'inf' and '-inf' sentinels."""
    if value == INF or (isinstance(value, str) and value.strip() in ("inf", "+inf")):
        return INF
    if value == NEG_INF or (isinstance(value, str) and value.strip() == "-inf"):
        return NEG_INF
    return rat(value)


def is_finite(x: Ext) -> bool:
    return isinstance(x, Fraction)


def fmt(x: Ext) -> str:
    """Render an extended rational as 'p/q', 'inf' or '-inf'."""
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return str(x)


def xneg(x: Ext) -> Ext:
    if x == INF:
        return NEG_INF
    if x == NEG_INF:
        return INF
    return -x


def xadd(a: Ext, b: Ext) -> Ext:
    """Extended addition; +inf + -inf is rejected, it never arises here."""
    if a == INF or b == INF:
        if a == NEG_INF or b == NEG_INF:
            raise ValueError("inf - inf")
        return INF
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def xmul(a: Ext, b: Ext) -> Ext:
    """Extended multiplication with the convention 0 * inf = 0."""
    if is_finite(a) and is_finite(b):
        return a * b
    if a == 0 or b == 0:
        return Fraction(0)
    neg = (a < 0) != (b < 0)
    return NEG_INF if neg else INF


def xsum(terms) -> Ext:
    """Sum of extended values where +inf dominates -inf.

    Used for infima/costs of the form "any infeasible slot forces +inf":
    a +inf term wins over -inf terms.
    """
    total = Fraction(0)
    saw_neg = False
    for t in terms:
        if t == INF:
            return INF
        if t == NEG_INF:
            saw_neg = True
        elif not saw_neg:
            total += t
    return NEG_INF if saw_neg else total
