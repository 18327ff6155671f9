"""Shared strategies and independent float oracles for the test suite.

The oracles here deliberately avoid the library's conjugate/recession
calculus: grid searches evaluate functions pointwise in floating point, so
they stay independent of the exact code paths they check.
"""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from cadlagconvex.plconvex import PLConvex, pl
from cadlagconvex.rationals import INF, NEG_INF, is_finite

small_fractions = st.fractions(min_value=-3, max_value=3, max_denominator=4)
slope_steps = st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4)


@st.composite
def plconvex_st(draw, max_breaks: int = 3):
    """Random canonical piecewise-linear convex function."""
    kind = draw(st.sampled_from(["line", "left", "right", "bounded", "singleton"]))
    if kind == "singleton":
        x = draw(small_fractions)
        return pl(x, x, (), (0,), x, draw(small_fractions))
    if kind == "line":
        dom_lo, dom_hi = NEG_INF, INF
    elif kind == "left":
        dom_lo, dom_hi = NEG_INF, draw(small_fractions)
    elif kind == "right":
        dom_lo, dom_hi = draw(small_fractions), INF
    else:
        a = draw(small_fractions)
        b = draw(small_fractions)
        dom_lo, dom_hi = min(a, b), max(a, b)
        if dom_lo == dom_hi:
            dom_hi = dom_lo + 1
    raw = draw(st.lists(small_fractions, max_size=max_breaks))
    inner = sorted({x for x in raw if dom_lo < x < dom_hi})
    s = draw(small_fractions)
    slopes = [s]
    for _ in inner:
        slopes.append(slopes[-1] + draw(slope_steps))
    anchor = dom_lo if is_finite(dom_lo) else (dom_hi if is_finite(dom_hi) else Fraction(0))
    return pl(dom_lo, dom_hi, inner, slopes, anchor, draw(small_fractions))


def pl_float(fn: PLConvex, xs: np.ndarray) -> np.ndarray:
    """Vectorized float evaluation; +inf outside the domain closure."""
    knots = fn.knots()
    out = np.full(xs.shape, np.inf)
    lo = -np.inf if fn.dom_lo == NEG_INF else float(fn.dom_lo)
    hi = np.inf if fn.dom_hi == INF else float(fn.dom_hi)
    inside = (xs >= lo) & (xs <= hi)
    if not knots:
        base = float(fn.anchor_val) + float(fn.slopes[0]) * (xs - float(fn.anchor_x))
        out[inside] = base[inside]
        return out
    kx = np.array([float(k) for k in knots])
    kv = np.array([float(fn.eval(k)) for k in knots])
    vals = np.interp(xs, kx, kv)
    left_tail = inside & (xs < kx[0])
    right_tail = inside & (xs > kx[-1])
    vals = np.where(left_tail, kv[0] + float(fn.slopes[0]) * (xs - kx[0]), vals)
    vals = np.where(right_tail, kv[-1] + float(fn.slopes[-1]) * (xs - kx[-1]), vals)
    out[inside] = vals[inside]
    return out


def conjugate_grid_oracle(fn: PLConvex, v, lo=-10.0, hi=10.0, step=1e-3) -> float:
    """sup over a float grid of v*x - fn(x); a lower bound of the conjugate."""
    xs = np.arange(lo, hi + step, step)
    vals = float(v) * xs - pl_float(fn, xs)
    finite = vals[np.isfinite(vals)]
    return float(finite.max()) if finite.size else -np.inf


def inf_grid_oracle(fn: PLConvex, lo=-10.0, hi=10.0, step=1e-3) -> float:
    xs = np.arange(lo, hi + step, step)
    vals = pl_float(fn, xs)
    finite = vals[np.isfinite(vals)]
    return float(finite.min()) if finite.size else np.inf


def recession_quotient(fn: PLConvex, x: Fraction, alpha: int = 10 ** 6):
    """Exact difference quotient (h(a + alpha*x) - h(a)) / alpha at the anchor."""
    a = fn.anchor_x
    val = fn.eval(a + alpha * x)
    if val == INF:
        return INF
    return (val - fn.eval(a)) / alpha
