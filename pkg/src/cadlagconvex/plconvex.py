"""Proper closed convex piecewise-linear functions of one real variable.

A ``PLConvex`` value is stored in canonical form: an effective domain
``[dom_lo, dom_hi]`` (endpoints may be infinite), strictly increasing
breakpoints inside the open domain, strictly increasing slopes (one per
segment), and an anchor point with its finite function value.  Canonical form
makes structural equality a valid test of function equality, which the
conjugation involution relies on.

Everything here is exact: inputs are rationals, outputs are rationals or the
infinity sentinels.  Values are immutable and all operations are pure, so
concurrent read-only use is safe.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

from .rationals import INF, NEG_INF, Ext, Q, is_finite, rat, xmul


# ---------------------------------------------------------------------------
# Closed real intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RInterval:
    """Nonempty closed interval of the reals, or the distinct empty sentinel."""

    lo: Ext
    hi: Ext

    def __post_init__(self):
        for name in ("lo", "hi"):
            v = getattr(self, name)
            if isinstance(v, float):
                if v != INF and v != NEG_INF:
                    raise ValueError("interval endpoints must be rational or infinite")
            elif not isinstance(v, Fraction):
                object.__setattr__(self, name, rat(v))
        if self.lo == INF and self.hi == NEG_INF:
            return  # canonical empty sentinel
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval bounds [{self.lo}, {self.hi}]")
        if self.lo == INF or self.hi == NEG_INF:
            raise ValueError("interval endpoint has the wrong infinity")

    @property
    def is_empty(self) -> bool:
        return self.lo == INF and self.hi == NEG_INF

    def contains(self, x: Ext) -> bool:
        return (not self.is_empty) and self.lo <= x <= self.hi

    def intersect(self, other: "RInterval") -> "RInterval":
        if self.is_empty or other.is_empty:
            return EMPTY_INTERVAL
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return RInterval(lo, hi) if lo <= hi else EMPTY_INTERVAL

    def issubset(self, other: "RInterval") -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    @property
    def is_degenerate(self) -> bool:
        """Single point (empty interior)."""
        return (not self.is_empty) and self.lo == self.hi

    @property
    def has_interior(self) -> bool:
        return (not self.is_empty) and self.lo < self.hi

    def nearest_to(self, x: Q) -> Q:
        """Metric projection of a finite point onto the interval."""
        if self.is_empty:
            raise ValueError("projection onto the empty interval")
        if is_finite(self.lo) and x < self.lo:
            return self.lo
        if is_finite(self.hi) and x > self.hi:
            return self.hi
        return x

    def distance_to(self, x: Q) -> Q:
        return abs(x - self.nearest_to(x))

    def support(self, v: Q) -> Ext:
        """Support function value sup {v*x : x in interval}."""
        if self.is_empty:
            return NEG_INF
        if v > 0:
            return xmul(self.hi, v)
        if v < 0:
            return xmul(self.lo, v)
        return Fraction(0)

    @classmethod
    def whole_line(cls) -> "RInterval":
        return cls(NEG_INF, INF)

    @classmethod
    def singleton(cls, x: Q) -> "RInterval":
        x = rat(x)
        return cls(x, x)

    def __repr__(self):
        if self.is_empty:
            return "RInterval.EMPTY"
        return f"[{self.lo}, {self.hi}]"


EMPTY_INTERVAL = RInterval(INF, NEG_INF)


# ---------------------------------------------------------------------------
# Piecewise-linear convex functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PLConvex:
    """Proper closed convex piecewise-linear function on the reals.

    The function equals +inf outside ``[dom_lo, dom_hi]`` and is finite on it.
    ``slopes[j]`` is the slope on the j-th segment between consecutive knots
    ``dom_lo, breakpoints..., dom_hi``.  Improper (-inf valued) functions are
    not representable.  Use :func:`pl` or the factory helpers rather than
    the raw constructor; construction canonicalizes and validates.
    """

    dom_lo: Ext
    dom_hi: Ext
    breakpoints: Tuple[Q, ...]
    slopes: Tuple[Q, ...]
    anchor_x: Q
    anchor_val: Q

    # -- evaluation ---------------------------------------------------------

    def eval(self, x: Ext) -> Ext:
        """Function value at x; +inf outside the domain closure."""
        if not is_finite(x):
            return self._tail_limit(x)
        if not (self.dom_lo <= x <= self.dom_hi):
            return INF
        return self._finite_value(x)

    __call__ = eval

    def _tail_limit(self, x: Ext) -> Ext:
        # limit value at an infinite argument; +inf when outside the domain
        if x == INF:
            if self.dom_hi != INF:
                return INF
            s = self.slopes[-1]
            return INF if s > 0 else (NEG_INF if s < 0 else self._finite_value(self._last_knot()))
        if self.dom_lo != NEG_INF:
            return INF
        s = self.slopes[0]
        return INF if s < 0 else (NEG_INF if s > 0 else self._finite_value(self._first_knot()))

    def _first_knot(self) -> Q:
        if is_finite(self.dom_lo):
            return self.dom_lo
        return self.breakpoints[0] if self.breakpoints else self.anchor_x

    def _last_knot(self) -> Q:
        if is_finite(self.dom_hi):
            return self.dom_hi
        return self.breakpoints[-1] if self.breakpoints else self.anchor_x

    def _finite_value(self, x: Q) -> Q:
        """Walk segments from the anchor; x must lie in the domain closure."""
        a, b = (self.anchor_x, x) if self.anchor_x <= x else (x, self.anchor_x)
        sign = 1 if self.anchor_x <= x else -1
        bps = self.breakpoints
        val = self.anchor_val
        prev = a
        j = bisect_left(bps, a)
        while j < len(bps) and bps[j] < b:
            val += sign * self.slopes[j] * (bps[j] - prev)
            prev = bps[j]
            j += 1
        val += sign * self.slopes[j] * (b - prev)
        return val

    # -- structure ----------------------------------------------------------

    @property
    def domain(self) -> RInterval:
        return RInterval(self.dom_lo, self.dom_hi)

    def knots(self) -> Tuple[Q, ...]:
        """Finite domain endpoints and breakpoints, increasing."""
        ks = []
        if is_finite(self.dom_lo):
            ks.append(self.dom_lo)
        ks.extend(self.breakpoints)
        if is_finite(self.dom_hi) and (not ks or self.dom_hi > ks[-1]):
            ks.append(self.dom_hi)
        return tuple(ks)

    # -- the convex calculus -------------------------------------------------

    def conjugate(self) -> "PLConvex":
        """Fenchel conjugate h*(v) = sup_x {v*x - h(x)}, exact.

        Breakpoints and slopes exchange roles: the slopes of h become the
        kinks of h*, the finite knots of h become the slopes of h*, and a
        finite domain endpoint of h turns into an unbounded tail of h*.
        """
        if self.dom_lo == self.dom_hi:
            # delta_{a} + c  ->  affine v*a - c
            a, c = self.dom_lo, self.anchor_val
            return pl(NEG_INF, INF, (), (a,), Fraction(0), -c)
        if not self.breakpoints and self.dom_lo == NEG_INF and self.dom_hi == INF:
            # affine on the whole line -> point mass at the slope
            s = self.slopes[0]
            return pl(s, s, (), (Fraction(0),), s, s * self.anchor_x - self.anchor_val)
        v_lo = self.slopes[0] if self.dom_lo == NEG_INF else NEG_INF
        v_hi = self.slopes[-1] if self.dom_hi == INF else INF
        bps = list(self.slopes)
        if self.dom_lo == NEG_INF:
            bps = bps[1:]
        if self.dom_hi == INF:
            bps = bps[:-1]
        slopes = self.knots()
        if bps:
            v0 = bps[0]
        else:
            v0 = v_lo if is_finite(v_lo) else v_hi
        val0 = max(v0 * x - self._finite_value(x) for x in slopes)
        return pl(v_lo, v_hi, bps, slopes, v0, val0)

    def recession(self) -> "PLConvex":
        """Recession function: asymptotic slopes, +inf past a finite domain end."""
        zero = Fraction(0)
        lo_unbounded = self.dom_lo == NEG_INF
        hi_unbounded = self.dom_hi == INF
        if lo_unbounded and hi_unbounded:
            s0, s1 = self.slopes[0], self.slopes[-1]
            if s0 == s1:
                return pl(NEG_INF, INF, (), (s0,), zero, zero)
            return pl(NEG_INF, INF, (zero,), (s0, s1), zero, zero)
        if hi_unbounded:
            return pl(zero, INF, (), (self.slopes[-1],), zero, zero)
        if lo_unbounded:
            return pl(NEG_INF, zero, (), (self.slopes[0],), zero, zero)
        return pl(zero, zero, (), (zero,), zero, zero)

    def subdiff(self, x: Q) -> RInterval:
        """Subdifferential at x: [left slope, right slope], empty outside dom."""
        x = rat(x)
        if not (self.dom_lo <= x <= self.dom_hi):
            return EMPTY_INTERVAL
        bps = self.breakpoints
        i = bisect_left(bps, x)
        if i < len(bps) and bps[i] == x:
            left: Ext = self.slopes[i]
            right: Ext = self.slopes[i + 1]
        else:
            left = right = self.slopes[i]
        if x == self.dom_lo:
            left = NEG_INF
        if x == self.dom_hi:
            right = INF
        return RInterval(left, right)

    def inf_over(self, constraint: RInterval) -> Tuple[Ext, RInterval]:
        """Infimum of the function over a closed interval, with its argmin set.

        Returns ``(+inf, EMPTY)`` when the constraint misses the domain and
        ``(-inf, EMPTY)`` when the function is unbounded below there.
        """
        feasible = constraint.intersect(self.domain)
        if feasible.is_empty:
            return INF, EMPTY_INTERVAL
        arg_lo, arg_hi = self._unconstrained_argmin()
        if arg_lo is None:
            # slope sign points down an unbounded end: NEG_INF for hi-end None
            down_left = arg_hi == "left"
            if down_left:
                if feasible.lo == NEG_INF:
                    return NEG_INF, EMPTY_INTERVAL
                return self._finite_value(feasible.lo), RInterval(feasible.lo, feasible.lo)
            if feasible.hi == INF:
                return NEG_INF, EMPTY_INTERVAL
            return self._finite_value(feasible.hi), RInterval(feasible.hi, feasible.hi)
        argmin = RInterval(arg_lo, arg_hi).intersect(feasible)
        if not argmin.is_empty:
            witness = argmin.nearest_to(Fraction(0))
            return self._finite_value(witness), argmin
        if arg_lo > feasible.hi:  # minimizers lie to the right; f decreasing on feasible
            return self._finite_value(feasible.hi), RInterval(feasible.hi, feasible.hi)
        return self._finite_value(feasible.lo), RInterval(feasible.lo, feasible.lo)

    def _unconstrained_argmin(self):
        """Argmin over the whole domain.

        Returns (lo, hi) of the argmin interval, or (None, side) when the
        infimum is a limit at an unbounded domain end (side 'left'/'right').
        """
        slopes, bps = self.slopes, self.breakpoints
        if slopes[0] > 0:
            if self.dom_lo == NEG_INF:
                return None, "left"
            return self.dom_lo, self.dom_lo
        if slopes[-1] < 0:
            if self.dom_hi == INF:
                return None, "right"
            return self.dom_hi, self.dom_hi
        for j, s in enumerate(slopes):
            if s == 0:
                lo = bps[j - 1] if j >= 1 else self.dom_lo
                hi = bps[j] if j < len(bps) else self.dom_hi
                return lo, hi
            if s > 0:
                return bps[j - 1], bps[j - 1]
        # slopes all <= 0 with last slope 0 handled above; last < 0 handled
        return self.dom_hi, self.dom_hi

    def min_on_line(self) -> Ext:
        return self.inf_over(RInterval.whole_line())[0]


# ---------------------------------------------------------------------------
# Construction and factories
# ---------------------------------------------------------------------------

def pl(dom_lo: Ext, dom_hi: Ext, breakpoints: Iterable, slopes: Iterable,
       anchor_x, anchor_val) -> PLConvex:
    """Build a canonical PLConvex value.

    Canonicalization drops breakpoints outside the open domain, merges equal
    adjacent slopes, moves the anchor to a deterministic point (first
    breakpoint, else a finite domain endpoint, else 0) and recomputes its
    value.  Raises ``ValueError`` on non-convex slope data or an anchor
    outside the domain.
    """
    bps = tuple(rat(b) for b in breakpoints)
    sls = tuple(rat(s) for s in slopes)
    anchor_x = rat(anchor_x)
    anchor_val = rat(anchor_val)
    if isinstance(dom_lo, str):
        from .rationals import ext
        dom_lo = ext(dom_lo)
    if isinstance(dom_hi, str):
        from .rationals import ext
        dom_hi = ext(dom_hi)
    if dom_lo == INF or dom_hi == NEG_INF or not (dom_lo <= dom_hi):
        raise ValueError("empty or inverted domain")
    if len(sls) != len(bps) + 1:
        raise ValueError("need exactly one slope per segment")
    if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
        raise ValueError("breakpoints must be strictly increasing")
    if any(sls[i] > sls[i + 1] for i in range(len(sls) - 1)):
        raise ValueError("slopes must be nondecreasing (convexity)")
    if not (dom_lo <= anchor_x <= dom_hi):
        raise ValueError("anchor outside the domain")

    raw = object.__new__(PLConvex)
    object.__setattr__(raw, "dom_lo", dom_lo)
    object.__setattr__(raw, "dom_hi", dom_hi)
    object.__setattr__(raw, "breakpoints", bps)
    object.__setattr__(raw, "slopes", sls)
    object.__setattr__(raw, "anchor_x", anchor_x)
    object.__setattr__(raw, "anchor_val", anchor_val)

    if dom_lo == dom_hi:
        return PLConvex(dom_lo, dom_hi, (), (Fraction(0),), dom_lo, anchor_val)

    # restrict to segments meeting the open domain
    keep = [i for i, b in enumerate(bps) if dom_lo < b < dom_hi]
    if keep:
        a, b_ = keep[0], keep[-1]
        bps2 = bps[a:b_ + 1]
        sls2 = sls[a:b_ + 2]
    else:
        # single active segment: the one containing the domain interior
        probe = _interior_point(dom_lo, dom_hi)
        j = bisect_left(bps, probe)
        bps2, sls2 = (), (sls[j],)

    # merge equal adjacent slopes
    m_bps, m_sls = [], [sls2[0]]
    for i, b in enumerate(bps2):
        s_next = sls2[i + 1]
        if s_next == m_sls[-1]:
            continue
        m_bps.append(b)
        m_sls.append(s_next)

    if m_bps:
        ax = m_bps[0]
    elif is_finite(dom_lo):
        ax = dom_lo
    elif is_finite(dom_hi):
        ax = dom_hi
    else:
        ax = Fraction(0)
    aval = raw._finite_value(ax)
    return PLConvex(dom_lo, dom_hi, tuple(m_bps), tuple(m_sls), ax, aval)


def _interior_point(lo: Ext, hi: Ext) -> Q:
    if is_finite(lo) and is_finite(hi):
        return (lo + hi) / 2
    if is_finite(lo):
        return lo + 1
    if is_finite(hi):
        return hi - 1
    return Fraction(0)


def indicator(interval: RInterval) -> PLConvex:
    """delta_C: 0 on the interval, +inf outside.  Rejects the empty interval."""
    if interval.is_empty:
        raise ValueError("indicator of the empty interval is improper")
    zero = Fraction(0)
    ax = interval.lo if is_finite(interval.lo) else (
        interval.hi if is_finite(interval.hi) else zero)
    return pl(interval.lo, interval.hi, (), (zero,), ax, zero)


def support_fn(interval: RInterval) -> PLConvex:
    """sigma_C(v) = sup {v*x : x in C}, built in closed form.

    Coincides exactly with ``indicator(C).conjugate()``.
    """
    if interval.is_empty:
        raise ValueError("support function of the empty interval is improper")
    return indicator(interval).conjugate()


def affine(slope, value_at_zero) -> PLConvex:
    return pl(NEG_INF, INF, (), (slope,), Fraction(0), value_at_zero)


def abs_fn() -> PLConvex:
    """|x|."""
    return pl(NEG_INF, INF, (Fraction(0),), (Fraction(-1), Fraction(1)),
              Fraction(0), Fraction(0))


def max_affine(pieces: Sequence[Tuple[Q, Q]],
               domain: Optional[RInterval] = None) -> PLConvex:
    """Upper envelope max_k (a_k x + b_k) of finitely many affine pieces."""
    if not pieces:
        raise ValueError("need at least one affine piece")
    items = sorted(((rat(a), rat(b)) for a, b in pieces))
    # drop pieces that never attain the envelope
    hull: list[Tuple[Q, Q]] = []
    for a, b in items:
        if hull and hull[-1][0] == a:
            if b <= hull[-1][1]:
                continue
            hull.pop()
        while len(hull) >= 2:
            (a1, b1), (a2, b2) = hull[-2], hull[-1]
            # piece 2 is dominated if it meets piece 1 right of where the new one does
            x12 = Fraction(b2 - b1, a1 - a2)
            x1n = Fraction(b - b1, a1 - a)
            if x12 >= x1n:
                hull.pop()
            else:
                break
        hull.append((a, b))
    bps = [Fraction(hull[i + 1][1] - hull[i][1], hull[i][0] - hull[i + 1][0])
           for i in range(len(hull) - 1)]
    slopes = [a for a, _ in hull]
    fn = pl(NEG_INF, INF, bps, slopes, Fraction(0), max(b for _, b in hull))
    if domain is not None:
        fn = restrict(fn, domain)
    return fn


def restrict(fn: PLConvex, interval: RInterval) -> PLConvex:
    """fn + delta_C for a closed interval C meeting the domain of fn."""
    dom = fn.domain.intersect(interval)
    if dom.is_empty:
        raise ValueError("restriction has empty domain (improper)")
    inside = dom.lo if is_finite(dom.lo) else (dom.hi if is_finite(dom.hi) else Fraction(0))
    val = fn.eval(inside)
    return pl(dom.lo, dom.hi, fn.breakpoints, fn.slopes, inside, val)
