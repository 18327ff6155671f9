"""Market-model presets built from the generic duality machinery.

Obstacle constraints (half-line maps above an optional lower bound), bid-ask
interval constraints with their left regularizations, and cone-valued
currency-market constraints with polar membership certificates.  Each preset
carries a closed-form support function that the generic ``support_DS`` and
the brute-force oracle must reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .duality import DualPair, Instance, indicator_integrand, make_instance
from .plconvex import RInterval
from .polycone import ConeMap, PolyCone, cone_hull, vdot
from .rationals import Ext, INF, Q, rat
from .scenario import (RandomMeasure, RandomPath, RandomSetMap, ScenarioTree,
                       _constant_on, check_adapted)
from .setmaps import SetMap
from .timegrid import TimeGrid


# ---------------------------------------------------------------------------
# Scalar processes with point / open-cell values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarProcess:
    """Real-valued process, constant on open cells with separate point values."""

    tree: ScenarioTree
    grid: TimeGrid
    points: Mapping[str, Tuple[Q, ...]]
    cells: Mapping[str, Tuple[Q, ...]]
    flag: str = "raw"

    def __post_init__(self):
        if self.flag not in ("optional", "predictable", "raw"):
            raise ValueError(f"unknown flag {self.flag!r}")
        object.__setattr__(self, "points",
                           {s: tuple(rat(v) for v in vals)
                            for s, vals in self.points.items()})
        object.__setattr__(self, "cells",
                           {s: tuple(rat(v) for v in vals)
                            for s, vals in self.cells.items()})
        for s in self.tree.scenarios:
            if len(self.points[s]) != self.grid.n_slots:
                raise ValueError("need one point value per grid time")
            if len(self.cells[s]) != self.grid.n_cells:
                raise ValueError("need one value per open cell")
        if self.flag != "raw" and not self._measurable():
            raise ValueError(f"process is not {self.flag}")

    def _measurable(self) -> bool:
        tree = self.tree
        for i in range(tree.n_slots):
            slot = tree.pred_slot(i) if self.flag == "predictable" else i
            data = {s: self.points[s][i] for s in tree.scenarios}
            if not all(_constant_on(cell, data) for cell in tree.cells(slot)):
                return False
            if i < tree.n_slots - 1:
                cdata = {s: self.cells[s][i] for s in tree.scenarios}
                if not all(_constant_on(cell, cdata) for cell in tree.cells(i)):
                    return False
        return True

    @classmethod
    def constant_cells(cls, tree: ScenarioTree, grid: TimeGrid,
                       values: Mapping[str, Sequence], flag: str = "raw") -> "ScalarProcess":
        """Point value at t_i equal to the following cell value (cadlag style)."""
        pts, cls_ = {}, {}
        for s, vals in values.items():
            vals = tuple(rat(v) for v in vals)
            if len(vals) != grid.n_cells:
                raise ValueError("need one value per cell")
            pts[s] = vals + (vals[-1],)
            cls_[s] = vals
        return cls(tree, grid, pts, cls_, flag)

    def refine(self, factor: int) -> "ScalarProcess":
        """Inserted grid times take the surrounding cell's value."""
        fine = self.grid.refine(factor)
        pts, cellv = {}, {}
        for s in self.tree.scenarios:
            p: List[Q] = []
            c: List[Q] = []
            for i in range(self.grid.n_cells):
                p.append(self.points[s][i])
                c.append(self.cells[s][i])
                for _ in range(factor - 1):
                    p.append(self.cells[s][i])
                    c.append(self.cells[s][i])
            p.append(self.points[s][-1])
            pts[s] = tuple(p)
            cellv[s] = tuple(c)
        return ScalarProcess(self.tree.refine(factor), fine, pts, cellv, self.flag)


def left_usc_reg(b: ScalarProcess) -> ScalarProcess:
    """Left upper semicontinuous regularization: limsup from the left.

    On cell-constant processes the limsup at t_i is the preceding cell value
    (limsup and liminf agree), with 0 at t_0 by the left-limit convention.
    The output is predictable whenever the input is optional: the preceding
    cell value is known one partition earlier.
    """
    pts = {
        s: (Fraction(0),) + b.cells[s]
        for s in b.tree.scenarios
    }
    flag = "predictable" if b.flag in ("optional", "predictable") else "raw"
    return ScalarProcess(b.tree, b.grid, pts, b.cells, flag)


def left_lsc_reg(a: ScalarProcess) -> ScalarProcess:
    """Left lower semicontinuous regularization: liminf from the left.

    Coincides with :func:`left_usc_reg` on cell-constant processes; kept as a
    separate name because the two regularizations bound different sides of
    the bid-ask spread.
    """
    return left_usc_reg(a)


def right_usc_slots(b: ScalarProcess) -> Dict[str, List[int]]:
    """Slots violating right upper semicontinuity (point below the next cell)."""
    out = {}
    for s in b.tree.scenarios:
        out[s] = [i for i in range(b.grid.n_cells)
                  if not (b.points[s][i] >= b.cells[s][i])]
    return out


def right_lsc_slots(a: ScalarProcess) -> Dict[str, List[int]]:
    """Slots violating right lower semicontinuity (point above the next cell)."""
    out = {}
    for s in a.tree.scenarios:
        out[s] = [i for i in range(a.grid.n_cells)
                  if not (a.points[s][i] <= a.cells[s][i])]
    return out


def _jordan(x: Q) -> Tuple[Q, Q]:
    return (x, Fraction(0)) if x >= 0 else (Fraction(0), -x)


# ---------------------------------------------------------------------------
# Obstacle constraints: S_t is the half-line above an optional bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObstacleModel:
    b: ScalarProcess
    b_vec: ScalarProcess
    ycheck: RandomPath
    instance: Instance


def obstacle_model(b: ScalarProcess, ycheck: RandomPath) -> ObstacleModel:
    """Hard constraint y >= b for an optional right-usc bound dominated in D."""
    if b.flag != "optional":
        raise ValueError("obstacle bound must be optional")
    bad = {s: v for s, v in right_usc_slots(b).items() if v}
    if bad:
        raise ValueError(f"bound is not right-usc at slots {bad}")
    if not check_adapted(ycheck):
        raise ValueError("dominating path must be adapted")
    for s in b.tree.scenarios:
        vals = ycheck.paths[s].values
        for i in range(b.grid.n_slots):
            if vals[i] < b.points[s][i]:
                raise ValueError(f"dominating path below the bound at slot {i}")
        for i in range(b.grid.n_cells):
            if vals[i] < b.cells[s][i]:
                raise ValueError(f"dominating path below the bound on cell {i}")
    maps = {
        s: SetMap(b.grid,
                  tuple(RInterval(p, INF) for p in b.points[s]),
                  tuple(RInterval(c, INF) for c in b.cells[s]))
        for s in b.tree.scenarios
    }
    smap = RandomSetMap(b.tree, b.grid, maps)
    h = indicator_integrand(smap, "optional")
    inst = make_instance(b.tree, b.grid, h, RandomMeasure.zero(b.tree, b.grid), S=smap)
    return ObstacleModel(b, left_usc_reg(b), ycheck, inst)


def obstacle_support(model: ObstacleModel, d: DualPair) -> Ext:
    """Closed form: E[integral of b du + integral of the left regularization
    d(ut)] when both measures are nonpositive, +inf otherwise.

    Atoms of the predictable measure at t_0 pair against the pinched start
    {0} and contribute nothing, any sign.
    """
    tree = model.b.tree
    vals: Dict[str, Ext] = {}
    for s in tree.scenarios:
        u = d.u.measures[s].atoms
        ut = d.ut.measures[s].atoms
        if any(a > 0 for a in u) or any(a > 0 for a in ut[1:]):
            vals[s] = INF
            continue
        total = sum((model.b.points[s][i] * u[i] for i in range(len(u))), Fraction(0))
        total += sum((model.b_vec.points[s][i] * ut[i] for i in range(1, len(ut))),
                     Fraction(0))
        vals[s] = total
    return tree.expectation(vals)


# ---------------------------------------------------------------------------
# Bid-ask spreads: S_t = [b_t, a_t]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BidAskModel:
    b: ScalarProcess
    a: ScalarProcess
    b_vec: ScalarProcess
    a_under: ScalarProcess
    ybar: RandomPath
    instance: Instance


def bidask_model(b: ScalarProcess, a: ScalarProcess, ybar: RandomPath) -> BidAskModel:
    """Interval constraints between a right-usc bid and a right-lsc ask.

    Requires the strict separation b < ybar < a slot-wise, and the same for
    the left regularizations against the left limits of ybar (skipping the
    pinched start).
    """
    if b.flag != "optional" or a.flag != "optional":
        raise ValueError("bid and ask must be optional")
    bad_b = {s: v for s, v in right_usc_slots(b).items() if v}
    bad_a = {s: v for s, v in right_lsc_slots(a).items() if v}
    if bad_b or bad_a:
        raise ValueError(f"regularity failure: bid {bad_b}, ask {bad_a}")
    if not check_adapted(ybar):
        raise ValueError("separating path must be adapted")
    b_vec, a_under = left_usc_reg(b), left_lsc_reg(a)
    for s in b.tree.scenarios:
        vals = ybar.paths[s].values
        lefts = ybar.paths[s].left_values()
        for i in range(b.grid.n_slots):
            if not (b.points[s][i] < vals[i] < a.points[s][i]):
                raise ValueError(f"separation fails at slot {i} in {s!r}")
            if i < b.grid.n_cells and not (b.cells[s][i] < vals[i] < a.cells[s][i]):
                raise ValueError(f"separation fails on cell {i} in {s!r}")
            if i >= 1 and not (b_vec.points[s][i] < lefts[i] < a_under.points[s][i]):
                raise ValueError(f"left separation fails at slot {i} in {s!r}")
    maps = {
        s: SetMap(b.grid,
                  tuple(RInterval(lo, hi)
                        for lo, hi in zip(b.points[s], a.points[s])),
                  tuple(RInterval(lo, hi)
                        for lo, hi in zip(b.cells[s], a.cells[s])))
        for s in b.tree.scenarios
    }
    smap = RandomSetMap(b.tree, b.grid, maps)
    h = indicator_integrand(smap, "optional")
    inst = make_instance(b.tree, b.grid, h, RandomMeasure.zero(b.tree, b.grid), S=smap)
    return BidAskModel(b, a, b_vec, a_under, ybar, inst)


def bidask_support(model: BidAskModel, d: DualPair) -> Ext:
    """Closed form with the Jordan decomposition of both measures.

    The ask prices the positive parts and the bid the negative parts; on the
    predictable side the left-lsc regularization of the ask meets the
    positive part and the left-usc regularization of the bid the negative
    part.  Atoms at t_0 of the predictable measure contribute nothing.
    """
    tree = model.b.tree
    vals: Dict[str, Ext] = {}
    for s in tree.scenarios:
        total = Fraction(0)
        for i, atom in enumerate(d.u.measures[s].atoms):
            plus, minus = _jordan(atom)
            total += model.a.points[s][i] * plus - model.b.points[s][i] * minus
        for i, atom in enumerate(d.ut.measures[s].atoms):
            if i == 0:
                continue
            plus, minus = _jordan(atom)
            total += model.a_under.points[s][i] * plus - model.b_vec.points[s][i] * minus
        vals[s] = total
    return tree.expectation(vals)


# ---------------------------------------------------------------------------
# Currency markets: cone-valued constraints and the polar membership test
# ---------------------------------------------------------------------------

Vec = Tuple[Fraction, ...]


@dataclass(frozen=True)
class VectorPath:
    """Vector-valued step path on the grid (single scenario)."""

    grid: TimeGrid
    values: Tuple[Vec, ...]

    def __post_init__(self):
        vals = tuple(tuple(rat(x) for x in v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.grid.n_slots:
            raise ValueError("need one vector per grid time")

    def left_values(self) -> Tuple[Vec, ...]:
        dim = len(self.values[0])
        zero = tuple(Fraction(0) for _ in range(dim))
        return (zero,) + self.values[:-1]


@dataclass(frozen=True)
class VectorMeasure:
    """Vector-valued atomic measure on the grid (single scenario)."""

    grid: TimeGrid
    atoms: Tuple[Vec, ...]

    def __post_init__(self):
        atoms = tuple(tuple(rat(x) for x in a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if len(atoms) != self.grid.n_slots:
            raise ValueError("need one vector atom per grid time")


def vector_pairing(y: VectorPath, u: VectorMeasure, ut: VectorMeasure) -> Q:
    total = sum((vdot(v, a) for v, a in zip(y.values, u.atoms)), Fraction(0))
    total += sum((vdot(w, a) for w, a in zip(y.left_values(), ut.atoms)), Fraction(0))
    return total


@dataclass(frozen=True)
class CurrencyModel:
    """Polar-cone description of self-financing dual pairs.

    ``solvency`` is the cone map G of solvency cones; the constraint map is
    its slot-wise polar S = G*.  A dual pair belongs to the polar of the
    selection set exactly when each atom of the optional measure points into
    G at its slot and each atom of the predictable measure into the
    preceding cell cone (the polar of the left-limit constraint).  Cone
    membership is scale invariant, so atom directions need no normalization.
    """

    solvency: ConeMap
    constraints: ConeMap
    report: Dict

    @property
    def grid(self) -> TimeGrid:
        return self.solvency.grid

    def attainable_cone(self, i: int) -> PolyCone:
        """Values selections of the constraint map can take at t_i."""
        if i == self.grid.n_cells:
            return self.constraints.point_cones[i]
        hull = cone_hull([self.solvency.point_cones[i], self.solvency.cell_cones[i]])
        return hull.polar()

    def is_member(self, u: VectorMeasure, ut: VectorMeasure) -> Dict:
        """Membership of a dual pair in the polar cone of the selection set."""
        n = self.grid.n_slots
        u_ok = [all(x == 0 for x in u.atoms[i])
                or self.solvency.point_cones[i].member(u.atoms[i])
                for i in range(n)]
        ut_ok = [True] + [
            all(x == 0 for x in ut.atoms[i])
            or self.solvency.cell_cones[i - 1].member(ut.atoms[i])
            for i in range(1, n)]
        return {"u_ok": u_ok, "ut_ok": ut_ok,
                "member": all(u_ok) and all(ut_ok)}

    def sample_selection(self, rng) -> VectorPath:
        """Random rational selection: nonnegative combinations of generators."""
        values = []
        for i in range(self.grid.n_slots):
            gens = self.attainable_cone(i).generators
            dim = self.solvency.dim
            if not gens:
                values.append(tuple(Fraction(0) for _ in range(dim)))
                continue
            coeffs = [Fraction(rng.randint(0, 4)) for _ in gens]
            vec = tuple(
                sum((c * g[k] for c, g in zip(coeffs, gens)), Fraction(0))
                for k in range(dim))
            values.append(vec)
        return VectorPath(self.grid, tuple(values))


def currency_model(solvency: ConeMap) -> CurrencyModel:
    """Build the polar constraint system of a solvency cone map.

    Verifies the standing hypotheses: the polar map S = G* is right inner
    semicontinuous and solid, and its left-limit map is solid away from the
    pinched start.  Failures are reported, not silently accepted.
    """
    s_map = solvency.polar_map()
    right_isc = s_map.right_isc()
    solid = [k.solid() for k in s_map.point_cones] + [k.solid() for k in s_map.cell_cones]
    vec_solid = [s_map.cell_cones[i - 1].solid() for i in range(1, solvency.grid.n_slots)]
    report = {
        "polar_right_isc": right_isc,
        "polar_solid": all(solid),
        "vec_polar_solid": all(vec_solid),
        "pass": right_isc and all(solid) and all(vec_solid),
    }
    if not report["pass"]:
        raise ValueError(f"currency preconditions fail: {report}")
    return CurrencyModel(solvency, s_map, report)
