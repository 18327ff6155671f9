"""Seeded random builders for functions, maps, trees and whole instances.

Used by the verification CLI and the acceptance suite.  Generated breakpoints
and constraint endpoints live on a coarse lattice (denominators dividing 4),
so a brute-force search with step 1/100 hits every kink exactly and the
lattice gap bound is honest.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .duality import DualPair, Instance, assumption_report, make_instance
from .plconvex import PLConvex, RInterval, pl
from .rationals import INF, NEG_INF, is_finite
from .scenario import (RandomIntegrand, RandomMeasure, RandomPath,
                       ScenarioTree)
from .setmaps import SetMap
from .timegrid import GridMeasure, StepPath, TimeGrid

COARSE_DENOMS = (1, 2, 4)


def rand_coarse(rng: random.Random, lo: int = -3, hi: int = 3) -> Fraction:
    d = rng.choice(COARSE_DENOMS)
    return Fraction(rng.randint(lo * d, hi * d), d)


def rand_rational(rng: random.Random, lo: int = -3, hi: int = 3) -> Fraction:
    d = rng.randint(1, 12)
    return Fraction(rng.randint(lo * d, hi * d), d)


def rand_plconvex(rng: random.Random, max_breaks: int = 3) -> PLConvex:
    """Random canonical function: any domain type, coarse kinks, rational slopes."""
    kind = rng.choice(["line", "left", "right", "bounded", "bounded", "singleton"])
    if kind == "singleton":
        x = rand_coarse(rng)
        return pl(x, x, (), (0,), x, rand_rational(rng))
    if kind == "line":
        dom_lo, dom_hi = NEG_INF, INF
    elif kind == "left":
        dom_lo, dom_hi = NEG_INF, rand_coarse(rng, 0, 3)
    elif kind == "right":
        dom_lo, dom_hi = rand_coarse(rng, -3, 0), INF
    else:
        a, b = rand_coarse(rng), rand_coarse(rng)
        if a == b:
            b = a + 1
        dom_lo, dom_hi = min(a, b), max(a, b)
    inner = sorted({
        x for x in (rand_coarse(rng) for _ in range(rng.randint(0, max_breaks)))
        if dom_lo < x < dom_hi
    })
    slopes = []
    s = rand_rational(rng)
    for _ in range(len(inner) + 1):
        slopes.append(s)
        s = s + Fraction(rng.randint(1, 8), rng.randint(1, 4))
    anchor = dom_lo if is_finite(dom_lo) else (dom_hi if is_finite(dom_hi) else Fraction(0))
    return pl(dom_lo, dom_hi, inner, slopes, anchor, rand_rational(rng))


def rand_interval(rng: random.Random, bounded: bool = False) -> RInterval:
    kind = rng.choice(["bounded", "bounded", "left", "right", "line", "point"])
    if bounded and kind in ("left", "right", "line"):
        kind = "bounded"
    if kind == "point":
        x = rand_coarse(rng)
        return RInterval(x, x)
    if kind == "line":
        return RInterval.whole_line()
    if kind == "left":
        return RInterval(NEG_INF, rand_coarse(rng))
    if kind == "right":
        return RInterval(rand_coarse(rng), INF)
    a, b = rand_coarse(rng), rand_coarse(rng)
    return RInterval(min(a, b), max(a, b))


def rand_setmap(rng: random.Random, grid: TimeGrid,
                regular: bool = False) -> SetMap:
    """Random interval map; with ``regular`` the point values sit inside cells."""
    cells = tuple(rand_interval(rng) for _ in range(grid.n_cells))
    points: List[RInterval] = []
    for i in range(grid.n_slots):
        if regular and i < grid.n_cells:
            base = cells[i]
            lo = base.lo if rng.random() < 0.7 or not is_finite(base.lo) else base.lo + \
                min(Fraction(1, 2), (base.hi - base.lo) / 2 if is_finite(base.hi) else Fraction(1, 2))
            points.append(RInterval(lo, base.hi))
        else:
            points.append(rand_interval(rng))
    return SetMap(grid, tuple(points), cells)


def rand_grid(rng: random.Random, max_cells: int = 4) -> TimeGrid:
    n = rng.randint(1, max_cells)
    times = [Fraction(0)]
    for _ in range(n):
        times.append(times[-1] + Fraction(rng.randint(1, 4), rng.choice((1, 2))))
    return TimeGrid(tuple(times))


def rand_tree(rng: random.Random, n_slots: int, max_scenarios: int = 4) -> ScenarioTree:
    """Random nested partitions over up to ``max_scenarios`` scenarios."""
    n_scen = rng.randint(1, max_scenarios)
    ids = tuple(f"s{k}" for k in range(n_scen))
    weights = [rng.randint(1, 4) for _ in ids]
    total = sum(weights)
    probs = tuple(Fraction(w, total) for w in weights)
    partition: Tuple[Tuple[str, ...], ...] = (ids,)
    partitions = []
    for _ in range(n_slots):
        partitions.append(partition)
        new: List[Tuple[str, ...]] = []
        for cell in partition:
            if len(cell) > 1 and rng.random() < 0.6:
                cut = rng.randint(1, len(cell) - 1)
                new.append(tuple(cell[:cut]))
                new.append(tuple(cell[cut:]))
            else:
                new.append(cell)
        partition = tuple(new)
    return ScenarioTree(ids, probs, tuple(partitions))


def _per_cell(rng: random.Random, tree: ScenarioTree, slot: int, draw) -> Dict[str, object]:
    """One draw per partition cell, broadcast to its scenarios."""
    out: Dict[str, object] = {}
    for cell in tree.cells(slot):
        value = draw()
        for s in cell:
            out[s] = value
    return out


def rand_passing_instance(rng: random.Random, max_scenarios: int = 4,
                          max_cells: int = 4,
                          with_htilde: bool = False) -> Instance:
    """Instance satisfying every assumption of the conjugate theorem.

    The integrand is drawn per (slot, partition cell), the constraint maps
    default to its domain system, and an optional nontrivial predictable
    integrand is derived from the preceding slot's domain.
    """
    grid = rand_grid(rng, max_cells)
    tree = rand_tree(rng, grid.n_slots, max_scenarios)
    fns: Dict[str, List[PLConvex]] = {s: [] for s in tree.scenarios}
    for i in range(grid.n_slots):
        drawn = _per_cell(rng, tree, i, lambda: rand_plconvex(rng, max_breaks=2))
        for s in tree.scenarios:
            fns[s].append(drawn[s])
    h = RandomIntegrand(tree, grid, {s: tuple(v) for s, v in fns.items()}, "optional")
    mu_vals: Dict[str, List[Fraction]] = {s: [] for s in tree.scenarios}
    mut_vals: Dict[str, List[Fraction]] = {s: [] for s in tree.scenarios}
    for i in range(grid.n_slots):
        drawn = _per_cell(rng, tree, i,
                          lambda: Fraction(rng.randint(0, 3), rng.choice((1, 2))))
        for s in tree.scenarios:
            mu_vals[s].append(drawn[s])
        pred = tree.pred_slot(i)
        drawn_t = _per_cell(rng, tree, pred,
                            lambda: Fraction(rng.randint(0, 2)))
        for s in tree.scenarios:
            mut_vals[s].append(drawn_t[s] if i >= 1 else Fraction(0))
    mu = RandomMeasure(tree, grid, {s: GridMeasure(grid, tuple(v))
                                    for s, v in mu_vals.items()})
    mutilde = RandomMeasure(tree, grid, {s: GridMeasure(grid, tuple(v))
                                         for s, v in mut_vals.items()})
    htilde = None
    if with_htilde:
        ht: Dict[str, List[PLConvex]] = {s: [] for s in tree.scenarios}
        for i in range(grid.n_slots):
            if i == 0:
                zero = Fraction(0)
                start = pl(zero, zero, (), (0,), zero, rand_coarse(rng, 0, 2))
                for s in tree.scenarios:
                    ht[s].append(start)
                continue
            pred = tree.pred_slot(i)
            for cell in tree.cells(pred):
                dom = fns[cell[0]][i - 1].domain
                slope0 = rand_rational(rng, -2, 2)
                slopes = [slope0]
                inner = sorted({x for x in (rand_coarse(rng) for _ in range(rng.randint(0, 2)))
                                if dom.lo < x < dom.hi})
                for _ in inner:
                    slopes.append(slopes[-1] + Fraction(rng.randint(1, 4), 2))
                anchor = dom.lo if is_finite(dom.lo) else (
                    dom.hi if is_finite(dom.hi) else Fraction(0))
                fn = pl(dom.lo, dom.hi, inner, slopes, anchor, rand_rational(rng))
                for s in cell:
                    ht[s].append(fn)
        htilde = RandomIntegrand(tree, grid, {s: tuple(v) for s, v in ht.items()},
                                 "predictable")
    inst = make_instance(tree, grid, h, mu, mutilde, htilde)
    assert assumption_report(inst)["all_ok"]
    return inst


def rand_finite_dual(rng: random.Random, inst: Instance) -> DualPair:
    """Dual pair with finite pointwise conjugate.

    Densities are drawn inside the slope range of the slot integrand on
    {mu > 0}; singular atoms appear only in directions with finite support
    function of the domain.
    """
    tree, grid = inst.tree, inst.grid
    u_vals: Dict[str, List[Fraction]] = {s: [] for s in tree.scenarios}
    ut_vals: Dict[str, List[Fraction]] = {s: [] for s in tree.scenarios}
    for i in range(grid.n_slots):
        for cell in tree.cells(i):
            rep = cell[0]
            fn = inst.h.functions[rep][i]
            m = inst.mu.measures[rep].atoms[i]
            atom = _finite_dual_atom(rng, fn, m)
            for s in cell:
                u_vals[s].append(atom)
        pred = tree.pred_slot(i)
        for cell in tree.cells(pred):
            rep = cell[0]
            if i == 0:
                atom = Fraction(rng.randint(-1, 1))  # pairs against the pinched start
            else:
                fn = inst.htilde.functions[rep][i]
                m = inst.mutilde.measures[rep].atoms[i]
                atom = _finite_dual_atom(rng, fn, m)
            for s in cell:
                ut_vals[s].append(atom)
    u = RandomMeasure(tree, grid, {s: GridMeasure(grid, tuple(v))
                                   for s, v in u_vals.items()})
    ut = RandomMeasure(tree, grid, {s: GridMeasure(grid, tuple(v))
                                    for s, v in ut_vals.items()})
    return DualPair(u, ut)


def _finite_dual_atom(rng: random.Random, fn: PLConvex, mass: Fraction) -> Fraction:
    if mass > 0:
        lo, hi = fn.slopes[0], fn.slopes[-1]
        t = Fraction(rng.randint(0, 4), 4)
        density = lo + t * (hi - lo)
        return mass * density
    candidates = [Fraction(0)]
    if is_finite(fn.dom_hi):
        candidates.append(Fraction(rng.randint(1, 2)))
    if is_finite(fn.dom_lo):
        candidates.append(Fraction(-rng.randint(1, 2)))
    return rng.choice(candidates)


def rand_feasible_path(rng: random.Random, inst: Instance) -> RandomPath:
    """Adapted path with finite hatted value, drawn per partition cell."""
    tree, grid = inst.tree, inst.grid
    n = grid.n_slots
    vals: Dict[str, List[Optional[Fraction]]] = {s: [None] * n for s in tree.scenarios}
    for i in range(n):
        for cell in tree.cells(i):
            feas = RInterval.whole_line()
            for s in cell:
                smap, stmap = inst.s_map(s), inst.st_map(s)
                feas = feas.intersect(smap.point_vals[i])
                feas = feas.intersect(inst.h.functions[s][i].domain)
                if i < n - 1:
                    feas = feas.intersect(smap.open_vals[i]).intersect(stmap.open_vals[i])
                if i + 1 < n:
                    feas = feas.intersect(stmap.point_vals[i + 1])
                    feas = feas.intersect(inst.htilde.functions[s][i + 1].domain)
            if feas.is_empty:
                raise ValueError("instance has no feasible fixed-grid path")
            pick = feas.nearest_to(rand_coarse(rng, -2, 2))
            for s in cell:
                vals[s][i] = pick
    return RandomPath(tree, grid, {s: StepPath(grid, tuple(vals[s]))
                                   for s in tree.scenarios})
