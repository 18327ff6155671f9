"""Primal/dual functionals on scenario trees and their theorem checks.

The primal functional charges an optional integrand along a path against an
optional measure, a predictable integrand along the left limits against a
predictable atomic measure, and hard interval constraints on both.  Its
conjugate over the dual pairs (optional measure, predictable measure) has an
exact pointwise expression through the J-functionals of the conjugate
integrands; this module evaluates both sides and cross-checks them with a
brute-force lattice oracle, verifies the subdifferential characterization,
and runs the deterministic and stochastic interchange rules.

Two path semantics coexist deliberately.  ``eval_F``/``eval_Fhat`` treat a
path on the instance's own grid, where the left limit at t_i is the previous
slot's value.  The sup/inf underlying conjugates and interchange rules ranges
over paths on *refinements* of the grid, where a path may jump inside a cell,
making the value at t_i and the left limit at t_i independent coordinates.
All such computations route through the once-refined instance (midpoints
carry zero mass), which keeps the oracle an honest path search while matching
the pointwise formulas exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .plconvex import RInterval, indicator
from .rationals import Ext, INF, NEG_INF, Q, is_finite, rat, xmul, xneg, xsum
from .scenario import (RandomIntegrand, RandomMeasure, RandomPath,
                       RandomSetMap, ScenarioTree, check_adapted,
                       check_predictable, expected_pairing,
                       minorant_certificate, paste, predictable_atoms)
from .setmaps import SetMap, michael_check
from .timegrid import StepPath, TimeGrid, eval_I, eval_J

DEFAULT_BUDGET = 10 ** 7
BUDGET_ENV_VAR = "CADLAG_CONVEX_BUDGET"


class BudgetExceededError(RuntimeError):
    """The brute-force lattice search would evaluate too many points."""

    def __init__(self, needed: int, budget: int):
        super().__init__(
            f"brute-force search needs {needed} lattice evaluations, "
            f"budget is {budget}; shrink B, the lattice step or the grid, "
            f"or raise {BUDGET_ENV_VAR}")
        self.needed = needed
        self.budget = budget


def resolve_budget(budget: Optional[int] = None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get(BUDGET_ENV_VAR)
    return int(env) if env else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# Instances and dual pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """A primal problem: integrands, measures and hard constraint maps.

    ``S`` defaults to the slot-wise closed domain of ``h`` (extended
    constantly over the open cells) and ``Stilde`` to its left-limit map;
    ``htilde`` defaults to the indicator family of ``Stilde``, which turns
    the hatted functional into the plain one.  Measurability flags are
    enforced at construction; the relation between the constraint maps and
    the integrand domains is recorded by :func:`assumption_report` instead,
    since instances that violate it are legitimate gap-mode inputs.
    """

    tree: ScenarioTree
    grid: TimeGrid
    h: RandomIntegrand
    mu: RandomMeasure
    mutilde: RandomMeasure
    htilde: RandomIntegrand
    S: RandomSetMap
    Stilde: RandomSetMap

    def __post_init__(self):
        if not self.mu.is_nonnegative or not self.mutilde.is_nonnegative:
            raise ValueError("mu and mutilde must be nonnegative")
        if self.h.flag != "optional" or not check_adapted(self.h):
            raise ValueError("h must be optional")
        if self.htilde.flag != "predictable" or not check_predictable(self.htilde):
            raise ValueError("htilde must be predictable")
        if not check_adapted(self.mu):
            raise ValueError("mu must be optional")
        if not check_predictable(self.mutilde):
            raise ValueError("mutilde must be predictable")
        if not check_adapted(self.S):
            raise ValueError("S must be optional")
        if not check_predictable(self.Stilde):
            raise ValueError("Stilde must be predictable")

    # -- per-scenario accessors ------------------------------------------------

    def s_map(self, scenario: str) -> SetMap:
        return self.S.maps[scenario]

    def st_map(self, scenario: str) -> SetMap:
        return self.Stilde.maps[scenario]

    def refine(self, factor: int) -> "Instance":
        return Instance(self.tree.refine(factor), self.grid.refine(factor),
                        self.h.refine(factor), self.mu.refine(factor),
                        self.mutilde.refine(factor), self.htilde.refine(factor),
                        self.S.refine(factor), self.Stilde.refine(factor))

    def magnitude_bound(self) -> Q:
        """Largest |breakpoint|, |slope knot| or finite constraint endpoint."""
        best = Fraction(1)
        for fam in (self.h, self.htilde):
            for fns in fam.functions.values():
                for fn in fns:
                    for b in fn.knots():
                        best = max(best, abs(b))
        for rsm in (self.S, self.Stilde):
            for sm in rsm.maps.values():
                for iv in sm.point_vals + sm.open_vals:
                    for side in (iv.lo, iv.hi):
                        if is_finite(side):
                            best = max(best, abs(side))
        return best


def domain_setmap(h: RandomIntegrand) -> RandomSetMap:
    """Slot-wise closed domain of the integrand, constant on open cells."""
    maps = {}
    for s, fns in h.functions.items():
        points = tuple(fn.domain for fn in fns)
        cells = tuple(fn.domain for fn in fns[:-1])
        maps[s] = SetMap(h.grid, points, cells)
    return RandomSetMap(h.tree, h.grid, maps)


def indicator_integrand(rsm: RandomSetMap, flag: str) -> RandomIntegrand:
    fams = {
        s: tuple(indicator(iv) for iv in sm.point_vals)
        for s, sm in rsm.maps.items()
    }
    return RandomIntegrand(rsm.tree, rsm.grid, fams, flag)


def make_instance(tree: ScenarioTree, grid: TimeGrid, h: RandomIntegrand,
                  mu: RandomMeasure, mutilde: Optional[RandomMeasure] = None,
                  htilde: Optional[RandomIntegrand] = None,
                  S: Optional[RandomSetMap] = None,
                  Stilde: Optional[RandomSetMap] = None) -> Instance:
    """Assemble an instance, filling the default constraint system."""
    if mutilde is None:
        mutilde = RandomMeasure.zero(tree, grid)
    if S is None:
        S = domain_setmap(h)
    if Stilde is None:
        Stilde = S.vec_map()
    if htilde is None:
        htilde = indicator_integrand(Stilde, "predictable")
    return Instance(tree, grid, h, mu, mutilde, htilde, S, Stilde)


@dataclass(frozen=True)
class DualPair:
    """An optional measure paired against paths, a predictable one against left limits."""

    u: RandomMeasure
    ut: RandomMeasure

    def __post_init__(self):
        if not check_adapted(self.u):
            raise ValueError("u must be optional")
        if not check_predictable(self.ut):
            raise ValueError("ut must be predictable")
        if self.u.grid != self.ut.grid or self.u.tree != self.ut.tree:
            raise ValueError("dual pair must share tree and grid")

    def refine(self, factor: int) -> "DualPair":
        return DualPair(self.u.refine(factor), self.ut.refine(factor))

    def total_variation_expectation(self) -> Q:
        tree = self.u.tree
        vals = {s: self.u.measures[s].total_variation()
                + self.ut.measures[s].total_variation()
                for s in tree.scenarios}
        return tree.expectation(vals)


# ---------------------------------------------------------------------------
# Primal evaluation (paths on the instance's own grid)
# ---------------------------------------------------------------------------

def _require_adapted_path(y: RandomPath) -> None:
    if not check_adapted(y):
        raise ValueError("path must be adapted")


def eval_F(inst: Instance, y: RandomPath) -> Ext:
    """E I_h(y) plus the indicator of y being a selection of S."""
    _require_adapted_path(y)
    vals: Dict[str, Ext] = {}
    for s in inst.tree.scenarios:
        path = y.paths[s]
        if not inst.s_map(s).is_selection(path):
            vals[s] = INF
            continue
        vals[s] = eval_I(inst.h.functions[s], path, inst.mu.measures[s])
    return inst.tree.expectation(vals)


def eval_Fhat(inst: Instance, y: RandomPath) -> Ext:
    """The hatted functional: adds the left-limit costs and constraints."""
    _require_adapted_path(y)
    n = inst.grid.n_slots
    vals: Dict[str, Ext] = {}
    for s in inst.tree.scenarios:
        path = y.paths[s]
        smap, stmap = inst.s_map(s), inst.st_map(s)
        left = StepPath(inst.grid, path.left_values())
        feasible = smap.is_selection(path)
        if feasible:
            lefts = path.left_values()
            for i in range(n):
                if not stmap.point_vals[i].contains(lefts[i]):
                    feasible = False
                    break
            if feasible:
                for i in range(n - 1):
                    if not stmap.open_vals[i].contains(path.values[i]):
                        feasible = False
                        break
        if not feasible:
            vals[s] = INF
            continue
        cost = xsum([
            eval_I(inst.h.functions[s], path, inst.mu.measures[s]),
            eval_I(inst.htilde.functions[s], left, inst.mutilde.measures[s]),
        ])
        vals[s] = cost
    return inst.tree.expectation(vals)


# ---------------------------------------------------------------------------
# The pointwise conjugate and the support function of the constraint set
# ---------------------------------------------------------------------------

def conj_pointwise(inst: Instance, d: DualPair) -> Ext:
    """E[J of h* at u against mu, plus J of htilde* at ut against mutilde]."""
    vals: Dict[str, Ext] = {}
    for s in inst.tree.scenarios:
        hstar = tuple(fn.conjugate() for fn in inst.h.functions[s])
        htstar = tuple(fn.conjugate() for fn in inst.htilde.functions[s])
        vals[s] = xsum([
            eval_J(hstar, d.u.measures[s], inst.mu.measures[s]),
            eval_J(htstar, d.ut.measures[s], inst.mutilde.measures[s]),
        ])
    return inst.tree.expectation(vals)


def support_DS(inst: Instance, d: DualPair) -> Ext:
    """Support function of the constraint set at a dual pair.

    Sums slot support values of the point constraint intervals against the
    atoms; homogeneity makes the result independent of any reference measure.
    Returns the -inf sentinel when no selection exists.
    """
    for s in inst.tree.scenarios:
        sets = _decoupled_sets(inst, s)
        if any(v.is_empty for v in sets):
            return NEG_INF
    vals: Dict[str, Ext] = {}
    for s in inst.tree.scenarios:
        smap, stmap = inst.s_map(s), inst.st_map(s)
        terms = [smap.point_vals[i].support(a)
                 for i, a in enumerate(d.u.measures[s].atoms)]
        terms += [stmap.point_vals[i].support(a)
                  for i, a in enumerate(d.ut.measures[s].atoms)]
        vals[s] = xsum(terms)
    return inst.tree.expectation(vals)


# ---------------------------------------------------------------------------
# Effective feasible value sets
# ---------------------------------------------------------------------------

def _fixed_value_sets(inst: Instance, scenario: str) -> List[RInterval]:
    """Per-slot feasible values of fixed-grid paths for the hatted functional."""
    smap, stmap = inst.s_map(scenario), inst.st_map(scenario)
    n = inst.grid.n_slots
    out = []
    for i in range(n):
        v = smap.point_vals[i]
        if i < n - 1:
            v = v.intersect(smap.open_vals[i]).intersect(stmap.open_vals[i])
        if i + 1 < n:
            v = v.intersect(stmap.point_vals[i + 1])
        out.append(v)
    return out


def _zero_start_ok(inst: Instance, scenario: str) -> bool:
    return inst.st_map(scenario).point_vals[0].contains(Fraction(0))


def _decoupled_sets(inst: Instance, scenario: str) -> List[RInterval]:
    """Feasible sets of the refined coordinates (values and left limits)."""
    return _fixed_value_sets(inst.refine(2), scenario)


# ---------------------------------------------------------------------------
# Assumption diagnostics
# ---------------------------------------------------------------------------

def assumption_report(inst: Instance) -> Dict:
    """Slot-wise diagnostics under which the pointwise formulas are exact.

    Records, per scenario: the constraint maps agreeing with the integrand
    domains (image closure), the Michael-representation inclusions on both
    maps, the cross-compatibility of the two constraint systems, the pinched
    left start, properness (a feasible point with finite cost exists) and
    the constructive affine minorants.
    """
    n = inst.grid.n_slots
    per_scenario = {}
    for s in inst.tree.scenarios:
        smap, stmap = inst.s_map(s), inst.st_map(s)
        hfns, htfns = inst.h.functions[s], inst.htilde.functions[s]
        bad = {
            "s_is_cl_dom_h": [i for i in range(n)
                              if smap.point_vals[i] != hfns[i].domain]
            + [i for i in range(n - 1) if smap.open_vals[i] != hfns[i].domain],
            "stilde_is_cl_dom_htilde": [i for i in range(1, n)
                                        if stmap.point_vals[i] != htfns[i].domain],
            "michael_S": [i for i in range(n - 1)
                          if not smap.point_vals[i].issubset(smap.open_vals[i])],
            "michael_Stilde": [i for i in range(1, n)
                               if not stmap.point_vals[i].issubset(stmap.open_vals[i - 1])],
            "cross_S_in_Stilde_cells": [i for i in range(n - 1)
                                        if not smap.point_vals[i].issubset(stmap.open_vals[i])],
            "cross_Stilde_in_S_cells": [i for i in range(1, n)
                                        if not stmap.point_vals[i].issubset(smap.open_vals[i - 1])],
        }
        s_dom = not bad["s_is_cl_dom_h"]
        st_dom = not bad["stilde_is_cl_dom_htilde"]
        zero = RInterval.singleton(Fraction(0))
        slot0 = stmap.point_vals[0] == zero and htfns[0].domain == zero
        mich_s = not bad["michael_S"]
        mich_st = not bad["michael_Stilde"]
        cross_s = not bad["cross_S_in_Stilde_cells"]
        cross_st = not bad["cross_Stilde_in_S_cells"]
        s_contains_dom = all(hfns[i].domain.issubset(smap.point_vals[i])
                             for i in range(n))
        sets = _decoupled_sets(inst, s)
        mu_atoms = inst.mu.measures[s].atoms
        mut_atoms = inst.mutilde.measures[s].atoms
        proper = _zero_start_ok(inst, s) and not any(v.is_empty for v in sets)
        if proper:
            for i in range(n):
                if mu_atoms[i] > 0 and sets[2 * i].intersect(hfns[i].domain).is_empty:
                    proper = False
                if i >= 1 and mut_atoms[i] > 0 and \
                        sets[2 * i - 1].intersect(htfns[i].domain).is_empty:
                    proper = False
            if mut_atoms[0] > 0 and not htfns[0].domain.contains(Fraction(0)):
                proper = False
        per_scenario[s] = {
            "s_is_cl_dom_h": s_dom,
            "stilde_is_cl_dom_htilde": st_dom,
            "slot0_pinched": slot0,
            "michael_S": mich_s,
            "michael_Stilde": mich_st,
            "cross_S_in_Stilde_cells": cross_s,
            "cross_Stilde_in_S_cells": cross_st,
            "s_contains_dom_h": s_contains_dom,
            "proper": proper,
            "failing_slots": {k: v for k, v in bad.items() if v},
        }
    keys = [k for k in next(iter(per_scenario.values())) if k != "failing_slots"]
    summary = {k: all(per_scenario[s][k] for s in per_scenario) for k in keys}
    summary["minorant_h"] = minorant_certificate(inst.h) is not None
    summary["minorant_htilde"] = minorant_certificate(inst.htilde) is not None
    core = ("s_is_cl_dom_h", "stilde_is_cl_dom_htilde", "slot0_pinched",
            "michael_S", "michael_Stilde", "cross_S_in_Stilde_cells",
            "cross_Stilde_in_S_cells", "proper")
    summary["all_ok"] = all(summary[k] for k in core)
    return {"per_scenario": per_scenario, "summary": summary,
            "all_ok": summary["all_ok"]}


# ---------------------------------------------------------------------------
# Brute-force conjugate oracle
# ---------------------------------------------------------------------------

def conj_bruteforce(inst: Instance, d: DualPair, B, delta,
                    budget: Optional[int] = None) -> Ext:
    """Lower bound of the conjugate by an exhaustive adapted lattice search.

    Enumerates adapted step paths on the once-refined grid with values in
    {-B, -B+delta, ..., B}, evaluating pairing minus primal cost directly
    (no conjugate calculus), and maximizes coordinate by coordinate, which
    is exact because the objective separates across (partition cell, slot).
    Converges to the true conjugate from below as B grows and delta shrinks.
    Returns the -inf sentinel when no lattice path is feasible.
    """
    B, delta = rat(B), rat(delta)
    if B <= 0 or delta <= 0:
        raise ValueError("B and delta must be positive")
    budget = resolve_budget(budget)
    r = inst.refine(2)
    rd = d.refine(2)
    tree, n = r.tree, r.grid.n_slots
    steps = int((2 * B) / delta)
    lattice = [-B + k * delta for k in range(steps + 1)]
    needed = 0
    coords: List[Tuple[int, Tuple[str, ...], List[Q]]] = []
    sets = {s: _fixed_value_sets(r, s) for s in tree.scenarios}
    for i in range(n):
        for cell in tree.cells(i):
            box = RInterval(-B, B)
            constraint = box
            for s in cell:
                constraint = constraint.intersect(sets[s][i])
            if constraint.is_empty:
                pts: List[Q] = []
            else:
                pts = [v for v in lattice if constraint.contains(v)]
            needed += len(pts)
            coords.append((i, cell, pts))
    if needed > budget:
        raise BudgetExceededError(needed, budget)

    # constant part: the forced left limit 0 at time 0
    const_terms = []
    for s in tree.scenarios:
        if not _zero_start_ok(r, s):
            return NEG_INF
        m0 = r.mutilde.measures[s].atoms[0]
        if m0 > 0:
            h0 = r.htilde.functions[s][0].eval(Fraction(0))
            if h0 == INF:
                return NEG_INF
            const_terms.append(xmul(tree.prob(s), xmul(m0, -h0)))
    total: Ext = xsum(const_terms)

    for i, cell, pts in coords:
        best: Ext = NEG_INF
        data = []
        for s in cell:
            p = tree.prob(s)
            coeff = rd.u.measures[s].atoms[i]
            if i + 1 < n:
                coeff = coeff + rd.ut.measures[s].atoms[i + 1]
            mu_i = r.mu.measures[s].atoms[i]
            mut_next = r.mutilde.measures[s].atoms[i + 1] if i + 1 < n else Fraction(0)
            data.append((p, coeff, mu_i, r.h.functions[s][i],
                         mut_next, r.htilde.functions[s][i + 1] if i + 1 < n else None))
        for v in pts:
            val: Ext = Fraction(0)
            for p, coeff, mu_i, hfn, mut_next, htfn in data:
                cost: Ext = Fraction(0)
                if mu_i > 0:
                    cost = xmul(mu_i, hfn.eval(v))
                if mut_next > 0 and cost != INF:
                    cost = xsum([cost, xmul(mut_next, htfn.eval(v))])
                if cost == INF:
                    val = NEG_INF
                    break
                val += p * (coeff * v - cost)
            if val != NEG_INF and (best == NEG_INF or val > best):
                best = val
        if best == NEG_INF:
            return NEG_INF
        total = xsum([total, best])
    return total


def bruteforce_gap_bound(d: DualPair, delta) -> Q:
    """The explicit lattice gap bound delta * E[sum |u| + sum |ut|]."""
    return rat(delta) * d.total_variation_expectation()


# ---------------------------------------------------------------------------
# Subdifferential characterization
# ---------------------------------------------------------------------------

def subdiff_check(inst: Instance, y: RandomPath, d: DualPair) -> Dict:
    """Slot-wise subgradient inclusions versus the exact Fenchel identity.

    The four inclusions: the density of u lies in the subdifferential of h
    at the path value on {mu > 0}; the singular direction of u lies in the
    normal cone of the point constraint set; and the two analogues for the
    predictable side at the left limits.  Their conjunction is equivalent to
    primal value plus conjugate equalling the pairing, which is also checked.
    """
    primal = eval_Fhat(inst, y)
    if primal == INF:
        raise ValueError("path has infinite primal value")
    n = inst.grid.n_slots
    per_scenario = {}
    all_ok = True
    for s in inst.tree.scenarios:
        path = y.paths[s]
        lefts = path.left_values()
        smap, stmap = inst.s_map(s), inst.st_map(s)
        mu_atoms = inst.mu.measures[s].atoms
        mut_atoms = inst.mutilde.measures[s].atoms
        u_atoms = d.u.measures[s].atoms
        ut_atoms = d.ut.measures[s].atoms
        rows = []
        for i in range(n):
            checks = {}
            if mu_atoms[i] > 0:
                density = u_atoms[i] / mu_atoms[i]
                checks["u_density_in_subdiff_h"] = \
                    inst.h.functions[s][i].subdiff(path.values[i]).contains(density)
            elif u_atoms[i] != 0:
                sign = Fraction(1) if u_atoms[i] > 0 else Fraction(-1)
                checks["u_singular_in_normal_cone"] = \
                    indicator(smap.point_vals[i]).subdiff(path.values[i]).contains(sign)
            if mut_atoms[i] > 0:
                density = ut_atoms[i] / mut_atoms[i]
                checks["ut_density_in_subdiff_htilde"] = \
                    inst.htilde.functions[s][i].subdiff(lefts[i]).contains(density)
            elif ut_atoms[i] != 0:
                sign = Fraction(1) if ut_atoms[i] > 0 else Fraction(-1)
                checks["ut_singular_in_normal_cone"] = \
                    indicator(stmap.point_vals[i]).subdiff(lefts[i]).contains(sign)
            rows.append(checks)
            all_ok = all_ok and all(checks.values())
        per_scenario[s] = rows
    conj = conj_pointwise(inst, d)
    pair = expected_pairing(y, d.u, d.ut)
    gap = xsum([primal, conj, -pair]) if conj != INF else INF
    equality = gap == 0
    return {
        "inclusions": per_scenario,
        "all_inclusions": all_ok,
        "primal": primal,
        "conjugate": conj,
        "pairing": pair,
        "fenchel_gap": gap,
        "fenchel_equality": equality,
        "equivalence_ok": all_ok == equality,
    }


# ---------------------------------------------------------------------------
# Interchange rules
# ---------------------------------------------------------------------------

def _single_scenario(inst: Instance) -> str:
    if len(inst.tree.scenarios) != 1:
        raise ValueError("deterministic interchange needs a single scenario")
    return inst.tree.scenarios[0]


def interchange_det(inst: Instance, side: str = "cadlag") -> Dict:
    """Interchange of infimum and integration, deterministic case.

    ``side='cadlag'`` minimizes the h-cost over selections of S;
    ``side='caglad'`` minimizes the htilde-cost over left-continuous
    selections of Stilde (free start).  The right-hand side integrates the
    unconstrained slot infima.  Equality is asserted when the closure
    assumptions hold; otherwise the slot-wise gap is reported, and the
    statement is vacuous when the left side is +inf.
    """
    s = _single_scenario(inst)
    n = inst.grid.n_slots
    if side == "cadlag":
        smap = inst.s_map(s)
        fns = inst.h.functions[s]
        atoms = inst.mu.measures[s].atoms
        feas = [smap.attainable_at(i) for i in range(n)]
        mich = michael_check(smap)
        image_closure = all(smap.point_vals[i] == fns[i].domain for i in range(n)) \
            and all(smap.open_vals[i] == fns[i].domain for i in range(n - 1))
    elif side == "caglad":
        stmap = inst.st_map(s)
        fns = inst.htilde.functions[s]
        atoms = inst.mutilde.measures[s].atoms
        feas = [stmap.point_vals[0]] + [
            stmap.point_vals[i].intersect(stmap.open_vals[i - 1]) for i in range(1, n)]
        mich = {
            "representation_holds": all(
                stmap.point_vals[i].issubset(stmap.open_vals[i - 1])
                for i in range(1, n)),
            "failing_slots": [i for i in range(1, n)
                              if not stmap.point_vals[i].issubset(stmap.open_vals[i - 1])],
        }
        image_closure = all(stmap.point_vals[i] == fns[i].domain for i in range(n)) \
            and all(stmap.open_vals[i] == fns[i + 1].domain for i in range(n - 1))
    else:
        raise ValueError("side must be 'cadlag' or 'caglad'")

    closure_holds = all(
        feas[i].intersect(fns[i].domain) == feas[i] for i in range(n))
    infeasible = any(v.is_empty for v in feas)
    slot_lhs = []
    for i in range(n):
        if atoms[i] == 0:
            slot_lhs.append(Fraction(0))
        else:
            slot_lhs.append(xmul(atoms[i], fns[i].inf_over(feas[i])[0]))
    lhs = INF if infeasible else xsum(slot_lhs)
    rhs = xsum(xmul(atoms[i], fns[i].min_on_line()) for i in range(n))
    vacuous = lhs == INF
    if vacuous:
        gap = None
    elif lhs == rhs:
        gap = Fraction(0)
    else:
        gap = xsum([lhs, xneg(rhs)])
    assumptions = {
        "michael": mich["representation_holds"],
        "michael_failing_slots": mich["failing_slots"],
        "image_closure": image_closure,
        "domain_closure": closure_holds,
    }
    return {
        "side": side,
        "lhs": lhs,
        "rhs": rhs,
        "gap": gap,
        "vacuous": vacuous,
        "ok": vacuous or lhs == rhs,
        "assumptions": assumptions,
        "assumptions_ok": mich["representation_holds"] and image_closure and closure_holds,
    }


def interchange_stoch(inst: Instance, form: str = "Fhat") -> Dict:
    """Interchange over adapted paths, with the pasting witness.

    The left side minimizes per (partition cell, slot) since the objective
    separates across the tree; for the hatted form this runs on the refined
    coordinates.  When every slot infimum is attained, an explicit adapted
    witness path is assembled (for the hatted form by pasting the
    left-limit-optimal path into the cells announcing the predictable atoms)
    and its primal value is asserted to equal the left side exactly.
    """
    if form not in ("F", "Fhat"):
        raise ValueError("form must be 'F' or 'Fhat'")
    report = assumption_report(inst)
    if form == "F":
        return _interchange_stoch_F(inst, report)
    return _interchange_stoch_Fhat(inst, report)


def _interchange_stoch_F(inst: Instance, assumptions: Dict) -> Dict:
    tree, n = inst.tree, inst.grid.n_slots
    lhs_terms: List[Ext] = []
    infeasible = False
    witness_vals: Dict[str, List[Optional[Q]]] = {s: [None] * n for s in tree.scenarios}
    attained = True
    for i in range(n):
        for cell in tree.cells(i):
            rep = cell[0]
            feas = inst.s_map(rep).attainable_at(i)
            for s in cell[1:]:
                feas = feas.intersect(inst.s_map(s).attainable_at(i))
            if feas.is_empty:
                infeasible = True
                continue
            mu_i = inst.mu.measures[rep].atoms[i]
            p_cell = sum((tree.prob(s) for s in cell), Fraction(0))
            if mu_i > 0:
                val, argmin = inst.h.functions[rep][i].inf_over(feas)
                lhs_terms.append(xmul(p_cell, xmul(mu_i, val)))
            else:
                argmin = feas
            if argmin.is_empty:
                attained = False
                point = None
            else:
                point = argmin.nearest_to(Fraction(0))
            for s in cell:
                witness_vals[s][i] = point
    lhs = INF if infeasible else xsum(lhs_terms)
    rhs_vals = {
        s: xsum(xmul(inst.mu.measures[s].atoms[i],
                     inst.h.functions[s][i].min_on_line())
                for i in range(n) if inst.mu.measures[s].atoms[i] > 0)
        for s in tree.scenarios
    }
    rhs = tree.expectation(rhs_vals)
    out = {
        "form": "F",
        "lhs": lhs,
        "rhs": rhs,
        "vacuous": lhs == INF,
        "ok": lhs == INF or lhs == rhs,
        "assumptions": assumptions["summary"],
        "assumptions_ok": assumptions["all_ok"],
        "witness": None,
    }
    if not infeasible and attained:
        paths = {s: StepPath(inst.grid, tuple(witness_vals[s]))
                 for s in tree.scenarios}
        witness = RandomPath(tree, inst.grid, paths)
        achieved = eval_F(inst, witness)
        assert achieved == lhs, "witness must achieve the infimum exactly"
        out["witness"] = witness
        out["witness_value"] = achieved
    return out


def _interchange_stoch_Fhat(inst: Instance, assumptions: Dict) -> Dict:
    r = inst.refine(2)
    tree, n = r.tree, r.grid.n_slots
    sets = {s: _fixed_value_sets(r, s) for s in tree.scenarios}
    infeasible = any(not _zero_start_ok(r, s) for s in tree.scenarios)
    lhs_terms: List[Ext] = []
    for s in tree.scenarios:
        m0 = r.mutilde.measures[s].atoms[0]
        if m0 > 0:
            lhs_terms.append(xmul(tree.prob(s),
                                  xmul(m0, r.htilde.functions[s][0].eval(Fraction(0)))))
    y_vals: Dict[str, List[Optional[Q]]] = {s: [None] * n for s in tree.scenarios}
    yt_vals: Dict[str, List[Optional[Q]]] = {s: [None] * n for s in tree.scenarios}
    attained = True
    for i in range(n):
        for cell in tree.cells(i):
            rep = cell[0]
            feas = RInterval.whole_line()
            for s in cell:
                feas = feas.intersect(sets[s][i])
            if feas.is_empty:
                infeasible = True
                continue
            mu_i = r.mu.measures[rep].atoms[i]
            mut_next = r.mutilde.measures[rep].atoms[i + 1] if i + 1 < n else Fraction(0)
            p_cell = sum((tree.prob(s) for s in cell), Fraction(0))
            # h-side optimum defines y; the htilde-side optimum defines ytilde
            if mu_i > 0:
                val, argmin = r.h.functions[rep][i].inf_over(feas)
                lhs_terms.append(xmul(p_cell, xmul(mu_i, val)))
                y_point = argmin.nearest_to(Fraction(0)) if not argmin.is_empty else None
            else:
                y_point = feas.nearest_to(Fraction(0))
            if mut_next > 0:
                val, argmin = r.htilde.functions[rep][i + 1].inf_over(feas)
                lhs_terms.append(xmul(p_cell, xmul(mut_next, val)))
                yt_point = argmin.nearest_to(Fraction(0)) if not argmin.is_empty else None
            else:
                yt_point = y_point
            if y_point is None or yt_point is None:
                attained = False
            for s in cell:
                y_vals[s][i] = y_point
                yt_vals[s][i] = yt_point
    lhs = INF if infeasible else xsum(lhs_terms)
    rhs_vals = {}
    for s in tree.scenarios:
        terms = [xmul(inst.mu.measures[s].atoms[i],
                      inst.h.functions[s][i].min_on_line())
                 for i in range(inst.grid.n_slots)
                 if inst.mu.measures[s].atoms[i] > 0]
        terms += [xmul(inst.mutilde.measures[s].atoms[i],
                       inst.htilde.functions[s][i].min_on_line())
                  for i in range(inst.grid.n_slots)
                  if inst.mutilde.measures[s].atoms[i] > 0]
        rhs_vals[s] = xsum(terms)
    rhs = tree.expectation(rhs_vals)
    out = {
        "form": "Fhat",
        "lhs": lhs,
        "rhs": rhs,
        "vacuous": lhs == INF,
        "ok": lhs == INF or lhs == rhs,
        "assumptions": assumptions["summary"],
        "assumptions_ok": assumptions["all_ok"],
        "witness": None,
    }
    if not infeasible and attained:
        y = RandomPath(tree, r.grid,
                       {s: StepPath(r.grid, tuple(y_vals[s])) for s in tree.scenarios})
        yt = RandomPath(tree, r.grid,
                        {s: StepPath(r.grid, tuple(yt_vals[s])) for s in tree.scenarios})
        atoms = predictable_atoms(r.mutilde)
        z = paste(y, yt, atoms)
        achieved = eval_Fhat(r, z)
        assert achieved == lhs, "pasting witness must achieve the infimum exactly"
        out["witness"] = z
        out["witness_value"] = achieved
    return out
