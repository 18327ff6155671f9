"""Finite scenario trees and the discrete optional/predictable calculus.

A tree is a finite probability space together with one partition of the
scenarios per grid time, each refining the previous one.  Slot-i data of an
optional object is constant on the cells of ``partitions[i]``; predictable
data is constant on the cells of ``partitions[i-1]`` (``partitions[0]`` at
slot 0), while open-cell data of either kind is constant on ``partitions[i]``
because no information arrives strictly between grid times.

Projections are cell-wise probability-weighted averages, so everything
stays rational and Jensen/tower identities can be asserted exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .plconvex import PLConvex
from .rationals import Ext, Q, rat, xmul, xsum
from .setmaps import SetMap
from .timegrid import GridMeasure, StepPath, TimeGrid, eval_I, pairing

Cell = Tuple[str, ...]
Partition = Tuple[Cell, ...]


@dataclass(frozen=True)
class ScenarioTree:
    """Finite filtered probability space given by nested partitions."""

    scenarios: Tuple[str, ...]
    probs: Tuple[Q, ...]
    partitions: Tuple[Partition, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "probs", tuple(rat(p) for p in self.probs))
        parts = tuple(
            tuple(sorted(tuple(sorted(cell)) for cell in partition))
            for partition in self.partitions
        )
        object.__setattr__(self, "partitions", parts)
        if len(self.scenarios) != len(set(self.scenarios)):
            raise ValueError("duplicate scenario ids")
        if len(self.probs) != len(self.scenarios):
            raise ValueError("need one probability per scenario")
        if any(p <= 0 for p in self.probs) or sum(self.probs) != 1:
            raise ValueError("probabilities must be positive and sum to 1")
        universe = sorted(self.scenarios)
        for partition in parts:
            flat = sorted(s for cell in partition for s in cell)
            if flat != universe:
                raise ValueError("each slot must partition the scenario set")
        for coarse, fine in zip(parts, parts[1:]):
            for cell in fine:
                if not any(set(cell) <= set(big) for big in coarse):
                    raise ValueError("partitions must refine over time")

    @property
    def n_slots(self) -> int:
        return len(self.partitions)

    def prob(self, scenario: str) -> Q:
        return self.probs[self.scenarios.index(scenario)]

    def cell_of(self, slot: int, scenario: str) -> Cell:
        for cell in self.partitions[slot]:
            if scenario in cell:
                return cell
        raise KeyError(scenario)

    def cells(self, slot: int) -> Partition:
        return self.partitions[slot]

    def pred_slot(self, slot: int) -> int:
        """Slot whose partition carries predictable data for this slot."""
        return max(slot - 1, 0)

    def expectation(self, values: Mapping[str, Ext]) -> Ext:
        return xsum(xmul(self.prob(s), values[s]) for s in self.scenarios)

    def cell_average(self, slot: int, values: Mapping[str, Q]) -> Dict[str, Q]:
        """Conditional expectation given the slot's partition, exact."""
        out: Dict[str, Q] = {}
        for cell in self.partitions[slot]:
            mass = sum((self.prob(s) for s in cell), Fraction(0))
            avg = sum((self.prob(s) * values[s] for s in cell), Fraction(0)) / mass
            for s in cell:
                out[s] = avg
        return out

    def refine(self, factor: int) -> "ScenarioTree":
        """Partitions at inserted times copy the preceding grid time."""
        parts: List[Partition] = []
        for p in self.partitions[:-1]:
            parts.extend([p] * factor)
        parts.append(self.partitions[-1])
        return ScenarioTree(self.scenarios, self.probs, tuple(parts))

    @classmethod
    def deterministic(cls, n_slots: int) -> "ScenarioTree":
        return cls(("w",), (Fraction(1),), ((("w",),),) * n_slots)


def _constant_on(cell: Cell, values: Mapping[str, object]) -> bool:
    first = values[cell[0]]
    return all(values[s] == first for s in cell[1:])


# ---------------------------------------------------------------------------
# Random objects: one deterministic object per scenario on a shared grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomPath:
    tree: ScenarioTree
    grid: TimeGrid
    paths: Mapping[str, StepPath]

    def __post_init__(self):
        _validate_family(self.tree, self.grid, self.paths)

    def slot_values(self, i: int) -> Dict[str, Q]:
        return {s: self.paths[s].values[i] for s in self.tree.scenarios}

    def left_slot_values(self, i: int) -> Dict[str, Q]:
        return {s: self.paths[s].left_values()[i] for s in self.tree.scenarios}

    def refine(self, factor: int) -> "RandomPath":
        return RandomPath(self.tree.refine(factor), self.grid.refine(factor),
                          {s: p.refine(factor) for s, p in self.paths.items()})


@dataclass(frozen=True)
class RandomMeasure:
    tree: ScenarioTree
    grid: TimeGrid
    measures: Mapping[str, GridMeasure]

    def __post_init__(self):
        _validate_family(self.tree, self.grid, self.measures)

    @property
    def is_nonnegative(self) -> bool:
        return all(m.is_nonnegative for m in self.measures.values())

    def slot_values(self, i: int) -> Dict[str, Q]:
        return {s: self.measures[s].atoms[i] for s in self.tree.scenarios}

    def refine(self, factor: int) -> "RandomMeasure":
        return RandomMeasure(self.tree.refine(factor), self.grid.refine(factor),
                             {s: m.refine(factor) for s, m in self.measures.items()})

    @classmethod
    def zero(cls, tree: ScenarioTree, grid: TimeGrid) -> "RandomMeasure":
        return cls(tree, grid, {s: GridMeasure.zero(grid) for s in tree.scenarios})


@dataclass(frozen=True)
class RandomSetMap:
    tree: ScenarioTree
    grid: TimeGrid
    maps: Mapping[str, SetMap]

    def __post_init__(self):
        _validate_family(self.tree, self.grid, self.maps)

    def vec_map(self) -> "RandomSetMap":
        return RandomSetMap(self.tree, self.grid,
                            {s: m.vec_map() for s, m in self.maps.items()})

    def refine(self, factor: int) -> "RandomSetMap":
        return RandomSetMap(self.tree.refine(factor), self.grid.refine(factor),
                            {s: m.refine(factor) for s, m in self.maps.items()})


@dataclass(frozen=True)
class RandomIntegrand:
    """Per-scenario families of convex functions, one per grid time."""

    tree: ScenarioTree
    grid: TimeGrid
    functions: Mapping[str, Tuple[PLConvex, ...]]
    flag: str = "raw"  # optional | predictable | raw

    def __post_init__(self):
        if self.flag not in ("optional", "predictable", "raw"):
            raise ValueError(f"unknown flag {self.flag!r}")
        for s in self.tree.scenarios:
            if s not in self.functions:
                raise ValueError(f"missing scenario {s!r}")
            if len(self.functions[s]) != self.grid.n_slots:
                raise ValueError("need one integrand per grid time")

    def at(self, scenario: str, slot: int) -> PLConvex:
        return self.functions[scenario][slot]

    def slot_values(self, i: int) -> Dict[str, PLConvex]:
        return {s: self.functions[s][i] for s in self.tree.scenarios}

    def refine(self, factor: int) -> "RandomIntegrand":
        """Optional data extends from the left grid time, predictable from the right."""
        out: Dict[str, Tuple[PLConvex, ...]] = {}
        from_right = self.flag == "predictable"
        for s, fns in self.functions.items():
            fam: List[PLConvex] = []
            for i in range(len(fns) - 1):
                fam.append(fns[i])
                filler = fns[i + 1] if from_right else fns[i]
                fam.extend([filler] * (factor - 1))
            fam.append(fns[-1])
            out[s] = tuple(fam)
        return RandomIntegrand(self.tree.refine(factor), self.grid.refine(factor),
                               out, self.flag)


def _validate_family(tree: ScenarioTree, grid: TimeGrid, family: Mapping) -> None:
    if tree.n_slots != grid.n_slots:
        raise ValueError("tree must carry one partition per grid time")
    for s in tree.scenarios:
        if s not in family:
            raise ValueError(f"missing scenario {s!r}")
        if family[s].grid != grid:
            raise ValueError("grid mismatch")


# ---------------------------------------------------------------------------
# Adaptedness and projections
# ---------------------------------------------------------------------------

def _slot_data(x, i: int) -> Dict[str, object]:
    if isinstance(x, (RandomPath, RandomMeasure, RandomIntegrand)):
        return x.slot_values(i)
    if isinstance(x, RandomSetMap):
        return {s: x.maps[s].point_vals[i] for s in x.tree.scenarios}
    raise TypeError(f"no slot data for {type(x).__name__}")


def _cell_data(x, i: int) -> Optional[Dict[str, object]]:
    """Open-cell data on (t_i, t_{i+1}); None when it repeats the point data."""
    if isinstance(x, RandomSetMap):
        return {s: x.maps[s].open_vals[i] for s in x.tree.scenarios}
    return None


def check_adapted(x) -> bool:
    """Slot-i data constant on each cell of partitions[i] (optional data)."""
    tree = x.tree
    for i in range(tree.n_slots):
        data = _slot_data(x, i)
        if not all(_constant_on(cell, data) for cell in tree.cells(i)):
            return False
        if i < tree.n_slots - 1:
            cdata = _cell_data(x, i)
            if cdata is not None and \
                    not all(_constant_on(cell, cdata) for cell in tree.cells(i)):
                return False
    return True


def check_predictable(x) -> bool:
    """Slot-i data constant on partitions[i-1]; open cells still on partitions[i]."""
    tree = x.tree
    for i in range(tree.n_slots):
        data = _slot_data(x, i)
        if not all(_constant_on(cell, data) for cell in tree.cells(tree.pred_slot(i))):
            return False
        if i < tree.n_slots - 1:
            cdata = _cell_data(x, i)
            if cdata is not None and \
                    not all(_constant_on(cell, cdata) for cell in tree.cells(i)):
                return False
    return True


def optional_projection(w: RandomPath) -> RandomPath:
    """Slot-wise conditional expectation onto the current partition."""
    return _project(w, lambda i: i)


def predictable_projection(w: RandomPath) -> RandomPath:
    """Slot-wise conditional expectation onto the previous partition."""
    return _project(w, w.tree.pred_slot)


def _project(w: RandomPath, which_slot: Callable[[int], int]) -> RandomPath:
    tree = w.tree
    per_slot = [tree.cell_average(which_slot(i), w.slot_values(i))
                for i in range(tree.n_slots)]
    paths = {
        s: StepPath(w.grid, tuple(per_slot[i][s] for i in range(tree.n_slots)))
        for s in tree.scenarios
    }
    return RandomPath(tree, w.grid, paths)


def expected_pairing(y: RandomPath, u: RandomMeasure, ut: RandomMeasure) -> Q:
    tree = y.tree
    vals = {s: pairing(y.paths[s], u.measures[s], ut.measures[s])
            for s in tree.scenarios}
    return tree.expectation(vals)


def expected_integral(h: RandomIntegrand, w: RandomPath, mu: RandomMeasure) -> Ext:
    tree = w.tree
    vals = {s: eval_I(h.functions[s], w.paths[s], mu.measures[s])
            for s in tree.scenarios}
    return tree.expectation(vals)


# ---------------------------------------------------------------------------
# Jensen's inequality for the projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinorantCertificate:
    """Optional (v, alpha) with h >= v*y - alpha slot-wise; always exists here."""

    v: Dict[str, Tuple[Q, ...]]
    alpha: Dict[str, Tuple[Q, ...]]


def minorant_certificate(h: RandomIntegrand) -> MinorantCertificate:
    """Pick v in dom h* slot-wise (a middle slope) and alpha = (h*(v))^+.

    Every proper piecewise-linear convex function admits such a pair, and the
    choice is a deterministic function of the slot integrand, so it inherits
    the integrand's measurability.
    """
    v: Dict[str, Tuple[Q, ...]] = {}
    alpha: Dict[str, Tuple[Q, ...]] = {}
    for s in h.tree.scenarios:
        vs, als = [], []
        for fn in h.functions[s]:
            slope = fn.slopes[len(fn.slopes) // 2]
            star = fn.conjugate().eval(slope)
            vs.append(slope)
            als.append(max(star, Fraction(0)))
        v[s] = tuple(vs)
        alpha[s] = tuple(als)
    return MinorantCertificate(v, alpha)


def jensen_check(h: RandomIntegrand, mu: RandomMeasure, w: RandomPath,
                 projection: str = "optional") -> Dict:
    """Compare E I_h(w) with E I_h of the projected process.

    Preconditions (verified, not assumed): the integrand and measure carry
    the optional (resp. predictable) flag and are measurable accordingly, the
    measure is nonnegative, and an integrable affine minorant of h exists;
    the certificate is produced constructively.
    """
    if projection not in ("optional", "predictable"):
        raise ValueError("projection must be 'optional' or 'predictable'")
    check = check_adapted if projection == "optional" else check_predictable
    problems = []
    if h.flag != projection or not check(h):
        problems.append(f"integrand is not {projection}")
    if not check(mu):
        problems.append(f"measure is not {projection}")
    if not mu.is_nonnegative:
        problems.append("measure is not nonnegative")
    if problems:
        raise ValueError("; ".join(problems))
    cert = minorant_certificate(h)
    proj = optional_projection(w) if projection == "optional" else predictable_projection(w)
    lhs = expected_integral(h, w, mu)
    rhs = expected_integral(h, proj, mu)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ok": lhs >= rhs,
        "projection": projection,
        "minorant": cert,
    }


def optionality_identity_check(v: RandomPath, mu: RandomMeasure) -> bool:
    """E integral of v d(mu) equals the same with v optionally projected."""
    if not mu.is_nonnegative:
        raise ValueError("mu must be nonnegative")
    tree = v.tree
    ov = optional_projection(v)

    def integral(path: RandomPath) -> Q:
        vals = {
            s: sum((a * b for a, b in zip(path.paths[s].values, mu.measures[s].atoms)),
                   Fraction(0))
            for s in tree.scenarios
        }
        return tree.expectation(vals)

    return integral(v) == integral(ov)


def measure_is_optional(mu: RandomMeasure) -> bool:
    """Operational optionality: the identity holds on a generating family.

    The family consists of one indicator-like path per (slot, finest cell);
    on finite trees this quantification characterizes adapted atoms.
    """
    tree = mu.tree
    last = tree.n_slots - 1
    zero = (Fraction(0),) * tree.n_slots
    for i in range(tree.n_slots):
        for cell in tree.cells(last):
            paths = {}
            for s in tree.scenarios:
                vals = list(zero)
                if s in cell:
                    vals[i] = Fraction(1)
                paths[s] = StepPath(mu.grid, tuple(vals))
            if not optionality_identity_check(RandomPath(tree, mu.grid, paths), mu):
                return False
    return True


# ---------------------------------------------------------------------------
# Predictable atoms, announcing indices and the pasting construction
# ---------------------------------------------------------------------------

def predictable_atoms(ut: RandomMeasure) -> Dict[str, Tuple[int, ...]]:
    """Atom slots {i : atom != 0} per scenario; the measure must be predictable."""
    if not check_predictable(ut):
        raise ValueError("measure is not predictable")
    return {
        s: tuple(i for i, a in enumerate(ut.measures[s].atoms) if a != 0)
        for s in ut.tree.scenarios
    }


def announce(j: int) -> int:
    """Discrete announcing index of a predictable atom slot: one step earlier.

    The atom at t_j is measurable at t_{j-1}, so the announcement is exact and
    strictly earlier.  Atoms at t_0 need no announcement: they pair against
    the left limit at 0, which is 0 by convention.
    """
    if j < 1:
        raise ValueError("slot 0 atoms are announced before time zero by convention")
    return j - 1


def paste(y: RandomPath, ytilde: RandomPath,
          atoms: Mapping[str, Sequence[int]]) -> RandomPath:
    """Splice the second path into the cells preceding the given atom slots.

    The result z takes ytilde's value on slot i whenever i+1 is an atom slot
    (the one-cell window before the atom) and y's value otherwise, so its
    left limit at every atom time matches ytilde's.  Both inputs must be
    adapted and the atom sets predictable (the indicator of "i+1 is an atom"
    must be known at slot i); the output is then adapted again.
    """
    tree = y.tree
    if y.grid != ytilde.grid or y.tree != ytilde.tree:
        raise ValueError("paths must share tree and grid")
    if not check_adapted(y) or not check_adapted(ytilde):
        raise ValueError("paste needs adapted inputs")
    for i in range(tree.n_slots):
        flags = {s: (i + 1) in atoms.get(s, ()) for s in tree.scenarios}
        if not all(_constant_on(cell, flags) for cell in tree.cells(i)):
            raise ValueError(f"atom indicator at slot {i + 1} is not predictable")
    paths = {}
    for s in tree.scenarios:
        marked = set(atoms.get(s, ()))
        vals = tuple(
            ytilde.paths[s].values[i] if (i + 1) in marked else y.paths[s].values[i]
            for i in range(tree.n_slots)
        )
        paths[s] = StepPath(y.grid, vals)
    z = RandomPath(tree, y.grid, paths)
    assert check_adapted(z)
    return z
