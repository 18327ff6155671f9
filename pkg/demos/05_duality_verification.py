"""The headline checks: conjugate formula, subgradients, interchange.

The pointwise conjugate evaluates the J-functionals of the conjugate
integrands; the oracle searches adapted lattice paths on the once-refined
grid and must land within delta times the dual mass.  The subdifferential
report shows the slot-wise inclusions and the Fenchel identity agreeing, and
the stochastic interchange exhibits the pasting witness.
"""

import random
from fractions import Fraction as F

from cadlagconvex.duality import (DualPair, bruteforce_gap_bound,
                                  conj_bruteforce, conj_pointwise, eval_Fhat,
                                  interchange_stoch, make_instance,
                                  subdiff_check)
from cadlagconvex.generators import rand_finite_dual, rand_passing_instance
from cadlagconvex.plconvex import RInterval, abs_fn, pl, restrict
from cadlagconvex.scenario import (RandomIntegrand, RandomMeasure, RandomPath,
                                   ScenarioTree)
from cadlagconvex.timegrid import GridMeasure, StepPath, TimeGrid


def main():
    rng = random.Random(7)

    print("== conjugate: exact formula vs lattice oracle ==")
    inst = rand_passing_instance(rng, with_htilde=True)
    d = rand_finite_dual(rng, inst)
    pointwise = conj_pointwise(inst, d)
    B = 2 * inst.magnitude_bound()
    delta = F(1, 100)
    brute = conj_bruteforce(inst, d, B, delta)
    print("  pointwise:", pointwise)
    print("  brute force:", brute)
    print("  gap:", pointwise - brute, "<= bound:", bruteforce_gap_bound(d, delta))

    print("\n== subdifferential characterization ==")
    grid = TimeGrid((0, 1))
    half = F(1, 2)
    tree = ScenarioTree(("up", "dn"), (half, half),
                        ((("up", "dn"),), (("up",), ("dn",))))
    h = RandomIntegrand(tree, grid, {s: (abs_fn(), abs_fn()) for s in ("up", "dn")},
                        "optional")
    mu = RandomMeasure(tree, grid, {s: GridMeasure(grid, (1, 1)) for s in ("up", "dn")})
    flat = make_instance(tree, grid, h, mu)
    y = RandomPath(tree, grid, {s: StepPath(grid, (0, 0)) for s in ("up", "dn")})
    good = DualPair(
        RandomMeasure(tree, grid, {"up": GridMeasure(grid, (half, 1)),
                                   "dn": GridMeasure(grid, (half, -half))}),
        RandomMeasure.zero(tree, grid))
    rep = subdiff_check(flat, y, good)
    print("  inclusions hold:", rep["all_inclusions"],
          " Fenchel gap:", rep["fenchel_gap"])
    bad = DualPair(
        RandomMeasure(tree, grid, {s: GridMeasure(grid, (2, 0)) for s in ("up", "dn")}),
        RandomMeasure.zero(tree, grid))
    worse = subdiff_check(flat, y, bad)
    print("  density 2 outside d|.|(0):", worse["all_inclusions"],
          " gap:", worse["fenchel_gap"], " (equivalence verdict:",
          str(worse["equivalence_ok"]) + ")")

    print("\n== stochastic interchange with the pasting witness ==")
    kink = restrict(abs_fn(), RInterval(F(-6), F(6)))
    target = pl(F(-6), F(6), (F(5),), (-1, 1), F(5), F(0))
    pinch = pl(F(0), F(0), (), (0,), F(0), F(0))
    h2 = RandomIntegrand(tree, grid, {s: (kink, kink) for s in ("up", "dn")}, "optional")
    ht = RandomIntegrand(tree, grid, {s: (pinch, target) for s in ("up", "dn")},
                         "predictable")
    mut = RandomMeasure(tree, grid, {s: GridMeasure(grid, (0, 3)) for s in ("up", "dn")})
    inst2 = make_instance(tree, grid, h2, mu, mut, ht)
    rep2 = interchange_stoch(inst2, "Fhat")
    print("  lhs == rhs:", rep2["lhs"], "==", rep2["rhs"])
    z = rep2["witness"]
    print("  witness (up):", [str(v) for v in z.paths["up"].values],
          " (jumps to 5 on the half-cell announcing the atom)")
    print("  witness value:", eval_Fhat(inst2.refine(2), z))


if __name__ == "__main__":
    main()
