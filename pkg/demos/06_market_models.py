"""Market presets: obstacle bounds, bid-ask bands, currency cones.

Each preset gives the support function of its constraint set in closed form;
the generic machinery must reproduce it exactly, and a lattice search
certifies it from below.
"""

import random
from fractions import Fraction as F

from cadlagconvex.duality import DualPair, conj_bruteforce, support_DS
from cadlagconvex.finmodels import (ScalarProcess, VectorMeasure, bidask_model,
                                    bidask_support, currency_model,
                                    left_usc_reg, obstacle_model,
                                    obstacle_support, vector_pairing)
from cadlagconvex.polycone import ConeMap, PolyCone, cs_regularity_check
from cadlagconvex.scenario import RandomMeasure, RandomPath, ScenarioTree
from cadlagconvex.timegrid import GridMeasure, StepPath, TimeGrid


def main():
    grid = TimeGrid((0, 1, 2))
    tree = ScenarioTree.deterministic(3)

    print("== obstacle: stay above an optional bound ==")
    b = ScalarProcess.constant_cells(tree, grid, {"w": (1, 3)}, "optional")
    model = obstacle_model(b, RandomPath(tree, grid, {"w": StepPath(grid, (5, 5, 5))}))
    print("  bound cells:", [str(v) for v in b.cells["w"]],
          " left regularization:", [str(v) for v in left_usc_reg(b).points["w"]])
    d = DualPair(RandomMeasure.zero(tree, grid),
                 RandomMeasure(tree, grid, {"w": GridMeasure(grid, (0, -2, 0))}))
    print("  closed form:", obstacle_support(model, d),
          " generic support:", support_DS(model.instance, d))

    print("\n== bid-ask band ==")
    bid = ScalarProcess.constant_cells(tree, grid, {"w": (0, 1)}, "optional")
    ask = ScalarProcess.constant_cells(tree, grid, {"w": (2, 3)}, "optional")
    band = bidask_model(bid, ask, RandomPath(tree, grid, {"w": StepPath(grid, (F(3, 2),) * 3)}))
    d2 = DualPair(RandomMeasure(tree, grid, {"w": GridMeasure(grid, (1, -1, 0))}),
                  RandomMeasure(tree, grid, {"w": GridMeasure(grid, (0, 1, 0))}))
    closed = bidask_support(band, d2)
    print("  closed form:", closed, " generic:", support_DS(band.instance, d2))
    brute = conj_bruteforce(band.instance, d2, B=6, delta=F(1, 4))
    print("  lattice oracle from below:", brute)

    print("\n== currency market: polar membership ==")
    solvency = ConeMap.constant(grid, PolyCone.orthant(2).polar())
    cm = currency_model(solvency)
    print("  constraint cones are orthants; preconditions:", cm.report["pass"])
    u = VectorMeasure(grid, ((-1, -1), (0, 0), (0, 0)))
    zero = VectorMeasure(grid, ((0, 0),) * 3)
    print("  direction (-1,-1) is a member:", cm.is_member(u, zero)["member"])
    rng = random.Random(1)
    worst = max(vector_pairing(cm.sample_selection(rng), u, zero) for _ in range(100))
    print("  pairing against 100 sampled selections stays <= 0:", worst <= 0)

    print("\n== solvency-cone regularity ==")
    k0 = PolyCone.from_generators([(1, F(1, 2)), (F(1, 2), 1)], 2)
    k1 = PolyCone.from_generators([(1, F(1, 4)), (F(1, 4), 1)], 2)
    g_map = ConeMap(grid, (k0, k1, k1), (k0, k1))
    gt_map = ConeMap(grid, (PolyCone.zero(2), k0, k1), (k0, k1))
    rep = cs_regularity_check(g_map, gt_map)
    print("  efficient friction, window regularity, polar conclusions:",
          rep["pass"])


if __name__ == "__main__":
    main()
