"""Scenario trees: projections, the Jensen inequality and pasting.

The filtration is a chain of partitions; optional data is known at its own
slot, predictable data one slot earlier.  Projections are exact cell
averages, so the Jensen inequality and the tower property can be asserted
with equality checks instead of tolerances.
"""

from fractions import Fraction as F

from cadlagconvex import GridMeasure, StepPath, TimeGrid, abs_fn
from cadlagconvex.scenario import (RandomIntegrand, RandomMeasure, RandomPath,
                                   ScenarioTree, check_adapted,
                                   check_predictable, jensen_check,
                                   optional_projection, paste,
                                   predictable_atoms)


def main():
    grid = TimeGrid((0, 1, 2))
    half = F(1, 2)
    tree = ScenarioTree(("up", "dn"), (half, half),
                        ((("up", "dn"),), (("up",), ("dn",)), (("up",), ("dn",))))
    print("partitions:", [[list(c) for c in p] for p in tree.partitions])

    w = RandomPath(tree, grid, {"up": StepPath(grid, (2, 1, 0)),
                                "dn": StepPath(grid, (4, 1, 0))})
    print("\nraw process values at t0:", {s: str(w.paths[s].values[0]) for s in ("up", "dn")})
    print("adapted:", check_adapted(w), " (the root cell cannot see the split)")
    ow = optional_projection(w)
    print("optional projection at t0:", {s: str(ow.paths[s].values[0]) for s in ("up", "dn")})

    h = RandomIntegrand(tree, grid, {s: (abs_fn(),) * 3 for s in ("up", "dn")},
                        "optional")
    mu = RandomMeasure(tree, grid, {s: GridMeasure(grid, (1, 0, 0))
                                    for s in ("up", "dn")})
    spread = RandomPath(tree, grid, {"up": StepPath(grid, (1, 0, 0)),
                                     "dn": StepPath(grid, (-1, 0, 0))})
    rep = jensen_check(h, mu, spread)
    print("\nJensen: E I(w) =", rep["lhs"], ">= E I(proj w) =", rep["rhs"])

    print("\n== pasting before a predictable atom ==")
    mut = RandomMeasure(tree, grid, {s: GridMeasure(grid, (0, 0, 2))
                                     for s in ("up", "dn")})
    atoms = predictable_atoms(mut)
    print("atom slots:", dict(atoms), " announced one slot earlier")
    y = RandomPath(tree, grid, {s: StepPath(grid, (0, 0, 0)) for s in ("up", "dn")})
    target = RandomPath(tree, grid, {s: StepPath(grid, (7, 7, 7)) for s in ("up", "dn")})
    z = paste(y, target, atoms)
    print("pasted path (up):", [str(v) for v in z.paths["up"].values])
    print("left limit at the atom matches the target:",
          z.paths["up"].left_values()[2] == 7)
    print("still adapted:", check_adapted(z))
    print("predictable flag of the atom measure:", check_predictable(mut))


if __name__ == "__main__":
    main()
