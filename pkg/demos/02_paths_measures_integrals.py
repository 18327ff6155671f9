"""Step paths, atomic measures and the two integral functionals.

The pairing charges a measure against the path and a second, predictable
measure against its left limits (the left limit at time 0 is 0 by
convention).  The J-functional splits a signed measure against a reference:
densities are fed to the function, leftover atoms to its recession function.
"""

from cadlagconvex import (GridMeasure, StepPath, TimeGrid, abs_fn, eval_I,
                          eval_J, lebesgue_decompose, pairing)


def main():
    grid = TimeGrid((0, 1, 2))
    y = StepPath(grid, (1, 3, 2))
    print("grid times:", [str(t) for t in grid.times])
    print("path values:", [str(v) for v in y.values])
    print("left limits:", [str(v) for v in y.left_values()], " (0 at time 0)")

    u = GridMeasure(grid, (1, 1, 0))
    ut = GridMeasure(grid, (0, 2, 0))
    print("\npairing <y,(u,ut)> =", pairing(y, u, ut),
          " (= 1*1 + 3*1 + left-limit 1 * 2)")

    theta = GridMeasure(grid, (2, 0, 3))
    mu = GridMeasure(grid, (1, 1, 0))
    split = lebesgue_decompose(theta, mu)
    print("\nLebesgue split of theta against mu:")
    print("  densities:", [str(d) if d is not None else "-" for d in split.density])
    print("  singular atoms:", [str(s) if s is not None else "-" for s in split.singular])
    print("  recombines exactly:", split.recombine(mu) == theta)

    h = [abs_fn()] * 3
    print("\nI_h(y) against mu =", eval_I(h, y, mu))
    print("J_h(theta) against mu =", eval_J(h, theta, mu),
          " (densities pay |.|, the singular atom pays its variation)")

    fine = grid.refine(2)
    print("\nrefining the grid is invisible to every functional:")
    print("  refined times:", [str(t) for t in fine.times])
    print("  pairing unchanged:",
          pairing(y.refine(2), u.refine(2), ut.refine(2)) == pairing(y, u, ut))


if __name__ == "__main__":
    main()
