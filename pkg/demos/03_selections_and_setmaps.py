"""Interval-valued maps, right-continuity of selections and metric projections.

A mapping holds one interval at each grid time and one on each open cell.
Right-continuous selections can only attain the part of a point value that
its following cell supports, which makes the representation "point value =
closure of selection values" decidable slot by slot, and exactly equivalent
to right inner semicontinuity.
"""

from fractions import Fraction as F

from cadlagconvex import RInterval, TimeGrid
from cadlagconvex.setmaps import (SetMap, michael_check, projection_selection,
                                  right_isc_check)


def show_map(name, sm):
    print(f"  {name}: points {[str(p) for p in sm.point_vals]}, "
          f"cells {[str(c) for c in sm.open_vals]}")


def main():
    grid = TimeGrid((0, 1, 2))

    print("== a regular map and its attainable values ==")
    good = SetMap.constant(grid, RInterval(F(0), F(1)))
    show_map("G", good)
    print("  attainable at t0:", good.attainable_at(0))
    print("  right-isc:", right_isc_check(good))

    print("\n== a point value escaping its cell ==")
    bad = SetMap(grid,
                 (RInterval(F(0), F(1)), RInterval(F(0), F(2)), RInterval(F(0), F(1))),
                 (RInterval(F(0), F(1)), RInterval(F(0), F(1))))
    show_map("B", bad)
    rep = michael_check(bad)
    print("  attainable at t1:", bad.attainable_at(1), " point value:", bad.point_vals[1])
    print("  representation holds:", rep["representation_holds"],
          " failing slots:", rep["failing_slots"])
    print("  verdict equals right-isc:", rep["matches_right_isc"])

    print("\n== left-limit map ==")
    vec = bad.vec_map()
    show_map("vec B", vec)
    print("  ({0} at time 0, the preceding cell value afterwards)")

    print("\n== metric projection selection ==")
    staircase = SetMap(TimeGrid((0, 1, 2, 3)),
                       tuple(RInterval(F(i), F(i + 1)) for i in range(4)),
                       tuple(RInterval(F(i), F(i + 2)) for i in range(3)))
    path = projection_selection(staircase, F(0))
    print("  nearest points to 0 slot-wise:", [str(v) for v in path.values])
    print("  left limits project onto the left-limit map:",
          [str(v) for v in path.left_values()])


if __name__ == "__main__":
    main()
