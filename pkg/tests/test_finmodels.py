"""Market presets: regularizations, closed-form supports, cone memberships."""

import random
from fractions import Fraction as F

import pytest

from cadlagconvex.duality import (DualPair, bruteforce_gap_bound,
                                  conj_bruteforce, support_DS)
from cadlagconvex.finmodels import (ScalarProcess, VectorMeasure,
                                    bidask_model, bidask_support,
                                    currency_model, left_lsc_reg, left_usc_reg,
                                    obstacle_model, obstacle_support,
                                    right_usc_slots, vector_pairing)
from cadlagconvex.polycone import ConeMap, PolyCone
from cadlagconvex.rationals import INF
from cadlagconvex.scenario import RandomMeasure, RandomPath, ScenarioTree
from cadlagconvex.timegrid import GridMeasure, StepPath, TimeGrid

G3 = TimeGrid((0, 1, 2))


def det_tree():
    return ScenarioTree.deterministic(3)


def two_tree():
    half = F(1, 2)
    return ScenarioTree(("a", "b"), (half, half),
                        ((("a", "b"),), (("a",), ("b",)), (("a",), ("b",))))


class TestRegularizations:
    def test_shift_of_cell_values(self):
        tree = det_tree()
        b = ScalarProcess(tree, G3, {"w": (1, 3, 2)}, {"w": (1, 3)}, "optional")
        reg = left_usc_reg(b)
        assert reg.points["w"] == (F(0), F(1), F(3))
        assert reg.flag == "predictable"
        assert check_predictable_scalar(reg)

    def test_constant_process(self):
        tree = det_tree()
        b = ScalarProcess.constant_cells(tree, G3, {"w": (7, 7)}, "optional")
        reg = left_usc_reg(b)
        assert reg.points["w"][1:] == (F(7), F(7))

    def test_point_spike_invisible(self):
        tree = det_tree()
        b = ScalarProcess(tree, G3, {"w": (0, 9, 0)}, {"w": (0, 0)}, "optional")
        reg = left_usc_reg(b)
        assert reg.points["w"][2] == 0  # the spike at t_1 never shows up

    def test_lsc_equals_usc_on_cell_constant_processes(self):
        tree = det_tree()
        a = ScalarProcess(tree, G3, {"w": (0, 2, 5)}, {"w": (1, 4)}, "optional")
        assert left_lsc_reg(a).points == left_usc_reg(a).points

    def test_predictable_flag_on_random_trees(self):
        rng = random.Random(3)
        tree = two_tree()
        for _ in range(20):
            shared = F(rng.randint(-3, 3))
            pts = {s: (shared, F(rng.randint(-3, 3)), F(rng.randint(-3, 3)))
                   for s in ("a", "b")}
            cells = {s: (shared, pts[s][1]) for s in ("a", "b")}
            b = ScalarProcess(tree, G3, pts, cells, "optional")
            reg = left_usc_reg(b)
            assert reg.flag == "predictable" and check_predictable_scalar(reg)


def check_predictable_scalar(sp: ScalarProcess) -> bool:
    tree = sp.tree
    for i in range(tree.n_slots):
        slot = tree.pred_slot(i)
        data = {s: sp.points[s][i] for s in tree.scenarios}
        for cell in tree.cells(slot):
            first = data[cell[0]]
            if any(data[s] != first for s in cell):
                return False
    return True


class TestObstacle:
    def make(self, cells, tree=None):
        tree = tree or det_tree()
        b = ScalarProcess.constant_cells(tree, G3, {s: cells for s in tree.scenarios},
                                         "optional")
        top = max(cells) + 1
        ycheck = RandomPath(tree, G3, {s: StepPath(G3, (top,) * 3)
                                       for s in tree.scenarios})
        return obstacle_model(b, ycheck)

    def d(self, model, u_atoms, ut_atoms):
        tree, grid = model.instance.tree, model.instance.grid
        return DualPair(
            RandomMeasure(tree, grid, {s: GridMeasure(grid, u_atoms)
                                       for s in tree.scenarios}),
            RandomMeasure(tree, grid, {s: GridMeasure(grid, ut_atoms)
                                       for s in tree.scenarios}))

    def test_zero_bound_negative_atom(self):
        m = self.make((0, 0))
        assert obstacle_support(m, self.d(m, (-1, 0, 0), (0, 0, 0))) == 0

    def test_positive_atom_infeasible(self):
        m = self.make((0, 0))
        d = self.d(m, (1, 0, 0), (0, 0, 0))
        assert obstacle_support(m, d) == INF
        assert support_DS(m.instance, d) == INF

    def test_left_regularized_bound_prices_predictable_atoms(self):
        m = self.make((1, 3))
        d = self.d(m, (0, 0, 0), (0, -2, 0))
        assert obstacle_support(m, d) == -2  # -2 times the left bound 1 at t_1
        assert support_DS(m.instance, d) == -2
        brute = conj_bruteforce(m.instance, d, B=8, delta=F(1, 4))
        assert 0 <= -2 - brute <= bruteforce_gap_bound(d, F(1, 4))

    def test_right_usc_violation_reported(self):
        tree = det_tree()
        b = ScalarProcess(tree, G3, {"w": (0, 0, 0)}, {"w": (0, 1)}, "optional")
        yc = RandomPath(tree, G3, {"w": StepPath(G3, (2, 2, 2))})
        assert right_usc_slots(b) == {"w": [1]}
        with pytest.raises(ValueError):
            obstacle_model(b, yc)

    def test_domination_required(self):
        tree = det_tree()
        b = ScalarProcess.constant_cells(tree, G3, {"w": (0, 5)}, "optional")
        yc = RandomPath(tree, G3, {"w": StepPath(G3, (1, 1, 1))})
        with pytest.raises(ValueError):
            obstacle_model(b, yc)


class TestBidAsk:
    def make(self, b_cells, a_cells, mid):
        tree = det_tree()
        b = ScalarProcess.constant_cells(tree, G3, {"w": b_cells}, "optional")
        a = ScalarProcess.constant_cells(tree, G3, {"w": a_cells}, "optional")
        ybar = RandomPath(tree, G3, {"w": StepPath(G3, (mid,) * 3)})
        return bidask_model(b, a, ybar)

    def d(self, model, u_atoms, ut_atoms=(0, 0, 0)):
        tree, grid = model.instance.tree, model.instance.grid
        return DualPair(
            RandomMeasure(tree, grid, {"w": GridMeasure(grid, u_atoms)}),
            RandomMeasure(tree, grid, {"w": GridMeasure(grid, ut_atoms)}))

    def test_symmetric_band(self):
        m = self.make((-1, -1), (1, 1), 0)
        assert bidask_support(m, self.d(m, (1, 0, 0))) == 1
        assert bidask_support(m, self.d(m, (-1, 0, 0))) == 1

    def test_predictable_atom_prices_left_regularized_ask(self):
        m = self.make((0, 1), (2, 3), F(3, 2))
        d = self.d(m, (0, 0, 0), (0, 1, 0))
        assert bidask_support(m, d) == 2  # lsc regularization of the ask at t_1
        assert support_DS(m.instance, d) == 2
        brute = conj_bruteforce(m.instance, d, B=6, delta=F(1, 4))
        assert 0 <= 2 - brute <= bruteforce_gap_bound(d, F(1, 4))

    def test_jordan_mixture_matches_support_DS(self):
        rng = random.Random(19)
        m = self.make((0, 1), (2, 3), F(3, 2))
        tree, grid = m.instance.tree, m.instance.grid
        for _ in range(25):
            u = tuple(F(rng.randint(-3, 3), 2) for _ in range(3))
            ut = (F(rng.randint(-2, 2)),) + tuple(F(rng.randint(-3, 3), 2) for _ in range(2))
            d = DualPair(RandomMeasure(tree, grid, {"w": GridMeasure(grid, u)}),
                         RandomMeasure(tree, grid, {"w": GridMeasure(grid, ut)}))
            assert bidask_support(m, d) == support_DS(m.instance, d)

    def test_sublinearity(self):
        rng = random.Random(23)
        m = self.make((-1, 0), (1, 2), F(1, 2))
        tree, grid = m.instance.tree, m.instance.grid

        def rand_d():
            u = tuple(F(rng.randint(-2, 2)) for _ in range(3))
            ut = tuple(F(rng.randint(-2, 2)) for _ in range(3))
            return DualPair(RandomMeasure(tree, grid, {"w": GridMeasure(grid, u)}),
                            RandomMeasure(tree, grid, {"w": GridMeasure(grid, ut)}))

        def add(d1, d2):
            u = tuple(a + b for a, b in zip(d1.u.measures["w"].atoms,
                                            d2.u.measures["w"].atoms))
            ut = tuple(a + b for a, b in zip(d1.ut.measures["w"].atoms,
                                             d2.ut.measures["w"].atoms))
            return DualPair(RandomMeasure(tree, grid, {"w": GridMeasure(grid, u)}),
                            RandomMeasure(tree, grid, {"w": GridMeasure(grid, ut)}))

        for _ in range(25):
            d1, d2 = rand_d(), rand_d()
            s1, s2 = bidask_support(m, d1), bidask_support(m, d2)
            assert bidask_support(m, add(d1, d2)) <= s1 + s2
            lam = F(rng.randint(1, 4))
            scaled = DualPair(
                RandomMeasure(tree, grid, {"w": GridMeasure(
                    grid, tuple(lam * a for a in d1.u.measures["w"].atoms))}),
                RandomMeasure(tree, grid, {"w": GridMeasure(
                    grid, tuple(lam * a for a in d1.ut.measures["w"].atoms))}))
            assert bidask_support(m, scaled) == lam * s1

    def test_separation_failure_reports_slot(self):
        tree = det_tree()
        b = ScalarProcess.constant_cells(tree, G3, {"w": (0, 0)}, "optional")
        a = ScalarProcess.constant_cells(tree, G3, {"w": (2, 2)}, "optional")
        ybar = RandomPath(tree, G3, {"w": StepPath(G3, (0, 1, 1))})  # touches the bid
        with pytest.raises(ValueError) as err:
            bidask_model(b, a, ybar)
        assert "slot 0" in str(err.value)


class TestCurrency:
    def grid(self):
        return TimeGrid((0, 1, 2))

    def model(self):
        # constraint map S = orthant, so solvency G = its polar
        return currency_model(ConeMap.constant(self.grid(), PolyCone.orthant(2).polar()))

    def test_member_diagonal_direction(self):
        cm = self.model()
        u = VectorMeasure(self.grid(), ((-1, -1), (0, 0), (0, 0)))
        ut = VectorMeasure(self.grid(), ((0, 0),) * 3)
        assert cm.is_member(u, ut)["member"]

    def test_non_member_axis_direction(self):
        cm = self.model()
        u = VectorMeasure(self.grid(), ((1, 0), (0, 0), (0, 0)))
        ut = VectorMeasure(self.grid(), ((0, 0),) * 3)
        assert not cm.is_member(u, ut)["member"]

    def test_zero_pair_is_member(self):
        cm = self.model()
        z = VectorMeasure(self.grid(), ((0, 0),) * 3)
        assert cm.is_member(z, z)["member"]

    def test_members_certify_nonpositive_pairings(self):
        cm = self.model()
        rng = random.Random(29)
        u = VectorMeasure(self.grid(), ((-1, -2), (0, 0), (-1, 0)))
        ut = VectorMeasure(self.grid(), ((0, 0), (0, -1), (-2, -1)))
        assert cm.is_member(u, ut)["member"]
        for _ in range(100):
            y = cm.sample_selection(rng)
            assert vector_pairing(y, u, ut) <= 0

    def test_membership_closed_under_addition(self):
        cm = self.model()
        u1 = VectorMeasure(self.grid(), ((-1, -2), (0, 0), (-1, 0)))
        u2 = VectorMeasure(self.grid(), ((0, -1), (-3, -1), (0, 0)))
        ut = VectorMeasure(self.grid(), ((0, 0),) * 3)
        total = VectorMeasure(self.grid(), tuple(
            tuple(a + b for a, b in zip(x, y)) for x, y in zip(u1.atoms, u2.atoms)))
        assert cm.is_member(u1, ut)["member"] and cm.is_member(u2, ut)["member"]
        assert cm.is_member(total, ut)["member"]

    def test_precondition_failure_raises(self):
        # a solvency cone containing a line has a non-solid polar
        halfplane = PolyCone.from_generators([(1, 0), (-1, 0), (0, 1)], 2)
        with pytest.raises(ValueError):
            currency_model(ConeMap.constant(self.grid(), halfplane))
