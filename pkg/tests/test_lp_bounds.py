"""Exactness tests for the exponent linear program and its simplex solver."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from twotor.lp_bounds import (
    ExponentVector,
    LinearProgram,
    LPInfeasibleError,
    LPUnboundedError,
    avg_szpiro_from_exponents,
    build_dual,
    build_primal,
    certificate_dual,
    certificate_primal,
    certificate_value,
    check_feasible,
    objective_value,
    solve_simplex,
    sweep_grid,
)

GRID = [
    (F(k, 100), r)
    for k in range(11)
    for r in (F(0), F(1, 200), F(1, 102), F(1, 100))
]


class TestProgramConstruction:
    def test_objective_vector(self):
        lp = build_primal(0, 0)
        assert lp.objective == (6, 0, 12, 0, 0, 3, 3, 0, 0)

    def test_first_row(self):
        lp = build_primal(0, 0)
        assert lp.matrix[0] == (-2, -2, -2, -1, -1, 0, 0, -1, -1)

    def test_rhs_at_parameters(self):
        # rows 4 and 5 carry r/2 so both certificates are tight
        lp = build_primal(F(1, 10), F(1, 100))
        assert lp.rhs == (F(-1), F(2, 5), F(0), F(1, 200), F(1, 200))

    def test_shape(self):
        lp = build_primal(0, 0)
        assert lp.n_rows == 5 and lp.n_vars == 9
        assert all(isinstance(v, F) for row in lp.matrix for v in row)

    @pytest.mark.parametrize("delta,r", [(F(1, 2), 0), (F(-1, 10), 0), (0, -1)])
    def test_parameter_range(self, delta, r):
        with pytest.raises(ValueError):
            build_primal(delta, r)

    def test_bad_sense(self):
        with pytest.raises(ValueError):
            LinearProgram("max_ge", (F(1),), ((F(1),),), (F(0),))

    def test_ragged_matrix(self):
        with pytest.raises(ValueError):
            LinearProgram("min_ge", (F(1), F(2)), ((F(1),),), (F(0),))

    def test_rhs_length_mismatch(self):
        with pytest.raises(ValueError):
            LinearProgram("min_ge", (F(1),), ((F(1),),), (F(0), F(1)))


class TestCertificates:
    @pytest.mark.parametrize("delta,r", GRID)
    def test_primal_certificate_feasible_and_tight(self, delta, r):
        lp = build_primal(delta, r)
        x = certificate_primal(delta, r)
        assert check_feasible(lp, x)
        assert objective_value(lp, x) == certificate_value(delta, r)

    @pytest.mark.parametrize("delta,r", GRID)
    def test_dual_certificate_feasible_and_tight(self, delta, r):
        dual = build_dual(build_primal(delta, r))
        y = certificate_dual()
        assert check_feasible(dual, y)
        assert objective_value(dual, y) == certificate_value(delta, r)

    def test_value_at_origin(self):
        assert certificate_value(0, 0) == F(3, 2)

    def test_value_spec_point(self):
        v = certificate_value(F(1, 100), F(1, 102))
        assert v == F(3, 2) - F(3, 100) + F(3, 102) == F(2549, 1700)
        assert abs(float(v) - 1.49941) < 5e-6

    def test_perturbed_x4_violates_row_two(self):
        # pushing x4 down by (1/2 - delta)/2 empties half of alpha1 + alpha2
        x = list(certificate_primal(0, 0))
        x[3] -= F(1, 2) / 2
        lp = build_primal(0, 0)
        assert not check_feasible(lp, x)
        row2 = sum(c * v for c, v in zip(lp.matrix[1], x))
        assert row2 < lp.rhs[1]

    def test_certificate_components(self):
        x = certificate_primal(F(1, 10), F(1, 100))
        s, t = F(2, 5), F(3, 5)
        assert x == (0, 0, 0, s / 2, s / 2, (s + F(1, 100)) / 2,
                     (s + F(1, 100)) / 2, t / 2, t / 2)


class TestSimplex:
    @pytest.mark.parametrize("delta,r", GRID)
    def test_grid_optimum_exact(self, delta, r):
        opt, x = solve_simplex(build_primal(delta, r))
        assert opt == certificate_value(delta, r)
        assert check_feasible(build_primal(delta, r), x)

    @pytest.mark.parametrize("delta,r", GRID)
    def test_dual_optimum_exact(self, delta, r):
        dual = build_dual(build_primal(delta, r))
        opt, y = solve_simplex(dual)
        assert opt == certificate_value(delta, r)
        assert check_feasible(dual, y)

    def test_outside_grid_still_agrees(self):
        # the closed form keeps holding well past the grid edge
        opt, _ = solve_simplex(build_primal(F(1, 5), 0))
        assert opt == F(9, 10)
        opt, _ = solve_simplex(build_primal(F(49, 100), F(3)))
        assert opt == F(3, 2) - F(3 * 49, 100) + 9

    def test_infeasible_raises(self):
        lp = LinearProgram("min_ge", (F(1),), ((F(1),), (F(-1),)), (F(1), F(1)))
        with pytest.raises(LPInfeasibleError):
            solve_simplex(lp)

    def test_unbounded_raises(self):
        lp = LinearProgram("min_ge", (F(-1),), ((F(1),),), (F(0),))
        with pytest.raises(LPUnboundedError):
            solve_simplex(lp)

    def test_max_sense(self):
        # max x1 + x2 st x1 + x2 <= 2, x1 <= 1: optimum 2
        lp = LinearProgram(
            "max_le", (F(1), F(1)),
            ((F(1), F(1)), (F(1), F(0))), (F(2), F(1)),
        )
        opt, x = solve_simplex(lp)
        assert opt == 2 and sum(x) == 2


class TestDuality:
    def test_dual_of_dual_is_identity(self):
        lp = build_primal(F(1, 10), F(1, 100))
        assert build_dual(build_dual(lp)) == lp

    def test_dual_shape(self):
        dual = build_dual(build_primal(0, 0))
        assert dual.sense == "max_le"
        assert dual.n_vars == 5 and dual.n_rows == 9

    @pytest.mark.parametrize("delta,r", [(0, 0), (F(1, 20), F(1, 200))])
    def test_weak_duality_on_feasible_pairs(self, delta, r):
        lp = build_primal(delta, r)
        dual = build_dual(lp)
        # non-optimal feasible primal point: beta bumps cancel in row 3 and
        # only help rows 4 and 5, so feasibility survives
        x = list(certificate_primal(delta, r))
        x[5] += F(1, 7)
        x[6] += F(1, 7)
        assert check_feasible(lp, x)
        y = [F(1, 2) * v for v in certificate_dual()]
        assert check_feasible(dual, y)
        assert objective_value(lp, x) >= objective_value(dual, y)

    def test_dimension_mismatch(self):
        lp = build_primal(0, 0)
        with pytest.raises(ValueError):
            check_feasible(lp, (F(0),) * 8)
        with pytest.raises(ValueError):
            objective_value(lp, (F(0),) * 10)

    def test_negative_point_infeasible(self):
        lp = build_primal(0, 0)
        x = list(certificate_primal(0, 0))
        x[0] = F(-1, 100)
        assert not check_feasible(lp, x)


class TestSweep:
    def test_default_grid(self):
        rows = sweep_grid()
        assert len(rows) == 44
        assert all(r[4] for r in rows)
        assert all(r[2] == r[3] == F(3, 2) - 3 * r[0] + 3 * r[1] for r in rows)

    def test_custom_grid(self):
        rows = sweep_grid(deltas=[F(1, 8)], rs=[F(1, 16)])
        assert rows == [(F(1, 8), F(1, 16), F(21, 16), F(21, 16), True)]


class TestExponentVector:
    def test_certificate_origin_value(self):
        v = ExponentVector(*certificate_primal(0, 0))
        assert avg_szpiro_from_exponents(v) == F(9, 4)

    def test_rejects_negative_component(self):
        with pytest.raises(ValueError):
            ExponentVector(0, 0, 0, -0.1, 0, 0, 0, 0, 0)

    def test_rejects_zero_denominator(self):
        v = ExponentVector(0, 0, 0, 0, 0, 1, 1, 0, 0)
        with pytest.raises(ValueError):
            avg_szpiro_from_exponents(v)

    def test_round_trip(self):
        v = ExponentVector(*range(1, 10))
        assert v.as_tuple() == tuple(range(1, 10))
        assert list(v.as_dict().values()) == list(range(1, 10))

    @given(st.lists(st.floats(min_value=0, max_value=10), min_size=9, max_size=9))
    def test_floor_three_halves(self, xs):
        v = ExponentVector(*xs)
        gs = v.gamma_I0star + v.gamma_III + v.gamma_IIIstar
        if 2 * (2 * gs + v.alpha1 + v.upsilon + v.alpha2 + v.nu) > 0:
            assert avg_szpiro_from_exponents(v) >= 1.5


def _int_fracs(draw, k, lo=-3, hi=3):
    return tuple(F(draw(st.integers(lo, hi))) for _ in range(k))


class TestScipyOracle:
    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_random_min_ge_matches_linprog(self, data):
        n = data.draw(st.integers(1, 4))
        m = data.draw(st.integers(1, 4))
        c = _int_fracs(data.draw, n)
        A = tuple(_int_fracs(data.draw, n) for _ in range(m))
        b = _int_fracs(data.draw, m)
        lp = LinearProgram("min_ge", c, A, b)
        res = linprog(
            [float(v) for v in c],
            A_ub=[[-float(v) for v in row] for row in A],
            b_ub=[-float(v) for v in b],
            bounds=[(0, None)] * n,
            method="highs",
        )
        try:
            opt, x = solve_simplex(lp)
        except LPInfeasibleError:
            assert res.status == 2
            return
        except LPUnboundedError:
            assert res.status == 3
            return
        assert res.status == 0
        assert check_feasible(lp, x)
        assert abs(float(opt) - res.fun) < 1e-8
