import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from niopt import ContractViolation, Evaluator, make_problem
from niopt.benchmarks import (
    STANDARD_FUNCTIONS,
    IslandFunctionParams,
    island_peak_oracle,
    island_problem,
    island_repair,
    multi_island_feasible,
    multi_island_value,
    standard_problem,
    wrap_constrained,
)

# full (untruncated) double sums, evaluated with mpmath at 30 digits
F_00 = 1.81616208278952906068e-04
F_CORNER = 200.018069580153887896
F_10 = 1.00027241606780393111
F_0307 = 0.171409525082824816592

P = IslandFunctionParams()


def full_sum(x, y, N=100, a=10.0):
    g = np.arange(-N, N + 1, dtype=float)
    w = np.abs(g)[:, None] + np.abs(g)[None, :]
    return float(np.sum(w * np.exp(-a * (x - g) ** 2)[:, None] * np.exp(-a * (y - g) ** 2)[None, :]))


class TestIslandValue:
    @pytest.mark.parametrize(
        "x, y, expected",
        [(0, 0, F_00), (100, 100, F_CORNER), (1, 0, F_10), (0.3, 0.7, F_0307)],
    )
    def test_reference_values(self, x, y, expected):
        assert multi_island_value(x, y) == pytest.approx(expected, rel=1e-13)

    def test_corner_closed_form(self):
        assert multi_island_value(100, 100) == pytest.approx(200 + 2 * 199 * np.exp(-10) + 198 * np.exp(-20), rel=1e-9)
        assert multi_island_value(0, 0) == pytest.approx(4 * np.exp(-10), rel=1e-3)

    def test_vectorised_matches_scalar(self, stream):
        xy = stream.uniform(-101, 101, size=(50, 2))
        vec = multi_island_value(xy[:, 0], xy[:, 1])
        assert vec.shape == (50,)
        assert all(vec[k] == multi_island_value(*xy[k]) for k in range(50))

    @given(st.floats(-101, 101), st.floats(-101, 101))
    def test_symmetries(self, x, y):
        f = multi_island_value(x, y)
        for gx, gy in ((-x, -y), (y, x), (-x, y)):
            assert multi_island_value(gx, gy) == pytest.approx(f, rel=1e-12, abs=1e-300)

    def test_matches_untruncated_sum(self, stream):
        params = IslandFunctionParams(N=8, a=10.0)
        for x, y in stream.uniform(-9, 9, size=(40, 2)):
            assert multi_island_value(x, y, params) == pytest.approx(full_sum(x, y, 8), rel=1e-12, abs=1e-300)

    def test_far_outside_grid_is_zero(self):
        assert multi_island_value(150.0, 0.0) == 0.0


class TestFeasibility:
    def test_examples(self):
        assert multi_island_feasible(0.05, 0.04)
        assert not multi_island_feasible(0.5, 0.5)
        assert multi_island_feasible(100, 100)
        assert not multi_island_feasible(100.2, 100.0)

    def test_boundary_is_feasible(self):
        assert multi_island_feasible(3.0 + 0.05, -2.0 - 0.05)

    def test_island_count_and_disjointness(self):
        assert P.island_count == 201 ** 2 == 40401
        assert 2 * P.b < 1.0
        g = np.arange(-P.N, P.N + 1, dtype=float)
        X, Y = np.meshgrid(g, g)
        assert multi_island_feasible(X.ravel(), Y.ravel()).sum() == 40401

    def test_params_validation(self):
        with pytest.raises(ContractViolation):
            IslandFunctionParams(N=0)
        with pytest.raises(ContractViolation):
            IslandFunctionParams(a=-1.0)
        assert IslandFunctionParams(a=4.0).b == 0.25


class TestPeaks:
    def test_oracle_values(self):
        assert island_peak_oracle(0, 0) == pytest.approx(F_00, rel=1e-13)
        corners = [island_peak_oracle(i, j) for i in (-100, 100) for j in (-100, 100)]
        assert corners == pytest.approx([F_CORNER] * 4, rel=1e-13)
        assert island_peak_oracle(1, 0) == pytest.approx(F_10, rel=1e-13)

    def test_out_of_grid(self):
        with pytest.raises(ContractViolation):
            island_peak_oracle(101, 0)

    @given(st.integers(-100, 100), st.integers(-100, 100))
    def test_monotone_towards_corner(self, i, j):
        si = 1 if i >= 0 else -1
        sj = 1 if j >= 0 else -1
        here = island_peak_oracle(i, j)
        if abs(i) < 100:
            assert island_peak_oracle(i + si, j) > here
        if abs(j) < 100:
            assert island_peak_oracle(i, j + sj) > here


class TestConstraintPolicies:
    def test_repair_projects_onto_diamond(self):
        assert np.allclose(island_repair([[0.5, 0.0]]), [[0.1, 0.0]], rtol=0, atol=1e-15)
        r = island_repair([[0.3, 0.25], [3.2, -4.4]])
        assert multi_island_feasible(r[:, 0], r[:, 1]).all()

    def test_feasible_points_pass_through(self):
        pts = np.array([[0.05, 0.04], [7.0, -3.02]])
        assert np.array_equal(island_repair(pts), pts)
        for policy in ("reject", "repair"):
            prob = wrap_constrained(island_problem(), policy)
            X, ok = Evaluator(prob).admit(pts)
            assert ok.all() and np.array_equal(X, pts)

    def test_reject_marks_infeasible(self):
        prob = wrap_constrained(island_problem(), "reject")
        X, ok = Evaluator(prob).admit(np.array([[0.5, 0.5], [0.0, 0.0]]))
        assert ok.tolist() == [False, True]

    @given(st.floats(-100.4, 100.4), st.floats(-100.4, 100.4))
    def test_repair_lands_on_nearest_island(self, x, y):
        r = island_repair([[x, y]])[0]
        assert multi_island_feasible(r[0], r[1])
        assert abs(r[0] - np.clip(np.rint(x), -100, 100)) + abs(r[1] - np.clip(np.rint(y), -100, 100)) <= 0.1 + 1e-12

    def test_policy_checks(self):
        with pytest.raises(ContractViolation):
            wrap_constrained(island_problem(), "penalty")
        with pytest.raises(ContractViolation):
            wrap_constrained(standard_problem("sphere", 2), "reject")

    def test_problem_objective_is_negated(self):
        prob = island_problem()
        assert prob.objective(np.array([100.0, 100.0])) == pytest.approx(-F_CORNER, rel=1e-13)
        x_star, f_min = prob.known_optimum
        assert x_star.tolist() == [100.0, 100.0] and f_min == pytest.approx(-F_CORNER, rel=1e-13)


class TestStandardSuite:
    @pytest.mark.parametrize("name", sorted(STANDARD_FUNCTIONS))
    @pytest.mark.parametrize("dim", [2, 5, 10])
    def test_known_optimum(self, name, dim):
        p = standard_problem(name, dim)
        x_star, f_min = p.known_optimum
        assert abs(p.objective(x_star) - f_min) <= 1e-12
        assert np.all(x_star >= p.lower) and np.all(x_star <= p.upper)

    def test_values(self):
        assert make_problem("sphere", 2).objective(np.array([1.0, 2.0])) == 5.0
        assert make_problem("rastrigin", 1).objective(np.array([1.0])) == pytest.approx(1.0)
        assert make_problem("rosenbrock", 2).objective(np.array([0.0, 0.0])) == 1.0

    def test_batch_evaluation(self, stream):
        for name in STANDARD_FUNCTIONS:
            p = standard_problem(name, 4)
            X = stream.uniform(p.lower, p.upper, size=(6, 4))
            assert np.allclose(p.objective(X), [p.objective(x) for x in X], rtol=1e-14)

    def test_unknown_and_invalid(self):
        with pytest.raises(ContractViolation):
            make_problem("griewank", 2)
        with pytest.raises(ContractViolation):
            make_problem("island", 3)
        with pytest.raises(ContractViolation):
            make_problem("sphere", 2, policy="reject")
