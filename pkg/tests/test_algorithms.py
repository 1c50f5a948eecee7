import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from niopt import ContractViolation, Evaluator, Population, Problem, RandomStream, make_problem, run
from niopt.algorithms import REGISTRY, get_descriptor
from niopt.algorithms.params import BAParams, CSParams, DEParams, FAParams, FPAParams, GAParams, PSOParams, SAParams
from niopt.algorithms.steps import (
    PointState,
    ba_step,
    ba_velocity,
    cs_increment,
    cs_step,
    de_step,
    de_trial,
    distinct_partners,
    fa_increment,
    fa_step,
    fpa_increment,
    fpa_step,
    ga_step,
    gradient_step,
    heaviside,
    metropolis_accept,
    pso_step,
    pso_velocity,
    sa_step,
    single_point_crossover,
)


def quad(dim, lo=-10.0, hi=10.0):
    return Problem(
        name="quad",
        dimension=dim,
        objective=lambda x: float(np.sum(np.asarray(x) ** 2)),
        lower=np.full(dim, lo),
        upper=np.full(dim, hi),
    )


def make_pop(problem, X, velocity=False, personal=False):
    X = np.array(X, dtype=float)
    f = np.array([problem.objective(x) for x in X])
    V = np.zeros_like(X) if velocity else None
    return Population(X.copy(), f, V, X.copy() if personal else None, f.copy() if personal else None)


# ------------------------------------------------------------- formulas


class TestFormulas:
    def test_heaviside_zero_is_zero(self):
        assert heaviside([-1.0, 0.0, 2.0]).tolist() == [0.0, 0.0, 1.0]

    def test_de_trial(self):
        assert de_trial([1, 2], [3, 4], [1, 1], 0.5).tolist() == [2.0, 3.5]
        assert de_trial([1, 2], [5, 5], [5, 5], 1.3).tolist() == [1.0, 2.0]

    def test_pso_velocity(self):
        x = np.array([0.0, 0.0])
        v = pso_velocity(x, np.zeros(2), np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.5, 0.5, 1.0, 1.0)
        assert v.tolist() == [0.5, 0.5]
        assert (x + v).tolist() == [0.5, 0.5]

    def test_pso_attraction_vanishes_at_bests(self):
        x = np.array([2.0, -1.0])
        assert np.all(pso_velocity(x, np.zeros(2), x, x, 0.3, 0.9, 2.0, 2.0) == 0)

    def test_pso_pure_inertia(self):
        v = np.array([0.3, -0.2])
        assert pso_velocity(np.zeros(2), v, np.ones(2), -np.ones(2), 0.7, 0.7, 0.0, 0.0).tolist() == v.tolist()

    def test_fa_increment(self):
        assert fa_increment([0.0], [1.0], 1.0, 1e-12, 0.0, [0.0])[0] == pytest.approx(1.0, abs=1e-11)
        assert fa_increment([0.0], [1.0], 1.0, 1.0, 0.0, [0.0])[0] == pytest.approx(math.exp(-1))
        assert fa_increment([0.0], [1.0], 1.0, 1.0, 0.0, [0.0])[0] == pytest.approx(0.36788, abs=1e-5)

    def test_ba_velocity(self):
        dv = ba_velocity(np.array([2.0]), np.zeros(1), np.array([0.0]), 0.5, 0.0, 1.0)
        assert dv.tolist() == [1.0]
        assert (np.array([2.0]) + dv).tolist() == [3.0]
        assert ba_velocity(np.array([1.5]), np.zeros(1), np.array([1.5]), 0.9, -1, 0).tolist() == [0.0]

    @given(st.floats(0, 1), st.floats(-3, 3))
    def test_ba_degenerate_range(self, beta, c):
        dv = ba_velocity(np.array([2.0]), np.zeros(1), np.array([0.0]), beta, c, c)
        assert dv[0] == pytest.approx(2.0 * c)

    def test_cs_increment(self):
        assert cs_increment(np.array([3.0]), np.array([1.0]), 1.0, 0.8, 0.25, 0.1)[0] == pytest.approx(1.6)
        assert cs_increment(np.array([3.0]), np.array([1.0]), 1.0, 0.8, 0.25, 0.5)[0] == 0.0
        assert cs_increment(np.array([3.0]), np.array([1.0]), 1.0, 0.8, 0.0, 1e-9)[0] == 0.0

    def test_fpa_increment(self):
        xi = np.array([0.0])
        assert fpa_increment(xi, np.array([2.0]), xi, xi, 0.1, 0.8, 0.5, 1.2, 0.3)[0] == pytest.approx(1.2)
        assert fpa_increment(xi, xi, xi, xi, 0.1, 0.8, 0.5, 1.2, 0.3)[0] == 0.0
        xj = np.array([4.0])
        assert fpa_increment(xi, np.array([9.0]), xj, xj, 0.9, 0.8, 0.5, 1.2, 0.3)[0] == 0.0

    def test_crossover(self):
        assert single_point_crossover([1, 2, 3, 4], [5, 6, 7, 8], 2).tolist() == [1, 2, 7, 8]

    def test_metropolis(self):
        assert metropolis_accept(1.0, 0.5, 1e-300, 0.999)
        assert metropolis_accept(1.0, 1.0, 1.0, 0.999)
        assert not metropolis_accept(1.0, 1.0 + 1e-10, 1e-300, 0.0)
        assert metropolis_accept(0.0, 1.0, 1.0, math.exp(-1) - 1e-12)
        assert not metropolis_accept(0.0, 1.0, 1.0, math.exp(-1) + 1e-12)


class TestPartners:
    def test_distinct_and_not_self(self, stream):
        for n in (3, 4, 7, 25):
            j, k = distinct_partners(stream, n, 2)
            i = np.arange(n)
            assert np.all(j != i) and np.all(k != i) and np.all(j != k)
            assert j.min() >= 0 and j.max() < n

    def test_uniform_over_ordered_pairs(self):
        s = RandomStream(7)
        n, trials = 5, 4000
        counts = np.zeros((n, n))
        for _ in range(trials):
            j, k = distinct_partners(s, n, 2)
            counts[j[0], k[0]] += 1
        cells = counts[1:, 1:][~np.eye(n - 1, dtype=bool)]
        assert cells.size == 12
        expected = trials / 12
        chi2 = float(((cells - expected) ** 2 / expected).sum())
        assert chi2 < 31.3  # 99.9% quantile, 11 dof

    def test_too_small(self, stream):
        with pytest.raises(ContractViolation):
            distinct_partners(stream, 2, 2)


# ------------------------------------------------------------- gradient


class TestGradient:
    def test_one_dimensional(self):
        ev = Evaluator(quad(1))
        assert gradient_step(ev, [1.0], 0.1)[0] == pytest.approx(0.8, abs=1e-9)
        assert ev.count == 2

    def test_two_dimensional(self):
        ev = Evaluator(quad(2))
        assert np.allclose(gradient_step(ev, [1.0, 1.0], 0.5), [0.0, 0.0], atol=1e-9)
        assert ev.count == 4

    def test_tiny_eta_is_identity(self):
        x = np.array([0.3, -1.2, 2.0])
        assert np.allclose(gradient_step(Evaluator(make_problem("rastrigin", 3)), x, 1e-15), x, atol=1e-12)

    def test_errors(self):
        with pytest.raises(ContractViolation):
            gradient_step(Evaluator(quad(1)), [1.0], 0.0)
        bad = Problem("bad", 1, lambda x: math.inf if x[0] > 1 else 0.0, np.array([-5.0]), np.array([5.0]))
        with pytest.raises(ContractViolation):
            gradient_step(Evaluator(bad), [1.0], 0.1)


# ------------------------------------------------------------- steps with pinned draws


class TestPinnedSteps:
    def test_pso_example(self, pinned):
        prob = quad(2)
        pop = make_pop(prob, [[0, 0], [1, 0], [0, 1]], velocity=True, personal=True)
        pop.best_positions[0] = [0.0, 1.0]
        pop.best_fitness[0] = 1.0
        pop.best_fitness[1] = -1.0  # make member 1 the global best at [1, 0]
        params = PSOParams(alpha=1.0, beta=1.0, inertia=1.0)
        out = pso_step(pop, params, pinned(uniform=0.5), Evaluator(prob))
        assert out.velocities[0].tolist() == [0.5, 0.5]
        assert out.positions[0].tolist() == [0.5, 0.5]

    def test_ba_example(self, pinned):
        prob = quad(1, -10, 10)
        # candidate at 3 is worse than 2, so the stored position stays but the draw arithmetic holds
        pop = make_pop(prob, [[0.0], [2.0]], velocity=True)
        ev = Evaluator(prob)
        out = ba_step(pop, BAParams(f_min=0.0, f_max=1.0), pinned(uniform=0.5), ev)
        assert ev.count == 2
        assert out.positions[1].tolist() == [2.0]
        assert out.velocities[1].tolist() == [0.0]

    def test_ba_accepts_improvement(self, pinned):
        prob = quad(1)
        pop = make_pop(prob, [[0.0], [2.0]], velocity=True)
        out = ba_step(pop, BAParams(f_min=-1.0, f_max=0.0), pinned(uniform=0.5), Evaluator(prob))
        assert out.positions[1].tolist() == [1.0]
        assert out.velocities[1].tolist() == [-1.0]

    def test_cs_gate_closed(self, pinned):
        prob = quad(2)
        pop = make_pop(prob, np.arange(10.0).reshape(5, 2) - 4)
        ev = Evaluator(prob)
        out = cs_step(pop, CSParams(p_a=0.25), pinned(uniform=0.5, normal=1.0), ev)
        assert ev.count == 0
        assert np.array_equal(out.positions, pop.positions)

    def test_ga_identity_pipeline(self, stream):
        prob = quad(3)
        X = stream.uniform(-5, 5, size=(6, 3))
        pop = make_pop(prob, X)
        out = ga_step(pop, GAParams(crossover_rate=0.0, mutation_rate=0.0, elite_count=0), stream, Evaluator(prob))
        rows = {tuple(r) for r in X}
        assert all(tuple(r) in rows for r in out.positions)

    def test_sa_cooling(self, pinned):
        prob = quad(2)
        state = PointState(np.array([1.0, 1.0]), 2.0, 1.0)
        ev = Evaluator(prob)
        for _ in range(2):
            state = sa_step(state, SAParams(cooling_factor=0.9), pinned(uniform=0.5, normal=0.0), ev)
        assert state.temperature == pytest.approx(0.81)

    def test_sa_frozen_rejects_uphill(self, pinned):
        state = PointState(np.array([0.0, 0.0]), 0.0, 1e-300)
        out = sa_step(state, SAParams(), pinned(uniform=0.0, normal=1.0), Evaluator(quad(2)))
        assert out.position.tolist() == [0.0, 0.0] and out.fitness == 0.0

    def test_sa_needs_positive_temperature(self, stream):
        with pytest.raises(ContractViolation):
            sa_step(PointState(np.zeros(2), 0.0, 0.0), SAParams(), stream, Evaluator(quad(2)))


# ------------------------------------------------------------- invariants

STEP_CASES = [
    ("de", de_step, DEParams(), 5, False, False),
    ("pso", pso_step, PSOParams(), 5, True, True),
    ("fa", fa_step, FAParams(), 5, False, False),
    ("ba", ba_step, BAParams(), 5, True, False),
    ("cs", cs_step, CSParams(), 5, False, False),
    ("fpa", fpa_step, FPAParams(), 5, False, False),
    ("ga", ga_step, GAParams(), 5, False, False),
]


class TestStepInvariants:
    def test_collapsed_population_is_fixed_point(self, stream):
        prob = quad(3)
        point = np.array([[1.0, -2.0, 0.5]] * 6)
        cases = [
            (de_step, DEParams(), False, False),
            (pso_step, PSOParams(), True, True),
            (cs_step, CSParams(p_a=1.0), False, False),
            (fpa_step, FPAParams(p=0.0), False, False),
            (fa_step, FAParams(alpha=0.0), False, False),
        ]
        for step, params, vel, pb in cases:
            pop = make_pop(prob, point, velocity=vel, personal=pb)
            out = step(pop, params, stream, Evaluator(prob))
            assert np.array_equal(out.positions, point), step.__name__

    def test_fa_equal_fitness_no_move(self, stream):
        prob = Problem("flat", 2, lambda x: 1.0, np.full(2, -5.0), np.full(2, 5.0))
        X = stream.uniform(-5, 5, size=(4, 2))
        ev = Evaluator(prob)
        out = fa_step(make_pop(prob, X), FAParams(alpha=0.0), stream, ev)
        assert np.array_equal(out.positions, X) and ev.count == 0

    @pytest.mark.parametrize("name, step, params, n, vel, pb", STEP_CASES)
    def test_size_bounds_and_monotone_best(self, name, step, params, n, vel, pb):
        prob = make_problem("rastrigin", 3)
        s = RandomStream(99)
        pop = make_pop(prob, s.uniform(prob.lower, prob.upper, size=(n, 3)), velocity=vel, personal=pb)
        ev = Evaluator(prob, 400)
        best = pop.fitness.min()
        for _ in range(20):
            pop = step(pop, params, s, ev)
            assert pop.size == n
            assert np.all(pop.positions >= prob.lower) and np.all(pop.positions <= prob.upper)
            assert np.allclose(pop.fitness, [prob.objective(x) for x in pop.positions])
            if name != "pso":
                assert pop.fitness.min() <= best
            best = min(best, pop.fitness.min())
            assert ev.count <= 400

    def test_minimum_sizes(self, stream):
        prob = quad(2)
        with pytest.raises(ContractViolation):
            de_step(make_pop(prob, np.zeros((3, 2))), DEParams(), stream, Evaluator(prob))
        with pytest.raises(ContractViolation):
            cs_step(make_pop(prob, np.zeros((2, 2))), CSParams(), stream, Evaluator(prob))
        with pytest.raises(ContractViolation):
            fpa_step(make_pop(prob, np.zeros((2, 2))), FPAParams(), stream, Evaluator(prob))
        with pytest.raises(ContractViolation):
            pso_step(make_pop(prob, np.zeros((3, 2))), PSOParams(), stream, Evaluator(prob))
        with pytest.raises(ContractViolation):
            ba_step(make_pop(prob, np.zeros((3, 2))), BAParams(), stream, Evaluator(prob))
        with pytest.raises(ContractViolation):
            ga_step(make_pop(prob, np.zeros((3, 2))), GAParams(elite_count=3), stream, Evaluator(prob))


# ------------------------------------------------------------- parameters and registry


class TestParameters:
    def test_de_F_domain(self):
        for bad in (0.0, 2.0, -0.1, math.nan):
            with pytest.raises(ContractViolation):
                DEParams(F=bad)
        assert DEParams(F=1.99).F == 1.99

    def test_other_domains(self):
        with pytest.raises(ContractViolation):
            BAParams(f_min=1.0, f_max=0.0)
        with pytest.raises(ContractViolation):
            CSParams(p_a=1.5)
        with pytest.raises(ContractViolation):
            SAParams(cooling_factor=1.0)
        with pytest.raises(ContractViolation):
            FAParams(gamma=0.0)
        with pytest.raises(ContractViolation):
            GAParams(elite_count=1.5)

    def test_make_params(self):
        desc = get_descriptor("de")
        assert desc.make_params({"F": 0.3}).F == 0.3
        with pytest.raises(ContractViolation):
            desc.make_params({"G": 0.3})

    def test_spec_defaults_kept(self):
        assert DEParams().F == 0.7
        assert (PSOParams().alpha, PSOParams().beta) == (2.0, 2.0)
        assert FAParams().beta0 == 1.0 and FAParams().gamma == 1.0
        assert (CSParams().p_a, CSParams().alpha, CSParams().lam) == (0.25, 1.0, 1.5)
        assert (FPAParams().p, FPAParams().gamma, FPAParams().lam) == (0.8, 0.1, 1.5)


class TestRegistry:
    TABLE = {
        "gd": ({"GGM"}, set()),
        "de": ({"RP", "DBP"}, set()),
        "pso": ({"DBP"}, {"DBP"}),
        "fa": ({"DBP", "IRW"}, set()),
        "ba": ({"RP", "DBP"}, {"RP", "DBP"}),
        "cs": ({"RP", "DBP", "LTRW"}, set()),
        "fpa": ({"DBP", "LTRW"}, set()),
        "sa": ({"IRW"}, set()),
        "ga": ({"RP", "IRW"}, set()),
    }

    @pytest.mark.parametrize("name", sorted(TABLE))
    def test_tags(self, name):
        d = get_descriptor(name)
        pos, vel = self.TABLE[name]
        assert set(d.position_mechanisms) == pos
        assert set(d.velocity_mechanisms) == vel
        assert d.uses_velocity == (name in ("pso", "ba"))

    def test_names(self):
        assert set(REGISTRY) == set(self.TABLE)
        with pytest.raises(ContractViolation):
            get_descriptor("DE")

    def test_schema(self):
        schema = get_descriptor("cs").parameter_schema
        names = [s.name for s in schema]
        assert names[:3] == ["p_a", "alpha", "lam"]


# ------------------------------------------------------------- run loop


class TestRun:
    def test_budget_equals_population(self, sphere5):
        rec = run("de", problem=sphere5, budget=20, population_size=20, stream=RandomStream(1))
        assert rec.evaluations == 20
        assert rec.trace[-1][0] <= 20

    @pytest.mark.parametrize("name", sorted(REGISTRY))
    def test_budget_never_exceeded(self, name, sphere5):
        for budget in (25, 37, 311):
            rec = run(name, problem=sphere5, budget=budget, population_size=10, stream=RandomStream(budget))
            assert rec.evaluations <= budget
            fits = [f for _, f in rec.trace]
            assert fits == sorted(fits, reverse=True)
            assert rec.best_fitness == fits[-1]

    @pytest.mark.parametrize("name", sorted(REGISTRY))
    def test_determinism(self, name, sphere5):
        a = run(name, problem=sphere5, budget=500, population_size=10, stream=RandomStream(3))
        b = run(name, problem=sphere5, budget=500, population_size=10, stream=RandomStream(3))
        assert a.trace == b.trace and np.array_equal(a.best_position, b.best_position)
        assert a.params == b.params

    def test_errors(self, sphere5):
        with pytest.raises(ContractViolation):
            run("xyz", problem=sphere5, budget=100)
        with pytest.raises(ContractViolation):
            run("de", params={"F": 5.0}, problem=sphere5, budget=100)
        with pytest.raises(ContractViolation):
            run("de", problem=sphere5, budget=10, population_size=20)
        with pytest.raises(ContractViolation):
            run("de", params=PSOParams(), problem=sphere5, budget=100)

    def test_de_sphere(self, sphere5):
        rec = run("de", problem=sphere5, budget=100_000, population_size=20, stream=RandomStream(2024))
        assert rec.best_fitness < 1e-3

    def test_target_mode_stops_early(self, sphere5):
        full = run("pso", problem=sphere5, budget=20_000, stream=RandomStream(5))
        early = run("pso", problem=sphere5, budget=20_000, stream=RandomStream(5), target=1e-3)
        assert early.evaluations < full.evaluations
        assert early.trace == [t for t in full.trace if t[0] <= early.evaluations]

    def test_gd_converges_on_quadratic(self):
        rec = run("gd", params={"eta": 0.25}, problem=quad(3), budget=500, population_size=5, stream=RandomStream(0))
        assert rec.best_fitness < 1e-10
