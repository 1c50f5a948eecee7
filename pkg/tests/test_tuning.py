import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from niopt import ContractViolation, Problem, RandomStream, RunRecord, make_problem
from niopt.tuning import (
    Schedule,
    TuningTask,
    meta_objective,
    parameter_schedule,
    self_tune,
    write_trials_csv,
)

# a problem without a known optimum: quality normalises against f_ref = 0
DUMMY = Problem("dummy", 1, lambda x: 0.0, np.zeros(1), np.ones(1))


def synthetic_runner(quality, hit=None):
    """Runner whose best fitness is a fixed function of the parameters (no noise)."""
    calls = []

    def runner(algorithm, params, problem, budget, stream, population_size):
        calls.append(params)
        f = quality(params)
        trace = [] if hit is None else [(hit, f)]
        return RunRecord(algorithm, problem.name, 0, budget, budget, f, np.zeros(1), trace, params.as_dict(), 1.0)

    runner.calls = calls
    return runner


def de_task(runner, meta_budget=20, weight=1.0, bounds=(0.05, 1.95), **kw):
    return TuningTask("de", {"F": bounds}, [DUMMY], inner_budget=100, repetitions=1,
                      meta_budget=meta_budget, weight=weight, runner=runner, **kw)


def parabola(p):
    return (p.F - 0.6) ** 2


class TestMetaObjective:
    def test_grid_oracle(self, stream):
        task = de_task(synthetic_runner(parabola))
        grid = np.round(np.arange(1, 40) * 0.05, 10)
        values = [meta_objective({"F": F}, task, stream) for F in grid]
        assert grid[int(np.argmin(values))] == pytest.approx(0.6)
        assert values == pytest.approx([(F - 0.6) ** 2 for F in grid], abs=1e-15)

    def test_weight_endpoints(self, stream):
        # quality 0.25, never reaches the target -> cost 1.0
        runner = synthetic_runner(lambda p: 0.25)
        assert meta_objective({"F": 0.5}, de_task(runner, weight=1.0), stream) == 0.25
        assert meta_objective({"F": 0.5}, de_task(runner, weight=0.0), stream) == 1.0
        assert meta_objective({"F": 0.5}, de_task(runner, weight=0.5), stream) == pytest.approx(0.625)

    def test_cost_uses_target_hit(self, stream):
        prob = make_problem("sphere", 2)
        task = TuningTask("de", {"F": (0.1, 1.0)}, [prob], inner_budget=200, repetitions=2, weight=0.0,
                          runner=synthetic_runner(lambda p: 0.0, hit=50))
        assert meta_objective({"F": 0.5}, task, stream) == pytest.approx(0.25)

    def test_real_runs_common_random_numbers(self):
        prob = make_problem("sphere", 3)
        task = TuningTask("de", {"F": (0.2, 1.2)}, [prob], inner_budget=300, repetitions=2, population_size=10)
        s = RandomStream(8)
        stats = {}
        a = meta_objective({"F": 0.5}, task, s, stats)
        assert a == meta_objective({"F": 0.5}, task, s)
        assert stats == {"inner_evaluations": 600, "runs": 2}
        assert 0 <= a <= 1.5

    def test_out_of_bounds(self, stream):
        task = de_task(synthetic_runner(parabola), bounds=(0.2, 0.8))
        with pytest.raises(ContractViolation):
            meta_objective({"F": 0.9}, task, stream)
        with pytest.raises(ContractViolation):
            meta_objective({"CR": 0.5}, task, stream)


class TestTask:
    def test_validation(self):
        r = synthetic_runner(parabola)
        with pytest.raises(ContractViolation):
            de_task(r, bounds=(0.0, 1.0))  # F = 0 is illegal
        with pytest.raises(ContractViolation):
            de_task(r, bounds=(0.5, 0.5))
        with pytest.raises(ContractViolation):
            de_task(r, meta_budget=0)
        with pytest.raises(ContractViolation):
            de_task(r, weight=1.5)
        with pytest.raises(ContractViolation):
            TuningTask("pso", {"per_coordinate": (0, 1)}, [DUMMY])
        with pytest.raises(ContractViolation):
            TuningTask("de", {"F": (0.1, 1.0)}, [])

    def test_integer_parameters_rounded(self):
        task = TuningTask("ga", {"elite_count": (0, 4), "mutation_rate": (0.0, 1.0)}, [DUMMY])
        p = task.to_params([2.6, 0.3])
        assert p.elite_count == 3 and isinstance(p.elite_count, int)


class TestSelfTune:
    def test_parabola(self):
        runner = synthetic_runner(parabola)
        res = self_tune(de_task(runner, meta_budget=200), RandomStream(4))
        assert res.mode == "self"
        assert abs(res.best_params.F - 0.6) <= 0.1
        assert len(res.trials) == 200 and len(runner.calls) == 200
        assert all(0.05 <= c.F <= 1.95 for c in runner.calls)

    def test_meta_budget_one(self):
        res = self_tune(de_task(synthetic_runner(parabola), meta_budget=1), RandomStream(1))
        assert res.mode == "random" and len(res.trials) == 1
        assert 0.05 <= res.best_params.F <= 1.95
        assert res.best_value == res.trials[0].value

    @given(st.integers(0, 2**31 - 1))
    def test_nested_budgets_monotone(self, seed):
        prev = math.inf
        for budget in (3, 10, 25, 60):
            res = self_tune(de_task(synthetic_runner(parabola), meta_budget=budget), RandomStream(seed))
            assert res.best_value <= prev
            prev = res.best_value

    def test_result_within_bounds_for_every_algorithm(self):
        for name, bounds in [("pso", {"alpha": (0.5, 2.5), "inertia": (0.1, 0.9)}), ("sa", {"step_scale": (0.001, 0.5)}),
                             ("ga", {"mutation_rate": (0.0, 0.5)}), ("cs", {"p_a": (0.1, 0.5)})]:
            task = TuningTask(name, bounds, [DUMMY], meta_budget=12, repetitions=1, weight=1.0,
                              runner=synthetic_runner(lambda p: 1.0))
            res = self_tune(task, RandomStream(2))
            assert len(res.trials) == 12
            for t in res.trials:
                for k, (lo, hi) in bounds.items():
                    assert lo <= t.params[k] <= hi

    def test_inner_evaluation_accounting(self):
        prob = make_problem("sphere", 2)
        task = TuningTask("de", {"F": (0.2, 1.2)}, [prob, make_problem("rastrigin", 2)], inner_budget=120,
                          repetitions=2, meta_budget=4, meta_population=4, population_size=8)
        res = self_tune(task, RandomStream(0))
        assert res.inner_evaluations <= 4 * 2 * 2 * 120
        assert res.trace == sorted(res.trace, reverse=True)

    def test_trials_csv(self):
        res = self_tune(de_task(synthetic_runner(parabola), meta_budget=3), RandomStream(0))
        buf = io.StringIO()
        write_trials_csv(res, ["F"], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "trial,F,meta_objective" and len(lines) == 4
        assert float(lines[1].split(",")[2]) == res.trials[0].value


class TestSchedules:
    def test_examples(self):
        assert parameter_schedule("linear", 1.0, 0.0, 50, 100) == 0.5
        assert parameter_schedule("geometric", 1.0, 0.01, 50, 100) == pytest.approx(0.1, rel=1e-12)
        assert parameter_schedule("constant", 0.3, 0.3, 70, 100) == 0.3

    @given(st.sampled_from(["linear", "geometric"]), st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 10**6))
    def test_endpoints(self, kind, a, b, t_max):
        assert abs(parameter_schedule(kind, a, b, 0, t_max) - a) <= 1e-12
        assert abs(parameter_schedule(kind, a, b, t_max, t_max) - b) <= 1e-12

    def test_errors(self):
        with pytest.raises(ContractViolation):
            parameter_schedule("geometric", 1.0, 0.0, 1, 2)
        with pytest.raises(ContractViolation):
            parameter_schedule("geometric", -1.0, 1.0, 1, 2)
        with pytest.raises(ContractViolation):
            parameter_schedule("linear", 1.0, 0.0, 3, 2)
        with pytest.raises(ContractViolation):
            Schedule("cosine", 1.0, 0.0)

    def test_schedule_drives_run(self, sphere5):
        from niopt import run

        rec = run("sa", problem=sphere5, budget=300, stream=RandomStream(1),
                  schedules={"step_scale": Schedule("linear", 0.5, 0.01)})
        assert rec.evaluations <= 300
