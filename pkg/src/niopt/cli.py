"""Command-line batch runner.

Subcommands::

    niopt run --config PATH [--out DIR] [--parallel N] [--seed S]
    niopt walk --dist {gaussian,cauchy,levy} [--beta B] --steps N --walks W --seed S [--out FILE]
    niopt stability --theta LO:HI:STEP --zeta LO:HI:STEP [--out FILE]
    niopt tune --config PATH [--out FILE] [--seed S]

Exit status is 0 on success, 2 on invalid input and 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algorithms import ALGORITHM_NAMES, get_descriptor
from .algorithms import run as run_algorithm
from .analysis import stability_grid
from .benchmarks import PROBLEM_NAMES, IslandFunctionParams, make_problem
from .core import ContractViolation, RandomStream, derive_seed
from .measures import (
    REPORT_COLUMNS,
    SuccessCriterion,
    evals_to_target,
    fixed_budget_stats,
    is_success,
    rank_algorithms,
)
from .schedules import Schedule
from .stochastic import diffusion_exponent, random_walk_ensemble, step_sampler, write_walk_csv, WalkTrace
from .tuning import TuningTask, self_tune, write_trials_csv

__all__ = [
    "ConfigError",
    "AlgorithmSpec",
    "ProblemSpec",
    "ExperimentConfig",
    "parse_config",
    "run_experiment",
    "RUN_COLUMNS",
    "main",
]

RUN_COLUMNS = (
    "run_id",
    "algorithm",
    "problem",
    "dimension",
    "seed",
    "evals_used",
    "best_f",
    "success_obj",
    "success_pos",
    "wall_ms",
)

DEFAULTS = {
    "population_size": 25,
    "budget": 50_000,
    "runs": 30,
    "delta": 1e-5,
    "seed": 42,
    "output": "results",
}


class ConfigError(ContractViolation):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)
    schedules: dict = field(default_factory=dict)

    def build(self):
        desc = get_descriptor(self.name)
        sched = {k: Schedule(**v) for k, v in self.schedules.items()}
        return desc, desc.make_params(self.params), sched


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dimension: int = 2
    N: int = 100
    a: float = 10.0
    policy: Optional[str] = None

    def build(self):
        return make_problem(self.name, self.dimension, self.N, self.a, self.policy)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: tuple
    problems: tuple
    population_size: int = 25
    budget: int = 50_000
    runs: int = 30
    seed: int = 42
    delta: float = 1e-5
    output: str = "results"


def _int(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be at least {minimum}, got {value}")
    return value


def _algorithm_spec(item, key) -> AlgorithmSpec:
    if isinstance(item, str):
        item = {"name": item}
    if not isinstance(item, dict) or "name" not in item:
        raise ConfigError(f"{key}: expected an algorithm name or an object with 'name'")
    unknown = set(item) - {"name", "params", "schedules"}
    if unknown:
        raise ConfigError(f"{key}: unknown keys {sorted(unknown)}")
    name = item["name"]
    if name not in ALGORITHM_NAMES:
        raise ConfigError(f"{key}: unknown algorithm {name!r}; expected one of {', '.join(ALGORITHM_NAMES)}")
    desc = get_descriptor(name)
    params = item.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError(f"{key}.params: expected an object")
    for pname in params:
        try:
            desc.params_cls.spec(pname)
        except ContractViolation as exc:
            raise ConfigError(f"{key}.params.{pname}: {exc}") from None
    try:
        desc.make_params(params)
    except ContractViolation as exc:
        raise ConfigError(f"{key}.params: {exc}") from None
    schedules = item.get("schedules", {}) or {}
    if not isinstance(schedules, dict):
        raise ConfigError(f"{key}.schedules: expected an object")
    for pname, sched in schedules.items():
        skey = f"{key}.schedules.{pname}"
        try:
            spec = desc.params_cls.spec(pname)
        except ContractViolation as exc:
            raise ConfigError(f"{skey}: {exc}") from None
        if not isinstance(sched, dict) or set(sched) - {"kind", "start", "end"} or "kind" not in sched:
            raise ConfigError(f"{skey}: expected {{'kind', 'start', 'end'}}")
        try:
            s = Schedule(sched["kind"], float(sched.get("start", spec.default)), float(sched.get("end", spec.default)))
        except (ContractViolation, TypeError, ValueError) as exc:
            raise ConfigError(f"{skey}: {exc}") from None
        for end in (s.start, s.end):
            if not spec.contains(end):
                raise ConfigError(f"{skey}: value {end} is outside the legal range {spec.describe()}")
    return AlgorithmSpec(name, dict(params), {k: dict(v) for k, v in schedules.items()})


def _problem_spec(item, key) -> ProblemSpec:
    if isinstance(item, str):
        item = {"name": item}
    if not isinstance(item, dict) or "name" not in item:
        raise ConfigError(f"{key}: expected a problem name or an object with 'name'")
    unknown = set(item) - {"name", "dimension", "N", "a", "policy"}
    if unknown:
        raise ConfigError(f"{key}: unknown keys {sorted(unknown)}")
    name = item["name"]
    if name not in PROBLEM_NAMES:
        raise ConfigError(f"{key}: unknown problem {name!r}; expected one of {', '.join(PROBLEM_NAMES)}")
    dim = _int(item.get("dimension", 2), f"{key}.dimension", 1)
    if name == "island":
        policy = item.get("policy", "reject")
        N = _int(item.get("N", 100), f"{key}.N", 1)
        a = item.get("a", 10.0)
        if policy not in (None, "reject", "repair"):
            raise ConfigError(f"{key}.policy: unknown constraint policy {policy!r}")
        try:
            IslandFunctionParams(N, float(a))
        except (ContractViolation, TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
        spec = ProblemSpec(name, dim, N, float(a), policy)
    else:
        for k in ("N", "a", "policy"):
            if k in item:
                raise ConfigError(f"{key}.{k}: only applies to the island problem")
        spec = ProblemSpec(name, dim)
    try:
        spec.build()
    except ContractViolation as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return spec


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment description and fill in defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    allowed = {"algorithms", "problems", *DEFAULTS}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    algs = raw.get("algorithms")
    if not isinstance(algs, list) or not algs:
        raise ConfigError("algorithms: expected a non-empty list")
    algorithms = tuple(_algorithm_spec(a, f"algorithms[{i}]") for i, a in enumerate(algs))
    probs = raw.get("problems")
    if not isinstance(probs, list) or not probs:
        raise ConfigError("problems: expected a non-empty list")
    problems = tuple(_problem_spec(p, f"problems[{i}]") for i, p in enumerate(probs))
    n = _int(raw.get("population_size", DEFAULTS["population_size"]), "population_size", 1)
    budget = _int(raw.get("budget", DEFAULTS["budget"]), "budget", 1)
    if budget < n:
        raise ConfigError(f"budget: {budget} is below population_size {n}")
    runs = _int(raw.get("runs", DEFAULTS["runs"]), "runs", 1)
    seed = _int(raw.get("seed", DEFAULTS["seed"]), "seed", 0)
    delta = raw.get("delta", DEFAULTS["delta"])
    if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not delta > 0:
        raise ConfigError(f"delta: expected a positive number, got {delta!r}")
    output = raw.get("output", DEFAULTS["output"])
    if not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    for i, a in enumerate(algorithms):
        need = get_descriptor(a.name).min_population
        if n < need:
            raise ConfigError(f"algorithms[{i}]: {a.name} needs population_size >= {need}")
    return ExperimentConfig(algorithms, problems, n, budget, runs, seed, float(delta), output)


def _execute(job):
    """One seeded run; module-level so worker processes can import it."""
    cfg, a_idx, p_idx, r_idx = job
    aspec = cfg.algorithms[a_idx]
    pspec = cfg.problems[p_idx]
    desc, params, schedules = aspec.build()
    problem = pspec.build()
    pair = a_idx * len(cfg.problems) + p_idx
    seed = derive_seed(cfg.seed, pair, r_idx)
    rec = run_algorithm(desc, params, problem, cfg.budget, RandomStream(seed), cfg.population_size, schedules, seed=seed)
    obj = is_success(rec, SuccessCriterion("objective", cfg.delta), problem)
    pos = is_success(rec, SuccessCriterion("position", cfg.delta), problem)
    target = problem.known_optimum[1] + cfg.delta
    return (a_idx, p_idx, r_idx, rec, obj, pos, evals_to_target(rec, target))


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return repr(float(x))


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[str] = None, parallel: int = 1):
    """Execute every (algorithm, problem, run) and write ``runs.csv`` and ``report.csv``.

    Returns the paths ``(report_path, runs_path)``.  Row order is fixed by
    (algorithm, problem, run index), independent of ``parallel``.
    """
    out_dir = out_dir or cfg.output
    os.makedirs(out_dir, exist_ok=True)
    jobs = [
        (cfg, a, p, r)
        for a in range(len(cfg.algorithms))
        for p in range(len(cfg.problems))
        for r in range(cfg.runs)
    ]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_execute, jobs, chunksize=max(1, len(jobs) // (4 * parallel))))
    else:
        results = [_execute(j) for j in jobs]
    results.sort(key=lambda t: t[:3])

    runs_path = os.path.join(out_dir, "runs.csv")
    with open(runs_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for run_id, (a, p, r, rec, obj, pos, _) in enumerate(results):
            w.writerow([
                run_id,
                cfg.algorithms[a].name,
                cfg.problems[p].name,
                cfg.problems[p].dimension,
                rec.seed,
                rec.evaluations,
                _fmt(rec.best_fitness),
                int(obj),
                int(pos),
                f"{rec.wall_time * 1e3:.3f}",
            ])

    groups: dict = {}
    for a, p, r, rec, obj, pos, hit in results:
        groups.setdefault((a, p), []).append((rec, obj, pos, hit))
    means = {k: fixed_budget_stats([g[0] for g in v]).mean for k, v in groups.items()}
    n_alg = len(cfg.algorithms)
    if n_alg >= 2:
        table = rank_algorithms(means, range(n_alg), range(len(cfg.problems)))
        rank_of = lambda a, p: table.rank(a, p)  # noqa: E731
    else:
        rank_of = lambda a, p: 1.0  # noqa: E731

    report_path = os.path.join(out_dir, "report.csv")
    with open(report_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for (a, p), rows in sorted(groups.items()):
            st = fixed_budget_stats([g[0] for g in rows])
            hits = [g[3] for g in rows if g[3] is not None]
            w.writerow([
                cfg.algorithms[a].name,
                cfg.problems[p].name,
                st.runs,
                _fmt(st.best),
                _fmt(st.worst),
                _fmt(st.mean),
                _fmt(st.sample_std),
                _fmt(st.median),
                _fmt(np.mean([g[1] for g in rows])),
                _fmt(np.mean([g[2] for g in rows])),
                _fmt(np.mean(hits) if hits else None),
                _fmt(rank_of(a, p)),
            ])
    return report_path, runs_path


def _range_arg(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}")
    try:
        lo, hi, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in LO:HI:STEP, got {text!r}") from None
    if not step > 0 or hi < lo or not all(map(math.isfinite, (lo, hi, step))):
        raise argparse.ArgumentTypeError(f"need finite LO <= HI and STEP > 0, got {text!r}")
    return lo, hi, step


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="niopt", description="Nature-inspired optimisation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a batch experiment from a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON experiment config")
    p.add_argument("--out", help="output directory (default: the config's 'output')")
    p.add_argument("--parallel", type=_positive_int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", type=_nonneg_int, help="override the config's master seed")

    p = sub.add_parser("walk", help="simulate random walks and fit the diffusion exponent")
    p.add_argument("--dist", required=True, choices=("gaussian", "cauchy", "levy"))
    p.add_argument("--beta", type=float, default=1.5, help="Levy exponent (default 1.5)")
    p.add_argument("--steps", required=True, type=_positive_int)
    p.add_argument("--walks", required=True, type=_positive_int)
    p.add_argument("--seed", required=True, type=_nonneg_int)
    p.add_argument("--out", default="walk.csv", help="CSV file for the first walk (default walk.csv)")

    p = sub.add_parser("stability", help="tabulate the bat-system stability region")
    p.add_argument("--theta", required=True, type=_range_arg, metavar="LO:HI:STEP")
    p.add_argument("--zeta", required=True, type=_range_arg, metavar="LO:HI:STEP")
    p.add_argument("--out", help="CSV file (default: standard output)")

    p = sub.add_parser("tune", help="self-tune an algorithm's parameters")
    p.add_argument("--config", required=True, help="path to the JSON tuning config")
    p.add_argument("--out", help="CSV file (default: standard output)")
    p.add_argument("--seed", type=_nonneg_int, help="override the config's seed")
    return parser


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


def _cmd_run(args) -> int:
    cfg = parse_config(_read_text(args.config))
    if args.seed is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
    report, runs = run_experiment(cfg, args.out, args.parallel)
    print(report)
    print(runs)
    return 0


def _cmd_walk(args) -> int:
    src = step_sampler(args.dist, args.beta)
    stream = RandomStream(args.seed)
    S = random_walk_ensemble(stream, args.walks, args.steps, src)
    slope = diffusion_exponent(S)
    with open(args.out, "w", newline="") as fh:
        write_walk_csv(WalkTrace(S[0]), fh)
    print(f"diffusion_exponent,{slope!r}")
    return 0


def _cmd_stability(args) -> int:
    T, Z, inside, radius = stability_grid(args.theta, args.zeta)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "zeta", "in_region", "spectral_radius"])
    for t, z, i, r in zip(T, Z, inside, radius):
        w.writerow([repr(float(t)), repr(float(z)), int(i), repr(float(r))])
    _emit(buf.getvalue(), args.out)
    return 0


TUNE_KEYS = {
    "algorithm", "bounds", "problems", "inner_budget", "repetitions", "meta_budget",
    "weight", "population_size", "meta_population", "target_tolerance", "seed",
}


def parse_tuning_config(text: str):
    """Validate a JSON tuning description; returns ``(TuningTask, seed)``."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TUNE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    name = raw.get("algorithm")
    if name not in ALGORITHM_NAMES:
        raise ConfigError(f"algorithm: unknown algorithm {name!r}; expected one of {', '.join(ALGORITHM_NAMES)}")
    bounds = raw.get("bounds")
    if not isinstance(bounds, dict) or not bounds:
        raise ConfigError("bounds: expected an object of name -> [lo, hi]")
    for k, v in bounds.items():
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
            raise ConfigError(f"bounds.{k}: expected [lo, hi]")
    probs = raw.get("problems", [{"name": "sphere", "dimension": 5}])
    if not isinstance(probs, list) or not probs:
        raise ConfigError("problems: expected a non-empty list")
    problems = [_problem_spec(p, f"problems[{i}]").build() for i, p in enumerate(probs)]
    ints = {}
    for key, default, minimum in (
        ("inner_budget", 2000, 1),
        ("repetitions", 3, 1),
        ("meta_budget", 20, 1),
        ("population_size", 20, 1),
        ("meta_population", 10, 1),
        ("seed", 42, 0),
    ):
        ints[key] = _int(raw.get(key, default), key, minimum)
    weight = raw.get("weight", 0.5)
    tol = raw.get("target_tolerance", 1e-3)
    if isinstance(weight, bool) or not isinstance(weight, (int, float)):
        raise ConfigError("weight: expected a number in [0, 1]")
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise ConfigError("target_tolerance: expected a positive number")
    if ints["inner_budget"] < ints["population_size"]:
        raise ConfigError("inner_budget: must be at least population_size")
    seed = ints.pop("seed")
    try:
        task = TuningTask(
            algorithm=name,
            bounds={k: tuple(v) for k, v in bounds.items()},
            problems=problems,
            weight=float(weight),
            target_tolerance=float(tol),
            **ints,
        )
    except ContractViolation as exc:
        raise ConfigError(f"bounds: {exc}") from None
    return task, seed


def _cmd_tune(args) -> int:
    task, seed = parse_tuning_config(_read_text(args.config))
    if args.seed is not None:
        seed = args.seed
    result = self_tune(task, RandomStream(seed))
    buf = io.StringIO()
    write_trials_csv(result, task.names, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


COMMANDS = {"run": _cmd_run, "walk": _cmd_walk, "stability": _cmd_stability, "tune": _cmd_tune}


def _join_negative_ranges(argv):
    # "--theta -2:2:0.1" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--theta", "--zeta"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_ranges(argv))  # exits with status 2 on bad flags
    try:
        return COMMANDS[args.command](args)
    except ContractViolation as exc:
        print(f"niopt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: I/O, numerical breakdown, ...
        print(f"niopt {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
