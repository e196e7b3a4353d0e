"""Benchmark harness: sequential vs fixed-sample solvers over the problem
catalog, with data and performance profiles written as CSV and SVG.

Both solvers on one instance and repetition share a seed and a random
stream (common random numbers), so their records pair up for performance
profiles and coincide exactly when the noise is zero.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _svg
from .errors import CatalogError, ConfigError, ParameterError
from .oracle import CATALOG_NAMES, builtin_problem
from .search import SearchConfig, TestKind, run_direct_search, validate_config
from .stochastics import derive_seed, RngStream

#: Marker for runs that never reach the convergence threshold.
UNSOLVED = None

RECORDS_HEADER = ("problem", "n", "solver", "sigma2_f", "seed", "t_evals", "best_true_f")
HISTORY_HEADER = ("problem", "n", "solver", "sigma2_f", "seed", "oracle_calls", "best_true_f")
INSTANCES_HEADER = ("problem", "n", "sigma2_f", "f0", "f_L", "f_L_source")
PROFILE_HEADER = ("sigma2_f", "solver", "alpha", "fraction")

SOLVERS = {"st": TestKind.SEQUENTIAL, "ft": TestKind.FIXED_SAMPLE}


@dataclass(frozen=True)
class SolveRecord:
    problem: str
    n: int
    solver: str
    sigma2_f: float
    seed: int
    t_evals: Optional[int]
    best_true_f: float

    @property
    def instance(self) -> tuple:
        return (self.problem, self.n, self.sigma2_f, self.seed)


@dataclass(frozen=True)
class ProfileCurve:
    alphas: tuple
    fractions: tuple

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        f = np.asarray(self.fractions, dtype=float)
        if a.shape != f.shape:
            raise ParameterError("alphas and fractions differ in length")
        if a.size and np.any(np.diff(a) <= 0.0):
            raise ParameterError("alphas must be strictly increasing")
        if f.size and (np.any(np.diff(f) < 0.0) or f.min() < 0.0 or f.max() > 1.0):
            raise ParameterError("fractions must be nondecreasing within [0, 1]")

    def at(self, alpha: float) -> float:
        """Fraction at ``alpha`` (right-continuous step interpolation)."""
        i = int(np.searchsorted(np.asarray(self.alphas), alpha, side="right")) - 1
        return 0.0 if i < 0 else float(self.fractions[i])


# -- convergence and profiles ------------------------------------------------

def convergence_threshold(f0: float, f_L: float, tau: float) -> float:
    return f_L + tau * (f0 - f_L)


def evals_to_convergence(trace, f0: float, f_L: float, tau: float) -> Optional[int]:
    """Oracle calls until the best noiseless value reaches ``f_L + tau (f0 - f_L)``.

    ``trace`` is a :class:`~seqdfo.search.RunTrace` or its
    ``best_true_f_by_calls`` list. Returns ``UNSOLVED`` if never reached.
    """
    if not f0 > f_L:
        raise ParameterError(f"need f0 > f_L, got f0={f0}, f_L={f_L}")
    if not 0.0 < tau < 1.0:
        raise ParameterError(f"tau must lie in (0, 1), got {tau}")
    history = getattr(trace, "best_true_f_by_calls", trace)
    threshold = convergence_threshold(f0, f_L, tau)
    for calls, best in history:
        if best <= threshold:
            return int(calls)
    return UNSOLVED


def _by_solver(records) -> dict:
    out: dict = {}
    for r in records:
        out.setdefault(r.solver, []).append(r)
    return out


def data_profile(records: Sequence[SolveRecord], alpha_grid: Iterable[float]) -> dict:
    """Fraction of each solver's runs with ``t_evals <= alpha (n + 1)``."""
    records = list(records)
    if not records:
        raise ParameterError("data profile needs at least one record")
    alphas = np.asarray(sorted(set(float(a) for a in alpha_grid)))
    out = {}
    for solver, recs in sorted(_by_solver(records).items()):
        scaled = np.array([r.t_evals / (r.n + 1) for r in recs if r.t_evals is not UNSOLVED])
        counts = np.searchsorted(np.sort(scaled), alphas, side="right") if scaled.size else np.zeros(alphas.size)
        out[solver] = ProfileCurve(tuple(alphas.tolist()), tuple((counts / len(recs)).tolist()))
    return out


def performance_ratios(records: Sequence[SolveRecord]) -> dict:
    """``solver -> list of t_s / min_s t_s`` over instances (``inf`` if unsolved)."""
    records = list(records)
    solvers = sorted({r.solver for r in records})
    if len(solvers) < 2:
        raise ParameterError("performance profile needs at least two solvers")
    groups: dict = {}
    for r in records:
        groups.setdefault(r.instance, {})[r.solver] = r.t_evals
    ratios = {s: [] for s in solvers}
    for key in sorted(groups, key=repr):
        ts = groups[key]
        solved = [t for t in ts.values() if t is not UNSOLVED]
        best = min(solved) if solved else None
        for s in solvers:
            t = ts.get(s, UNSOLVED)
            if t is UNSOLVED or best is None:
                ratios[s].append(math.inf)
            elif best == 0:
                ratios[s].append(1.0 if t == 0 else math.inf)
            else:
                ratios[s].append(t / best)
    return ratios


def performance_profile(records: Sequence[SolveRecord], alpha_grid: Iterable[float]) -> dict:
    """Fraction of instances on which each solver is within ``alpha`` of the best."""
    ratios = performance_ratios(records)
    alphas = np.asarray(sorted(set(float(a) for a in alpha_grid)))
    out = {}
    for s, r in ratios.items():
        r = np.sort(np.asarray(r))
        counts = np.searchsorted(r, alphas, side="right")
        out[s] = ProfileCurve(tuple(alphas.tolist()), tuple((counts / r.size).tolist()))
    return out


def data_alpha_grid(records: Sequence[SolveRecord], budget: int) -> list[float]:
    """Every step point of the data profiles, from 0 to the budget endpoint."""
    records = list(records)
    end = budget / (min(r.n for r in records) + 1)
    pts = {0.0, float(end)}
    pts.update(r.t_evals / (r.n + 1) for r in records if r.t_evals is not UNSOLVED)
    return sorted(p for p in pts if p <= end)


def performance_alpha_grid(records: Sequence[SolveRecord]) -> list[float]:
    pts = {1.0}
    for rs in performance_ratios(records).values():
        pts.update(r for r in rs if math.isfinite(r))
    return sorted(pts)


# -- experiment configuration --------------------------------------------------

DEFAULT_DIMS = (2, 10, 50)


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    problems: tuple = tuple((name, n) for name in CATALOG_NAMES for n in DEFAULT_DIMS)
    sigma2_f_values: tuple = (0.01, 1.0)
    reps: int = 10
    budget: int = 10_000
    tolerance_tau: float = 0.1
    solver_kinds: tuple = ("st", "ft")
    delta0: float = 1.0
    c: float = 0.5
    theta: float = 0.95
    gamma: float = 1.3
    budget_unit: str = "calls"
    #: budget multiple for the calibration runs that estimate unknown f*
    calibration_factor: int = 10

    def search_config(self, solver: str, sigma2_f: float, budget: Optional[int] = None) -> SearchConfig:
        return SearchConfig(delta0=self.delta0, c=self.c, theta=self.theta, gamma=self.gamma,
                            test_kind=SOLVERS[solver], sigma2_f=float(sigma2_f),
                            budget=self.budget if budget is None else int(budget),
                            budget_unit=self.budget_unit)


def validate_experiment(config: ExperimentConfig) -> None:
    """Raise :class:`ConfigError` if the experiment cannot run as configured."""
    if int(config.reps) < 1:
        raise ConfigError("reps", f"reps must be >= 1, got {config.reps}")
    if int(config.budget) < 1:
        raise ConfigError("budget", f"budget must be >= 1, got {config.budget}")
    if not 0.0 < config.tolerance_tau < 1.0:
        raise ConfigError("tau", f"tau must lie in (0, 1), got {config.tolerance_tau}")
    if int(config.calibration_factor) < 1:
        raise ConfigError("calibration_factor", "calibration_factor must be >= 1")
    if not config.problems:
        raise ConfigError("problems", "no problems configured")
    if not config.sigma2_f_values:
        raise ConfigError("sigma2_f", "no noise levels configured")
    if not config.solver_kinds or len(set(config.solver_kinds)) != len(config.solver_kinds):
        raise ConfigError("solvers", f"solvers must be a nonempty list without repeats, got {config.solver_kinds}")
    for s in config.solver_kinds:
        if s not in SOLVERS:
            raise ConfigError("solvers", f"unknown solver {s!r}; choose from st, ft")
    if not 0 <= int(config.master_seed) < 2**64:
        raise ConfigError("master_seed", "master_seed must be an unsigned 64-bit integer")
    for name, n in config.problems:
        try:
            builtin_problem(name, n)
        except CatalogError as exc:
            raise ConfigError("problems", str(exc)) from None
    for v in config.sigma2_f_values:
        validate_config(config.search_config(config.solver_kinds[0], v))


_INT_KEYS = {"master_seed", "reps", "budget", "calibration_factor"}
_FLOAT_KEYS = {"tau", "delta0", "c", "theta", "gamma"}
_FIELD = {"tau": "tolerance_tau"}
CONFIG_KEYS = ("master_seed", "problems", "dims", "sigma2_f", "reps", "budget", "tau", "solvers",
               "delta0", "c", "theta", "gamma", "budget_unit", "calibration_factor")


def _split(value: str) -> list[str]:
    return [tok for tok in (t.strip() for t in value.replace(",", " ").split()) if tok]


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines (``#`` starts a comment).

    ``problems`` lists names or ``name:n`` pairs; bare names are combined
    with every entry of ``dims``. List values are comma or space separated.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError("syntax", f"line {lineno}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise ConfigError("syntax", f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError("syntax", f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    kwargs: dict = {}
    try:
        for key in _INT_KEYS & raw.keys():
            kwargs[key] = int(raw[key], 0)
        for key in _FLOAT_KEYS & raw.keys():
            kwargs[_FIELD.get(key, key)] = float(raw[key])
        if "sigma2_f" in raw:
            kwargs["sigma2_f_values"] = tuple(float(v) for v in _split(raw["sigma2_f"]))
        dims = tuple(int(v) for v in _split(raw["dims"])) if "dims" in raw else DEFAULT_DIMS
    except ValueError as exc:
        raise ConfigError("syntax", f"bad number: {exc}") from None
    if "solvers" in raw:
        kwargs["solver_kinds"] = tuple(_split(raw["solvers"]))
    if "budget_unit" in raw:
        kwargs["budget_unit"] = raw["budget_unit"]
    if "problems" in raw:
        problems = []
        for tok in _split(raw["problems"]):
            name, sep, n = tok.partition(":")
            if sep:
                try:
                    problems.append((name, int(n)))
                except ValueError:
                    raise ConfigError("problems", f"bad dimension in {tok!r}") from None
            else:
                problems.extend((name, d) for d in dims)
        kwargs["problems"] = tuple(problems)
    elif "dims" in raw:
        kwargs["problems"] = tuple((name, d) for name in CATALOG_NAMES for d in dims)
    config = ExperimentConfig(**kwargs)
    validate_experiment(config)
    return config


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def format_config(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` (explicit ``name:n`` pairs)."""
    lines = [
        f"master_seed = {config.master_seed}",
        "problems = " + ", ".join(f"{name}:{n}" for name, n in config.problems),
        "sigma2_f = " + ", ".join(repr(float(v)) for v in config.sigma2_f_values),
        f"reps = {config.reps}",
        f"budget = {config.budget}",
        f"tau = {config.tolerance_tau!r}",
        "solvers = " + ", ".join(config.solver_kinds),
        f"delta0 = {config.delta0!r}",
        f"c = {config.c!r}",
        f"theta = {config.theta!r}",
        f"gamma = {config.gamma!r}",
        f"budget_unit = {config.budget_unit}",
        f"calibration_factor = {config.calibration_factor}",
    ]
    return "\n".join(lines) + "\n"


# -- running ---------------------------------------------------------------------

def instance_seed(master_seed: int, problem: str, n: int, sigma2_f: float, rep: int) -> int:
    """Seed shared by every solver on one (instance, noise level, repetition)."""
    return derive_seed(master_seed, problem, int(n), repr(float(sigma2_f)), int(rep))


@dataclass(frozen=True)
class _Job:
    order: tuple
    problem: str
    n: int
    solver: str
    sigma2_f: float
    seed: int
    search: SearchConfig
    calibration: bool = False


def _run_job(job: _Job):
    problem = builtin_problem(job.problem, job.n)
    stream = RngStream(derive_seed(job.seed, "calibration") if job.calibration else job.seed)
    trace = run_direct_search(job.search, problem, stream)
    return job.order, list(trace.best_true_f_by_calls), trace.best_true_f


def worker_count() -> int:
    env = os.environ.get("SEQDFO_WORKERS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("SEQDFO_WORKERS", f"expected an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("SEQDFO_WORKERS", f"must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _execute(jobs: list, workers: int) -> dict:
    if workers <= 1 or len(jobs) <= 1:
        results = map(_run_job, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        with pool:
            results = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return {order: (hist, best) for order, hist, best in results}


@dataclass(frozen=True)
class InstanceInfo:
    problem: str
    n: int
    sigma2_f: float
    f0: float
    f_L: float
    f_L_source: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    instances: list = field(default_factory=list)
    #: (problem, n, solver, sigma2_f, seed) -> [(oracle_calls, best_true_f), ...]
    histories: dict = field(default_factory=dict)

    def records_for(self, sigma2_f: Optional[float] = None, n: Optional[int] = None) -> list:
        return [r for r in self.records
                if (sigma2_f is None or r.sigma2_f == sigma2_f) and (n is None or r.n == n)]


def run_experiment(config: ExperimentConfig, out_dir=None, workers: Optional[int] = None) -> ExperimentResult:
    """Run every (problem, noise level, repetition, solver) job.

    When ``out_dir`` is given, CSV and SVG outputs are written there. The
    result does not depend on the worker count.
    """
    validate_experiment(config)
    workers = worker_count() if workers is None else int(workers)

    jobs = []
    for pi, (name, n) in enumerate(config.problems):
        for si, s2 in enumerate(config.sigma2_f_values):
            for rep in range(config.reps):
                seed = instance_seed(config.master_seed, name, n, s2, rep)
                for ki, solver in enumerate(config.solver_kinds):
                    jobs.append(_Job((pi, si, rep, ki, 0), name, n, solver, float(s2), seed,
                                     config.search_config(solver, s2)))
                    if builtin_problem(name, n).f_star is None:
                        budget = config.budget * config.calibration_factor
                        jobs.append(_Job((pi, si, rep, ki, 1), name, n, solver, float(s2), seed,
                                         config.search_config(solver, s2, budget), calibration=True))
    results = _execute(jobs, workers)

    result = ExperimentResult(config)
    for pi, (name, n) in enumerate(config.problems):
        problem = builtin_problem(name, n)
        f0 = problem.f0
        for si, s2 in enumerate(config.sigma2_f_values):
            mine = [j for j in jobs if j.order[:2] == (pi, si)]
            if problem.f_star is not None:
                f_L, source = float(problem.f_star), "f_star"
            else:
                f_L, source = min(results[j.order][1] for j in mine), "calibration"
            result.instances.append(InstanceInfo(name, n, float(s2), f0, f_L, source))
            for j in mine:
                if j.calibration:
                    continue
                hist, best = results[j.order]
                t = evals_to_convergence(hist, f0, f_L, config.tolerance_tau) if f0 > f_L else UNSOLVED
                result.records.append(SolveRecord(name, n, j.solver, float(s2), j.seed, t, best))
                result.histories[(name, n, j.solver, float(s2), j.seed)] = hist
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


# -- outputs -----------------------------------------------------------------------

def _open_csv(path: Path, header):
    fh = open(path, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def write_records_csv(records: Iterable[SolveRecord], path) -> None:
    fh, w = _open_csv(Path(path), RECORDS_HEADER)
    with fh:
        for r in records:
            w.writerow([r.problem, r.n, r.solver, repr(r.sigma2_f), r.seed,
                        "" if r.t_evals is UNSOLVED else r.t_evals, repr(r.best_true_f)])


def read_records_csv(path) -> list[SolveRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != RECORDS_HEADER:
        raise ParameterError(f"{path}: header must be {','.join(RECORDS_HEADER)}")
    return [SolveRecord(p, int(n), s, float(v), int(seed), None if t == "" else int(t), float(b))
            for p, n, s, v, seed, t, b in rows[1:]]


def write_profiles(records: Sequence[SolveRecord], out_dir, budget: int) -> None:
    """Per noise level: profile CSVs and SVG plots for data and performance profiles."""
    out = Path(out_dir)
    levels = sorted({r.sigma2_f for r in records})
    solvers = {r.solver for r in records}
    dfh, dw = _open_csv(out / "data_profile.csv", PROFILE_HEADER)
    pfh = pw = None
    if len(solvers) >= 2:
        pfh, pw = _open_csv(out / "performance_profile.csv", PROFILE_HEADER)
    try:
        for s2 in levels:
            recs = [r for r in records if r.sigma2_f == s2]
            data = data_profile(recs, data_alpha_grid(recs, budget))
            for solver, curve in data.items():
                for a, f in zip(curve.alphas, curve.fractions):
                    dw.writerow([repr(s2), solver, repr(a), repr(f)])
            (out / f"data_profile_sigma2_{s2!r}.svg").write_text(_svg.step_plot(
                {s: (c.alphas, c.fractions) for s, c in data.items()},
                f"Data profile, sigma2_f = {s2!r}", "budget units alpha (calls / (n + 1))"))
            if pw is not None:
                perf = performance_profile(recs, performance_alpha_grid(recs))
                for solver, curve in perf.items():
                    for a, f in zip(curve.alphas, curve.fractions):
                        pw.writerow([repr(s2), solver, repr(a), repr(f)])
                (out / f"performance_profile_sigma2_{s2!r}.svg").write_text(_svg.step_plot(
                    {s: (c.alphas, c.fractions) for s, c in perf.items()},
                    f"Performance profile, sigma2_f = {s2!r}", "ratio to best alpha", log_x=True))
    finally:
        dfh.close()
        if pfh is not None:
            pfh.close()


def write_outputs(result: ExperimentResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(format_config(result.config))
    write_records_csv(result.records, out / "records.csv")
    fh, w = _open_csv(out / "history.csv", HISTORY_HEADER)
    with fh:
        for (name, n, solver, s2, seed), hist in result.histories.items():
            for calls, best in hist:
                w.writerow([name, n, solver, repr(s2), seed, calls, repr(best)])
    fh, w = _open_csv(out / "instances.csv", INSTANCES_HEADER)
    with fh:
        for i in result.instances:
            w.writerow([i.problem, i.n, repr(i.sigma2_f), repr(i.f0), repr(i.f_L), i.f_L_source])
    write_profiles(result.records, out, result.config.budget)


def rescore(records_path, tau: float) -> tuple[list[SolveRecord], Optional[int]]:
    """Recompute ``t_evals`` at tolerance ``tau`` from a run directory.

    Needs ``history.csv`` and ``instances.csv`` beside the records file;
    returns the records and the run's budget (from ``config.cfg`` if present).
    """
    if not 0.0 < tau < 1.0:
        raise ParameterError(f"tau must lie in (0, 1), got {tau}")
    base = Path(records_path).parent
    records = read_records_csv(records_path)
    inst = {}
    with open(base / "instances.csv", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            inst[(row[0], int(row[1]), float(row[2]))] = (float(row[3]), float(row[4]))
    hist: dict = {}
    with open(base / "history.csv", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            key = (row[0], int(row[1]), row[2], float(row[3]), int(row[4]))
            hist.setdefault(key, []).append((int(row[5]), float(row[6])))
    out = []
    for r in records:
        f0, f_L = inst[(r.problem, r.n, r.sigma2_f)]
        h = hist[(r.problem, r.n, r.solver, r.sigma2_f, r.seed)]
        t = evals_to_convergence(h, f0, f_L, tau) if f0 > f_L else UNSOLVED
        out.append(replace(r, t_evals=t))
    cfg = base / "config.cfg"
    budget = load_config(cfg).budget if cfg.exists() else None
    return out, budget


def median_t_evals(records: Sequence[SolveRecord]) -> float:
    """Median ``t_evals`` with UNSOLVED counted as ``inf``."""
    vals = [math.inf if r.t_evals is UNSOLVED else float(r.t_evals) for r in records]
    if not vals:
        raise ParameterError("median of an empty record set")
    return float(np.median(vals))
