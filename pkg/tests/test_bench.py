import csv
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqdfo.bench import (
    RECORDS_HEADER,
    UNSOLVED,
    ExperimentConfig,
    ProfileCurve,
    SolveRecord,
    data_alpha_grid,
    data_profile,
    evals_to_convergence,
    format_config,
    median_t_evals,
    parse_config,
    performance_profile,
    read_records_csv,
    rescore,
    run_experiment,
    worker_count,
)
from seqdfo.errors import ConfigError, ParameterError


def rec(t, solver="st", n=2, problem="p", seed=0, s2=1.0):
    return SolveRecord(problem, n, solver, s2, seed, t, 0.0)


HIST = [(0, 2.0), (300, 0.5), (500, 0.19), (900, 0.01)]


def test_evals_to_convergence_threshold():
    assert evals_to_convergence(HIST, 2.0, 0.0, 0.1) == 500


def test_evals_to_convergence_unsolved():
    assert evals_to_convergence(HIST[:3], 2.0, 0.0, 0.001) is UNSOLVED


def test_evals_to_convergence_loose_tolerance():
    assert evals_to_convergence(HIST, 2.0, 0.0, 1 - 1e-12) == 300


def test_evals_to_convergence_errors():
    with pytest.raises(ParameterError):
        evals_to_convergence(HIST, 0.0, 0.0, 0.1)
    with pytest.raises(ParameterError):
        evals_to_convergence(HIST, 2.0, 0.0, 1.0)


def test_data_profile_examples():
    recs = [rec(30), rec(UNSOLVED, seed=1)]
    prof = data_profile(recs, [0.0, 20.0, math.inf])["st"]
    assert prof.at(0.0) == 0.0
    assert prof.at(20.0) == 0.5
    assert prof.at(math.inf) == 0.5


def test_data_profile_requires_records():
    with pytest.raises(ParameterError):
        data_profile([], [1.0])


def test_performance_profile_examples():
    recs = [rec(40, "st"), rec(120, "ft")]
    prof = performance_profile(recs, [1.0, 3.0])
    assert prof["st"].at(1.0) == 1.0
    assert prof["ft"].at(1.0) == 0.0 and prof["ft"].at(3.0) == 1.0


def test_performance_profile_unsolved_and_ties():
    recs = [rec(UNSOLVED, "st"), rec(UNSOLVED, "ft"), rec(50, "st", seed=1), rec(50, "ft", seed=1)]
    prof = performance_profile(recs, [1.0, 1e9])
    for s in ("st", "ft"):
        assert prof[s].at(1.0) == 0.5 and prof[s].at(1e9) == 0.5


def test_performance_profile_needs_two_solvers():
    with pytest.raises(ParameterError):
        performance_profile([rec(3)], [1.0])


def test_profile_curve_invariants():
    with pytest.raises(ParameterError):
        ProfileCurve((0.0, 1.0), (0.5, 0.2))
    with pytest.raises(ParameterError):
        ProfileCurve((1.0, 0.0), (0.1, 0.2))
    with pytest.raises(ParameterError):
        ProfileCurve((0.0,), (1.5,))


_records = st.lists(
    st.tuples(st.one_of(st.none(), st.integers(1, 10_000)), st.sampled_from(["st", "ft"]),
              st.integers(0, 5), st.sampled_from([2, 10])),
    min_size=1, max_size=40,
)


@settings(max_examples=100, deadline=None)
@given(_records)
def test_profiles_monotone_and_bounded(rows):
    recs = [rec(t, s, n=n, seed=seed) for t, s, seed, n in rows]
    for curve in data_profile(recs, data_alpha_grid(recs, 10_000)).values():
        f = np.asarray(curve.fractions)
        assert np.all(np.diff(f) >= 0) and f[-1] <= 1.0
    if len({r.solver for r in recs}) == 2:
        for curve in performance_profile(recs, np.geomspace(1, 1e4, 50)).values():
            f = np.asarray(curve.fractions)
            assert np.all(np.diff(f) >= 0) and 0.0 <= f[0] and f[-1] <= 1.0


def test_median_counts_unsolved_as_infinite():
    assert median_t_evals([rec(5), rec(7), rec(UNSOLVED)]) == 7.0
    assert median_t_evals([rec(5), rec(UNSOLVED)]) == math.inf


def test_config_parsing():
    cfg = parse_config("""
        # comment line
        master_seed = 0x10
        problems = sphere, tridia:3   # inline comment
        dims = 2, 4
        sigma2_f = 0.01 1
        reps = 3
        tau = 0.05
        solvers = st
    """)
    assert cfg.master_seed == 16
    assert cfg.problems == (("sphere", 2), ("sphere", 4), ("tridia", 3))
    assert cfg.sigma2_f_values == (0.01, 1.0)
    assert cfg.reps == 3 and cfg.tolerance_tau == 0.05 and cfg.solver_kinds == ("st",)


def test_config_roundtrip():
    cfg = ExperimentConfig(problems=(("arwhead", 3),), reps=2, gamma=1.25)
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize("text,condition", [
    ("reps = 0", "reps"),
    ("colour = blue", "syntax"),
    ("reps = 1\nreps = 2", "syntax"),
    ("reps = two", "syntax"),
    ("no equals sign", "syntax"),
    ("problems = sphere:x", "problems"),
    ("problems = nope:2", "problems"),
    ("problems = rosenbrock_ext:1", "problems"),
    ("tau = 1.5", "tau"),
    ("solvers = st, xx", "solvers"),
    ("theta = 0.5", "stepsize_drift"),
    ("sigma2_f = -1", "sigma2_f"),
])
def test_config_errors(text, condition):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.condition == condition


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SEQDFO_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SEQDFO_WORKERS", "0")
    with pytest.raises(ConfigError):
        worker_count()


SMALL = ExperimentConfig(problems=(("sphere", 2), ("engval1", 2)), sigma2_f_values=(0.01, 1.0),
                         reps=2, budget=2000)


def test_noiseless_solvers_coincide():
    cfg = ExperimentConfig(problems=(("rosenbrock_ext", 2),), sigma2_f_values=(0.0,), reps=1)
    res = run_experiment(cfg, workers=1)
    st_, ft = res.records
    assert st_.seed == ft.seed
    assert st_.t_evals == ft.t_evals and st_.best_true_f == ft.best_true_f


def test_experiment_outputs(tmp_path):
    res = run_experiment(SMALL, tmp_path, workers=1)
    assert len(res.records) == 2 * 2 * 2 * 2
    with open(tmp_path / "records.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(RECORDS_HEADER)
    assert len(rows) == 1 + len(res.records)
    for row, r in zip(rows[1:], res.records):
        assert (row[5] == "") == (r.t_evals is UNSOLVED)
        if r.t_evals is not UNSOLVED:
            assert int(row[5]) <= SMALL.budget
    assert read_records_csv(tmp_path / "records.csv") == res.records
    for svg in tmp_path.glob("*.svg"):
        assert ET.parse(svg).getroot().tag.endswith("svg")
    assert (tmp_path / "data_profile.csv").exists() and (tmp_path / "performance_profile.csv").exists()


def test_unknown_optimum_calibrated(tmp_path):
    res = run_experiment(SMALL, tmp_path, workers=1)
    info = {(i.problem, i.sigma2_f): i for i in res.instances}
    assert info[("sphere", 1.0)].f_L_source == "f_star" and info[("sphere", 1.0)].f_L == 0.0
    eng = info[("engval1", 1.0)]
    assert eng.f_L_source == "calibration"
    assert all(eng.f_L <= r.best_true_f for r in res.records if r.problem == "engval1" and r.sigma2_f == 1.0)
    assert eng.f_L < eng.f0


def test_experiment_deterministic_across_workers(tmp_path):
    run_experiment(SMALL, tmp_path / "a", workers=1)
    run_experiment(SMALL, tmp_path / "b", workers=2)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rescore_reproduces_and_tightens(tmp_path):
    res = run_experiment(SMALL, tmp_path, workers=1)
    same, budget = rescore(tmp_path / "records.csv", SMALL.tolerance_tau)
    assert same == res.records and budget == SMALL.budget
    tight, _ = rescore(tmp_path / "records.csv", 1e-6)
    for a, b in zip(res.records, tight):
        if b.t_evals is not UNSOLVED:
            assert a.t_evals is not UNSOLVED and b.t_evals >= a.t_evals
