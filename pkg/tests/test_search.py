import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqdfo.errors import ConfigError
from seqdfo.oracle import Problem, builtin_problem
from seqdfo.search import (
    SearchConfig,
    TerminationReason,
    TestKind,
    accuracy_level,
    run_direct_search,
    validate_config,
)
from seqdfo.stochastics import RngStream, uniform_sphere_direction
from seqdfo.verify import merit_eta, merit_values


def _reference_direct_search(problem, c, theta, gamma, delta0, budget, seed):
    """Deterministic sufficient-decrease direct search with one random poll.

    Mirrors the stream use of the noiseless optimizer: one direction, then
    two (zero-variance) oracle noise draws per iteration.
    """
    s = RngStream(seed)
    x = np.array(problem.x0, dtype=float)
    delta, calls, steps = delta0, 0, []
    while calls + 2 <= budget:
        d = uniform_sphere_direction(s, problem.n)
        s.normal()
        s.normal()
        calls += 2
        ok = problem(x) - problem(x + delta * d) >= c * delta**2
        steps.append((delta, ok))
        if ok:
            x = x + delta * d
            delta *= gamma
        else:
            delta *= theta
    return x, steps


@pytest.mark.parametrize("name", ["sphere", "rosenbrock_ext", "tridia"])
@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("kind", list(TestKind))
def test_noiseless_run_is_deterministic_direct_search(name, seed, kind):
    p = builtin_problem(name, 3)
    cfg = SearchConfig(test_kind=kind, budget=600, sigma2_f=0.0)
    trace = run_direct_search(cfg, p, RngStream(seed))
    x_ref, steps = _reference_direct_search(p, 0.5, 0.95, 1.3, 1.0, 600, seed)
    assert [(r.delta_k, r.accepted) for r in trace.records] == steps
    assert np.array_equal(trace.x_final, x_ref)
    assert all(r.accepted == r.sufficient_decrease for r in trace.records)
    assert all(r.samples_m == 1 and not r.capped for r in trace.records)


def test_same_seed_identical_trace():
    p = builtin_problem("arwhead", 5)
    cfg = SearchConfig(sigma2_f=1.0, budget=5000)
    assert run_direct_search(cfg, p, RngStream(9)).fingerprint() == run_direct_search(cfg, p, RngStream(9)).fingerprint()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 3000), st.sampled_from([0.0, 0.01, 1.0]),
       st.sampled_from(list(TestKind)), st.sampled_from(["calls", "draws"]))
def test_budget_never_exceeded(seed, budget, sigma2, kind, unit):
    p = builtin_problem("sphere", 2)
    cfg = SearchConfig(test_kind=kind, budget=budget, sigma2_f=sigma2, budget_unit=unit)
    trace = run_direct_search(cfg, p, RngStream(seed))
    limit = budget if unit == "calls" else 2 * budget
    assert trace.oracle_calls <= limit
    assert trace.oracle_calls == 2 * sum(r.samples_m for r in trace.records)
    calls = [r.oracle_calls_cum for r in trace.records]
    assert calls == sorted(calls)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.0, 0.01, 1.0]), st.sampled_from(list(TestKind)))
def test_stepsize_and_iterate_updates(seed, sigma2, kind):
    p = builtin_problem("rosenbrock_ext", 2)
    cfg = SearchConfig(test_kind=kind, budget=3000, sigma2_f=sigma2)
    trace = run_direct_search(cfg, p, RngStream(seed))
    recs = trace.records
    for a, b in zip(recs, recs[1:]):
        factor = cfg.gamma if a.accepted else cfg.theta
        assert b.delta_k == a.delta_k * factor
        if not a.accepted:
            assert np.array_equal(a.x_k, b.x_k)
        else:
            assert np.linalg.norm(b.x_k - a.x_k) == pytest.approx(a.delta_k, rel=1e-12)
            assert b.true_f == a.trial_true_f
    hist = trace.best_true_f_by_calls
    assert hist[0] == (0, p.f0)
    assert all(h1[0] >= h0[0] and h1[1] < h0[1] for h0, h1 in zip(hist, hist[1:]))


def test_fixed_test_sample_count_follows_accuracy():
    p = builtin_problem("sphere", 2)
    cfg = SearchConfig(test_kind=TestKind.FIXED_SAMPLE, budget=10**6, sigma2_f=0.01)
    trace = run_direct_search(cfg, p, RngStream(3))
    for r in trace.records:
        C = accuracy_level(0.5, 0.95, 1.3, r.delta_k)
        assert r.samples_m == math.ceil(0.02 / C**2)


def test_sequential_cap_respects_budget():
    p = builtin_problem("sphere", 2)
    cfg = SearchConfig(budget=10_000, sigma2_f=1.0)
    trace = run_direct_search(cfg, p, RngStream(4))
    for r in trace.records:
        C = accuracy_level(0.5, 0.95, 1.3, r.delta_k)
        assert r.samples_m <= 10 * math.ceil(2.0 / C**2)
    assert trace.sigma2_y == 2.0


def test_fixed_solver_stops_before_unaffordable_test():
    p = builtin_problem("sphere", 2)
    cfg = SearchConfig(test_kind=TestKind.FIXED_SAMPLE, budget=10_000, sigma2_f=1.0)
    trace = run_direct_search(cfg, p, RngStream(0))
    # m = ceil(2 / C^2) at delta = 1 is about 2088 draws, two oracle calls each
    assert len(trace.records) == 2
    assert trace.oracle_calls <= 10_000
    assert not any(r.capped for r in trace.records)


def test_iteration_limit_and_empty_budget():
    p = builtin_problem("sphere", 2)
    t = run_direct_search(SearchConfig(budget=10**6, max_iter=5), p, RngStream(0))
    assert len(t.records) == 5 and t.terminated_reason is TerminationReason.ITERATION_LIMIT
    t = run_direct_search(SearchConfig(budget=1), p, RngStream(0))
    assert t.records == [] and t.terminated_reason is TerminationReason.BUDGET_EXHAUSTED
    assert t.best_true_f == p.f0


def test_stepsize_underflow():
    # a constant objective never passes the decrease test, so every iteration contracts
    p0 = Problem(name="flat", n=1, eval=lambda x: 0.0, x0=np.zeros(1))
    t = run_direct_search(SearchConfig(budget=10**7, delta0=1e-148), p0, RngStream(0))
    assert t.terminated_reason is TerminationReason.STEPSIZE_UNDERFLOW
    assert t.delta_final < 1e-150


def test_noiseless_sphere_regression():
    p = builtin_problem("sphere", 2)
    bests = [run_direct_search(SearchConfig(budget=10_000), p, RngStream(s)).best_true_f for s in range(10)]
    assert sum(b < 0.2 for b in bests) >= 9


@pytest.mark.parametrize("seed", range(5))
def test_merit_function_decreases_without_noise(seed):
    p = builtin_problem("quad_illcond", 4)
    trace = run_direct_search(SearchConfig(budget=4000), p, RngStream(seed))
    phi = merit_values(trace, 0.0, merit_eta(0.5, 0.95, 1.3))
    assert np.all(np.diff(phi) < 0.0)


@pytest.mark.parametrize("field,value,condition", [
    ("theta", 1.0, "theta"),
    ("theta", 0.0, "theta"),
    ("gamma", 1.0, "gamma"),
    ("delta0", 0.0, "delta0"),
    ("c", -1.0, "c"),
    ("gamma", 1.05, "stepsize_drift"),
    ("sigma2_f", -1.0, "sigma2_f"),
    ("budget", -1, "budget"),
    ("budget_unit", "evals", "budget_unit"),
    ("cap_factor", 0, "cap_factor"),
    ("test_kind", "st", "test_kind"),
])
def test_config_validation(field, value, condition):
    with pytest.raises(ConfigError) as exc:
        validate_config(SearchConfig(**{field: value}))
    assert exc.value.condition == condition


def test_default_parameters_satisfy_drift_condition():
    validate_config(SearchConfig())
    assert 3 * math.log(1.3) + 11 * math.log(0.95) > 0.0


def test_accuracy_level_formula():
    # c delta^2 (1 - theta^2) / (2 (gamma^2 - theta^2)) at the defaults
    assert accuracy_level(0.5, 0.95, 1.3, 1.0) == pytest.approx(0.5 * 0.0975 / (2 * 0.7875), rel=1e-14)
    assert accuracy_level(0.5, 0.95, 1.3, 0.5) == pytest.approx(accuracy_level(0.5, 0.95, 1.3, 1.0) / 4, rel=1e-14)
