"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line in
the terminal summary. Every stochastic quantity comes from streams derived
from ``MASTER_SEED``; the last test reruns all of them and demands bitwise
equality.
"""

import math
import time

import numpy as np
import pytest

from seqdfo.bench import ExperimentConfig, data_profile, median_t_evals, run_experiment
from seqdfo.oracle import CATALOG_NAMES, builtin_problem
from seqdfo.search import SearchConfig, TestKind, run_direct_search
from seqdfo.stochastics import derive_stream, uniform_sphere_direction
from seqdfo.testing import E, c_accurate_boundary
from seqdfo.verify import (
    RenewalParams,
    check_auxiliary_inequalities,
    check_scaling_law,
    complexity_bound,
    descent_probability,
    estimate_error_probabilities,
    estimate_expected_sample_size,
    first_stationary_iteration,
    fixed_sample_scaling,
    interarrival_from_return,
    renewal_bound,
    simulate_renewal,
)

pytestmark = pytest.mark.acceptance

MASTER_SEED = 0
_RESULTS: dict = {}


def _stream(*keys):
    return derive_stream(MASTER_SEED, *keys)


# -- computations (pure functions of MASTER_SEED) ---------------------------------

def compute_c01():
    assert c_accurate_boundary(1.0, 0.1) == pytest.approx(1.0 / (2 * E * 0.1))
    p1, _ = estimate_error_probabilities(0.0, 1.0, 0.1, TestKind.SEQUENTIAL, 100_000, _stream("c01"))
    return (p1.mean, p1.stderr)


def compute_c02():
    _, p0 = estimate_error_probabilities(E * 0.1, 1.0, 0.1, TestKind.SEQUENTIAL, 100_000, _stream("c02"))
    return (p0.mean, p0.stderr)


def compute_c03():
    coarse = estimate_expected_sample_size(0.0, 1.0, 0.01, 10_000, _stream("c03", "coarse"))
    fine = estimate_expected_sample_size(0.0, 1.0, 0.001, 100_000, _stream("c03", "fine"))
    return (coarse.mean, coarse.stderr, fine.mean, fine.stderr)


DELTAS = (0.5, 0.25, 0.125, 0.0625)


def compute_c04():
    fit = check_scaling_law(1.0, 0.031, 1.0, 1.0, DELTAS, 10_000, _stream("c04"))
    fixed = fixed_sample_scaling(0.031, 1.0, DELTAS)
    return (fit.slope, fixed.slope, fit.mean_samples)


MUS = (-0.2, -0.1, 0.0, 0.1, 0.2)


def compute_c05():
    out = []
    for i, mu in enumerate(MUS):
        p1, _ = estimate_error_probabilities(mu, 1.0, 0.1, TestKind.SEQUENTIAL, 100_000, _stream("c05", i))
        out.append((p1.mean, p1.stderr))
    return tuple(out)


def compute_c06():
    prm = RenewalParams(math.log(1.3), math.log(0.95), 3.0 / 14.0)
    tb, tn = simulate_renewal(prm, 100_000, _stream("c06"))
    lg, lt = math.log(1.3), math.log(0.95)
    prefactor = 14 * lg / (3 * lg + 11 * lt)
    implied = interarrival_from_return(prm, renewal_bound(prm))
    return (renewal_bound(prm), tb.mean, tb.stderr, tn.mean, tn.stderr, implied, prefactor)


def compute_c07():
    rep = check_auxiliary_inequalities(
        grid_A=(1.1, 2.0, 10.0), grid_t=(math.exp(1 / math.e), 1.5, 2.0, 10.0))
    conv = check_auxiliary_inequalities(grid_A=(), grid_t=(1.4,))
    return (len(rep.tanh_ratio_violations), len(rep.power_violations), rep.tanh_ratio_points,
            rep.power_points, len(conv.power_violations))


def compute_c08():
    return tuple(descent_probability(n, 100_000, _stream("c08", n)).mean for n in (2, 10, 100))


def compute_c09():
    mismatches, checked = 0, 0
    for name in ("sphere", "rosenbrock_ext", "arwhead"):
        p = builtin_problem(name, 4)
        for seed in range(3):
            trace = run_direct_search(SearchConfig(sigma2_f=0.0, budget=2000), p, _stream("c09", name, seed))
            # replay the stream to recover each polled direction
            shadow = _stream("c09", name, seed)
            for r in trace.records:
                d = uniform_sphere_direction(shadow, p.n)
                shadow.normal()
                shadow.normal()
                truth = p(r.x_k) - p(r.x_k + r.delta_k * d) >= 0.5 * r.delta_k**2
                mismatches += truth != r.accepted
                checked += 1
    return (mismatches, checked)


def compute_c10():
    cfg = ExperimentConfig(
        master_seed=MASTER_SEED,
        problems=tuple((name, n) for name in CATALOG_NAMES for n in (2, 10)),
        sigma2_f_values=(1.0,),
        reps=10,
        budget=10_000,
    )
    res = run_experiment(cfg, workers=1)
    medians = {}
    for name in CATALOG_NAMES:
        for solver in ("st", "ft"):
            recs = [r for r in res.records if r.problem == name and r.n == 10 and r.solver == solver]
            medians[(name, solver)] = median_t_evals(recs)
    endpoint = cfg.budget / 3.0  # alpha at which alpha (n + 1) covers the budget for n = 2
    prof = data_profile(res.records, [endpoint])
    records = tuple((r.problem, r.n, r.solver, r.seed, r.t_evals, r.best_true_f) for r in res.records)
    return (tuple(sorted(medians.items())), prof["st"].at(endpoint), prof["ft"].at(endpoint), records)


def compute_c11():
    p = builtin_problem("sphere", 2)
    cfg = SearchConfig(sigma2_f=1.0, budget=10**6)
    ts = []
    for seed in range(20):
        t = first_stationary_iteration(run_direct_search(cfg, p, _stream("c11", seed)), p, 0.5)
        ts.append(math.inf if t is None else t)
    return tuple(ts)


COMPUTE = {
    "c01": compute_c01, "c02": compute_c02, "c03": compute_c03, "c04": compute_c04,
    "c05": compute_c05, "c06": compute_c06, "c07": compute_c07, "c08": compute_c08,
    "c09": compute_c09, "c10": compute_c10, "c11": compute_c11,
}


def _run(key):
    t0 = time.perf_counter()
    value = COMPUTE[key]()
    elapsed = time.perf_counter() - t0
    _RESULTS[key] = value
    return value, elapsed


# -- criteria ------------------------------------------------------------------------

def test_c01_symmetric_error_at_zero_mean(record_property):
    (p, se), elapsed = _run("c01")
    record_property("summary", f"P(H1 | mu=0) = {p:.5f} (se {se:.5f}), band [0.485, 0.515], {elapsed:.1f}s")
    assert 0.485 <= p <= 0.515
    assert elapsed < 30


def test_c02_error_bound_at_eC(record_property):
    (p, se), _ = _run("c02")
    limit = math.exp(-1) + 0.01
    record_property("summary", f"P(H0 | mu=eC) = {p:.5f} (se {se:.5f}) <= {limit:.5f}")
    assert p <= limit


def test_c03_expected_sample_size(record_property):
    (m1, se1, m2, se2), elapsed = _run("c03")
    record_property("summary", f"C=0.01: {m1:.2f} (se {se1:.2f}) in [338, 390]; "
                               f"C=0.001: {m2:.1f} (se {se2:.1f}) in [33834, 37217]; {elapsed:.0f}s")
    assert 338.0 <= m1 <= 390.0
    assert 33834.0 <= m2 <= 37217.0
    assert elapsed < 300


def test_c04_scaling_law(record_property):
    (slope, fixed_slope, means), _ = _run("c04")
    record_property("summary", f"sequential slope {slope:.3f} (target -3 +/- 0.3); "
                               f"fixed slope {fixed_slope:.4f} (target -4 +/- 0.05)")
    assert abs(slope + 3.0) <= 0.3
    assert abs(fixed_slope + 4.0) <= 0.05


def test_c05_monotone_acceptance(record_property):
    est, _ = _run("c05")
    slack = [b[0] - a[0] + 3 * math.hypot(a[1], b[1]) for a, b in zip(est, est[1:])]
    record_property("summary", "P(H1) over mu grid " + ", ".join(f"{m:.4f}" for m, _ in est)
                    + f"; min slack {min(slack):.4f}")
    assert all(s >= 0.0 for s in slack)


def test_c06_renewal_reward(record_property):
    (bound, tb, tb_se, tn, tn_se, implied, prefactor), _ = _run("c06")
    p = 3.0 / 14.0
    pred = p + (1 + tb) * (1 - p)
    combined = math.hypot(tn_se, (1 - p) * tb_se)
    record_property("summary", f"E[tau_bar] {tb:.3f} <= {bound:.3f} + 3se; E[tau_n] {tn:.3f} vs {pred:.3f} "
                               f"(3se {3 * combined:.3f}); bound {implied:.4f} vs prefactor {prefactor:.4f}")
    assert bound == pytest.approx(19.704, abs=0.01)
    assert tb <= bound + 3 * tb_se
    assert abs(tn - pred) <= 3 * combined
    assert abs(implied - prefactor) <= 1e-3
    assert prefactor == pytest.approx(16.481, abs=1e-3)


def test_c07_auxiliary_inequalities(record_property):
    (v1, v2, n1, n2, conv), _ = _run("c07")
    record_property("summary", f"violations: tanh ratio {v1}/{n1}, power reciprocal {v2}/{n2}; t=1.4 violations {conv}")
    assert n1 == 3 * 4001 and n2 == 4 * 4901
    assert v1 == 0 and v2 == 0
    assert conv >= 1


def test_c08_descent_probability(record_property):
    probs, _ = _run("c08")
    limit = 3 / 7 - 0.0047
    record_property("summary", "P(kappa >= 1/(7 sqrt n)) for n=2,10,100: "
                    + ", ".join(f"{p:.4f}" for p in probs) + f" >= {limit:.4f}")
    assert all(p >= limit for p in probs)


def test_c09_noiseless_equivalence(record_property):
    (mismatches, checked), _ = _run("c09")
    record_property("summary", f"{mismatches} mismatches over {checked} decisions (3 problems x 3 seeds)")
    assert checked > 0
    assert mismatches == 0


def test_c10_benchmark_direction(record_property):
    (medians, d_st, d_ft, _), elapsed = _run("c10")
    med = dict(medians)
    wins = [name for name in CATALOG_NAMES if med[(name, "st")] < med[(name, "ft")]]
    record_property("summary", f"sequential median smaller on {len(wins)}/8 at n=10 ({', '.join(wins)}); "
                               f"data profile at budget: st {d_st:.3f} vs ft {d_ft:.3f}; {elapsed:.0f}s")
    assert len(wins) >= 6
    assert d_st >= d_ft
    assert elapsed < 600


def test_c11_complexity_bound(record_property):
    ts, _ = _run("c11")
    mean_t = float(np.mean(ts))
    lg, lt = math.log(1.3), math.log(0.95)
    # independent evaluation: sphere n=2 has L = 2, f0 - f* = 2
    bound = 1 + (14 * lg / (3 * lg + 11 * lt)) * ((0.7875 * 2 + 0.5) / (0.25 * 0.0975 * 0.9025)) \
        * ((7 * 2 + 14 * 0.5) ** 2 / 4) * (2 / 0.5**2)
    formula = complexity_bound(0.5, 0.95, 1.3, 2.0, 2.0, 1.0, 2, 0.5)
    record_property("summary", f"mean T_eps {mean_t:.2f} over 20 seeds <= {formula:.4g}")
    assert formula == pytest.approx(bound, rel=1e-12)
    assert mean_t <= formula


def test_c12_bitwise_determinism(record_property):
    differing = []
    for key in COMPUTE:
        first = _RESULTS[key] if key in _RESULTS else COMPUTE[key]()
        if repr(COMPUTE[key]()) != repr(first):
            differing.append(key)
    record_property("summary", f"{len(COMPUTE)} criteria recomputed; differing: {differing or 'none'}")
    assert not differing
