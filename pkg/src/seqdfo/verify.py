"""Monte Carlo and closed-form checks of the test's and the search's
analytical properties.

Every estimator takes an explicit stream; results are reproducible from the
seed. Statistical claims are judged against 3-standard-error bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._backend import kernels
from .errors import AssumptionError, ParameterError
from .oracle import Problem
from .search import RunTrace, TestKind, validate_config, SearchConfig
from .stochastics import RngStream, derive_stream, uniform_sphere_directions
from .testing import (
    E,
    c_accurate_boundary,
    default_cap,
    fixed_sample_size,
    sample_size_bound,
    wald_expected_sample_size,
    wald_sample_size_bound,
)

MIN_TRIALS = 100
#: (C, factor) allowances for boundary overshoot against the Brownian-limit sizes.
OVERSHOOT_MARGINS = ((0.01, 1.3), (0.001, 1.1))
RENEWAL_MAX_STEPS = 10**8
#: Oracle-call budget per run when measuring iterations to stationarity.
COMPLEXITY_BUDGET = 10**6


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int

    def __post_init__(self):
        if self.trials < MIN_TRIALS:
            raise ParameterError(f"Monte Carlo estimates need >= {MIN_TRIALS} trials, got {self.trials}")

    @classmethod
    def from_samples(cls, samples) -> "McEstimate":
        x = np.asarray(samples, dtype=np.float64)
        n = x.size
        if n < MIN_TRIALS:
            raise ParameterError(f"Monte Carlo estimates need >= {MIN_TRIALS} trials, got {n}")
        return cls(float(x.mean()), float(x.std(ddof=1) / math.sqrt(n)), int(n))

    def band(self, k: float = 3.0) -> tuple[float, float]:
        return self.mean - k * self.stderr, self.mean + k * self.stderr


def _check_mc_args(sigma2, C, trials):
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    if int(trials) < MIN_TRIALS:
        raise ParameterError(f"need >= {MIN_TRIALS} trials, got {trials}")


def _gaussian_tests(mu, sigma2, C, kind, trials, stream):
    sd = math.sqrt(sigma2)
    if kind is TestKind.SEQUENTIAL:
        c0 = c_accurate_boundary(sigma2, C)
        codes, steps, totals = kernels.gaussian_walk_batch(
            stream, mu, sd, -c0, c0, default_cap(sigma2, C), trials
        )
        h0 = (codes == kernels.H0) | ((codes == kernels.CAPPED) & (totals < 0.0))
    else:
        m = fixed_sample_size(sigma2, C)
        codes, steps, totals = kernels.gaussian_walk_batch(
            stream, mu, sd, -math.inf, math.inf, m, trials
        )
        h0 = totals <= 0.0
    return h0, steps


def estimate_error_probabilities(mu: float, sigma2: float, C: float, kind: TestKind,
                                 trials: int, stream: RngStream):
    """Acceptance frequencies ``(P(H1), P(H0))`` for Y ~ N(mu, sigma2).

    The sequential test uses the C-accurate boundary and the default cap; the
    fixed test uses ``fixed_sample_size(sigma2, C)`` draws.
    """
    _check_mc_args(sigma2, C, trials)
    h0, _ = _gaussian_tests(mu, sigma2, C, kind, int(trials), stream)
    h0 = h0.astype(np.float64)
    return McEstimate.from_samples(1.0 - h0), McEstimate.from_samples(h0)


def estimate_expected_sample_size(mu: float, sigma2: float, C: float, trials: int,
                                  stream: RngStream) -> McEstimate:
    """Mean number of draws used by the C-accurate sequential test."""
    _check_mc_args(sigma2, C, trials)
    _, steps = _gaussian_tests(mu, sigma2, C, TestKind.SEQUENTIAL, int(trials), stream)
    return McEstimate.from_samples(steps)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    deltas: tuple
    mean_samples: tuple


def _check_grid(delta_grid):
    grid = np.asarray(sorted(float(d) for d in delta_grid))
    if grid.size < 4 or grid[0] <= 0.0 or grid[-1] / grid[0] < 8.0:
        raise ParameterError("delta grid needs >= 4 positive points spanning >= 8x")
    return grid


def _fit(grid, means):
    slope, intercept = np.polyfit(np.log(grid), np.log(means), 1)
    return ScalingFit(float(slope), float(intercept), tuple(grid.tolist()), tuple(means))


def check_scaling_law(r: float, s: float, c: float, sigma2: float, delta_grid,
                      trials: int, stream: RngStream) -> ScalingFit:
    """Fit log(mean sample size) against log(delta).

    At each delta the sequential test runs with accuracy ``C = s delta^2`` on
    Gaussian observations of mean ``c * delta**r``.
    """
    if not 0.0 < r <= 2.0:
        raise ParameterError(f"r must lie in (0, 2], got {r}")
    grid = _check_grid(delta_grid)
    means = []
    for delta in grid:
        est = estimate_expected_sample_size(c * delta**r, sigma2, s * delta * delta, trials, stream)
        means.append(est.mean)
    return _fit(grid, means)


def fixed_sample_scaling(s: float, sigma2: float, delta_grid) -> ScalingFit:
    """Same fit for the fixed test, whose size is deterministic."""
    grid = _check_grid(delta_grid)
    return _fit(grid, [float(fixed_sample_size(sigma2, s * d * d)) for d in grid])


# -- renewal-reward process ---------------------------------------------------

@dataclass(frozen=True)
class RenewalParams:
    """Step process taking +a with probability p and b < 0 otherwise."""

    a: float
    b: float
    p: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b < 0.0 and 0.0 < self.p < 1.0):
            raise ParameterError(f"need a > 0, b < 0, 0 < p < 1; got {self}")
        if not self.drift > 0.0:
            raise AssumptionError(f"positive drift required, p (a - b) + b = {self.drift:.6g}")

    @property
    def drift(self) -> float:
        return self.p * (self.a - self.b) + self.b

    @classmethod
    def from_stepsize(cls, theta: float, gamma: float, p: float = 3.0 / 14.0) -> "RenewalParams":
        return cls(math.log(gamma), math.log(theta), p)


def renewal_bound(params: RenewalParams) -> float:
    """Upper bound ``(a - b) / (p a - p b + b)`` on the mean return time from b."""
    return (params.a - params.b) / (params.p * params.a - params.p * params.b + params.b)


def interarrival_from_return(params: RenewalParams, tau_bar: float) -> float:
    """Mean interarrival time ``p + (1 + tau_bar)(1 - p)``."""
    return params.p + (1.0 + tau_bar) * (1.0 - params.p)


def simulate_renewal(params: RenewalParams, trials: int, stream: RngStream):
    """Estimate the return time from b and the interarrival time at the ceiling."""
    if int(trials) < MIN_TRIALS:
        raise ParameterError(f"need >= {MIN_TRIALS} trials, got {trials}")
    a, b, p = params.a, params.b, params.p
    tau_bar = kernels.renewal_times(stream, a, b, p, int(trials), False, RENEWAL_MAX_STEPS)
    tau_n = kernels.renewal_times(stream, a, b, p, int(trials), True, RENEWAL_MAX_STEPS)
    if (tau_bar < 0).any() or (tau_n < 0).any():
        raise RuntimeError(f"renewal walk exceeded {RENEWAL_MAX_STEPS} steps")
    return McEstimate.from_samples(tau_bar), McEstimate.from_samples(tau_n)


# -- auxiliary inequalities --------------------------------------------------

TANH_RATIO_A = (1.1, 2.0, 10.0)
POWER_T = (math.exp(1.0 / math.e), 1.5, 2.0, 10.0)
INEQ_RTOL = 1e-12


def _grid(lo, hi, step):
    k = int(round((hi - lo) / step))
    return lo + step * np.arange(k + 1)


@dataclass
class InequalityReport:
    tanh_ratio_points: int = 0
    power_points: int = 0
    tanh_ratio_violations: list = field(default_factory=list)
    power_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.tanh_ratio_violations and not self.power_violations


def tanh_ratio_gap(A: float, x: float) -> float:
    """``log(A)/2 - (A^x - 1) / (x (A^x + 1))``; zero at ``x = 0`` by continuity.

    The ratio is evaluated as ``tanh(x log(A) / 2) / x``, which avoids the
    cancellation in ``A^x - 1`` near ``A = 1`` and overflow for large ``x``.
    """
    if x == 0.0:
        return 0.0
    half = 0.5 * math.log(A)
    return half - math.tanh(x * half) / x


def power_reciprocal_gap(t: float, x: float) -> float:
    """``1/x - 1/t^x``."""
    return 1.0 / x - 1.0 / t**x


def check_auxiliary_inequalities(grid_A: Iterable[float] = TANH_RATIO_A,
                                grid_t: Iterable[float] = POWER_T,
                                grid_x1: Optional[Sequence[float]] = None,
                                grid_x2: Optional[Sequence[float]] = None) -> InequalityReport:
    """Evaluate both auxiliary inequalities pointwise and collect violations.

    A point violates when its gap is below ``-1e-12`` times the right-hand
    side's magnitude (rounding slack near the tight points).
    """
    x1 = _grid(-20.0, 20.0, 0.01) if grid_x1 is None else np.asarray(grid_x1, dtype=float)
    x2 = _grid(1.0, 50.0, 0.01) if grid_x2 is None else np.asarray(grid_x2, dtype=float)
    rep = InequalityReport()
    for A in grid_A:
        if not A > 1.0:
            raise ParameterError(f"A must exceed 1, got {A}")
        tol = INEQ_RTOL * math.log(A) / 2.0
        for x in x1:
            rep.tanh_ratio_points += 1
            if tanh_ratio_gap(A, float(x)) < -tol:
                rep.tanh_ratio_violations.append((A, float(x)))
    for t in grid_t:
        if not t > 0.0:
            raise ParameterError(f"t must be positive, got {t}")
        for x in x2:
            rep.power_points += 1
            if power_reciprocal_gap(t, float(x)) < -INEQ_RTOL / float(x):
                rep.power_violations.append((t, float(x)))
    return rep


# -- search-level quantities ---------------------------------------------------

def descent_probability(n: int, draws: int, stream: RngStream, tau: float = 1.0 / 7.0) -> McEstimate:
    """Frequency of ``kappa >= tau / sqrt(n)`` for uniform directions.

    Uses the gradient ``e_1``, so ``kappa = -d_1`` (any fixed gradient gives
    the same law by rotation invariance).
    """
    dirs = uniform_sphere_directions(stream, n, draws)
    hits = (-dirs[:, 0] >= tau / math.sqrt(n)).astype(np.float64)
    return McEstimate.from_samples(hits)


def stationarity_threshold(L_f: float, c: float, n: int, eps: float) -> float:
    """Stepsize below which a good direction yields sufficient decrease."""
    return 2.0 / (7.0 * L_f + 14.0 * c) * eps / math.sqrt(n)


def complexity_bound(c: float, theta: float, gamma: float, L_f: float,
                     f0_minus_fstar: float, delta0: float, n: int, eps: float) -> float:
    """Closed-form upper bound on the expected iterations to reach ``|grad f| <= eps``."""
    validate_config(SearchConfig(delta0=delta0, c=c, theta=theta, gamma=gamma))
    if not (L_f > 0.0 and eps > 0.0 and f0_minus_fstar >= 0.0 and n >= 1):
        raise ParameterError("need L_f > 0, eps > 0, f0 - f* >= 0, n >= 1")
    lg, lt = math.log(gamma), math.log(theta)
    renewal = 14.0 * lg / (3.0 * lg + 11.0 * lt)
    merit = ((gamma**2 - theta**2) * f0_minus_fstar + c * delta0**2) / (
        0.5 * c * (1.0 - theta**2) * theta**2
    )
    lipschitz = (7.0 * L_f + 14.0 * c) ** 2 / 4.0
    return 1.0 + renewal * merit * lipschitz * n / eps**2


def first_stationary_iteration(trace: RunTrace, problem: Problem, eps: float) -> Optional[int]:
    """First k with ``|grad f(X_k)| <= eps`` along the trace, or None."""
    if problem.grad is None:
        raise ParameterError(f"{problem.name} has no analytic gradient")
    for rec in trace.records:
        if np.linalg.norm(problem.grad(rec.x_k)) <= eps:
            return rec.k
    if trace.x_final is not None and np.linalg.norm(problem.grad(trace.x_final)) <= eps:
        return len(trace.records)
    return None


def merit_values(trace: RunTrace, f_star: float, eta: float) -> np.ndarray:
    """``f(X_k) - f* + eta * Delta_k^2`` for each recorded iteration."""
    return np.array([r.true_f - f_star + eta * r.delta_k**2 for r in trace.records])


def merit_eta(c: float, theta: float, gamma: float) -> float:
    return c / (gamma**2 - theta**2)


# -- claim suites ---------------------------------------------------------------

@dataclass(frozen=True)
class ClaimResult:
    claim_id: str
    statistic: float
    band: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.claim_id}: statistic={self.statistic:.6g} band={self.band}"


SUITES = ("testing", "renewal", "inequalities", "descent", "complexity")


def _suite_testing(trials, seed):
    out = []
    sigma2, C = 1.0, 0.1

    p1, _ = estimate_error_probabilities(0.0, sigma2, C, TestKind.SEQUENTIAL, trials,
                                         derive_stream(seed, "testing", "symmetry"))
    band = 3.0 * math.sqrt(0.25 / trials)
    out.append(ClaimResult("testing.symmetry_mu0", p1.mean, f"0.5 +/- {band:.4g}",
                           abs(p1.mean - 0.5) <= band))

    mu = E * C
    _, p0 = estimate_error_probabilities(mu, sigma2, C, TestKind.SEQUENTIAL, trials,
                                         derive_stream(seed, "testing", "error_bound"))
    limit = math.exp(-1.0) + 3.0 * p0.stderr
    out.append(ClaimResult("testing.error_bound_mu_eC", p0.mean, f"<= {limit:.6g}", p0.mean <= limit))

    from statistics import NormalDist

    _, f0 = estimate_error_probabilities(0.2, sigma2, C, TestKind.FIXED_SAMPLE, trials,
                                         derive_stream(seed, "testing", "fixed_error"))
    target = NormalDist().cdf(-2.0)
    lo, hi = target - 3.0 * f0.stderr, target + 3.0 * f0.stderr
    out.append(ClaimResult("testing.fixed_error_mu0.2", f0.mean, f"[{lo:.6g}, {hi:.6g}]",
                           lo <= f0.mean <= hi))

    probs = []
    for i, m in enumerate((-0.2, -0.1, 0.0, 0.1, 0.2)):
        est, _ = estimate_error_probabilities(m, sigma2, C, TestKind.SEQUENTIAL, trials,
                                              derive_stream(seed, "testing", "monotone", i))
        probs.append(est)
    worst = min(b.mean - a.mean + 3.0 * math.hypot(a.stderr, b.stderr) for a, b in zip(probs, probs[1:]))
    out.append(ClaimResult("testing.monotone_P_H1", worst, ">= 0 (min slack over steps)", worst >= 0.0))

    size_trials = max(MIN_TRIALS, trials // 10)
    est = estimate_expected_sample_size(0.0, 1.0, 0.01, size_trials,
                                        derive_stream(seed, "testing", "sample_size"))
    out.append(ClaimResult("testing.sample_size_mu0_C0.01", est.mean, "[338, 390]",
                           338.0 <= est.mean <= 390.0))
    est = estimate_expected_sample_size(0.0, 1.0, 0.001, trials,
                                        derive_stream(seed, "testing", "sample_size_fine"))
    out.append(ClaimResult("testing.sample_size_mu0_C0.001", est.mean, "[33834, 37217]",
                           33834.0 <= est.mean <= 37217.0))
    for C, margin in OVERSHOOT_MARGINS:
        for i, mult in enumerate((0.0, 1.0, 5.0, 20.0)):
            mu = mult * E * C
            est = estimate_expected_sample_size(mu, 1.0, C, max(MIN_TRIALS, trials // 100),
                                                derive_stream(seed, "testing", "dominance", C, i))
            limit = margin * wald_sample_size_bound(mu, 1.0, C)
            out.append(ClaimResult(f"testing.sample_size_bound_C{C}_mu{mult:g}eC", est.mean,
                                   f"<= {limit:.6g}", est.mean <= limit))
    # the min(1, eC/|mu|) form undercuts the Wald size by a factor tending to 2
    mu = 20.0 * E * 0.01
    ratio = wald_expected_sample_size(mu, 1.0, 0.01) / sample_size_bound(mu, 1.0, 0.01)
    out.append(ClaimResult("testing.literal_bound_second_branch_ratio", ratio, "[1.9, 2.0]",
                           1.9 <= ratio <= 2.0))
    return out


def _suite_renewal(trials, seed):
    out = []
    default = RenewalParams.from_stepsize(0.95, 1.3)
    bound = renewal_bound(default)
    out.append(ClaimResult("renewal.bound_value", bound, "19.704 +/- 0.01", abs(bound - 19.704) <= 0.01))
    sets = [("default", default), ("unit", RenewalParams(1.0, -1.0, 0.75)),
            ("skew", RenewalParams(0.5, -0.2, 0.5))]
    for name, prm in sets:
        tb, tn = simulate_renewal(prm, trials, derive_stream(seed, "renewal", name))
        b = renewal_bound(prm)
        out.append(ClaimResult(f"renewal.{name}.tau_bar_bound", tb.mean, f"<= {b:.6g} + 3se",
                               tb.mean <= b + 3.0 * tb.stderr))
        pred = interarrival_from_return(prm, tb.mean)
        se = math.hypot(tn.stderr, (1.0 - prm.p) * tb.stderr)
        out.append(ClaimResult(f"renewal.{name}.interarrival_identity", tn.mean,
                               f"{pred:.6g} +/- {3 * se:.4g}", abs(tn.mean - pred) <= 3.0 * se))
    lg, lt = math.log(1.3), math.log(0.95)
    implied = interarrival_from_return(default, bound)
    target = 14.0 * lg / (3.0 * lg + 11.0 * lt)
    out.append(ClaimResult("renewal.prefactor_identity", implied, f"{target:.6g} +/- 1e-3",
                           abs(implied - target) <= 1e-3))
    return out


def _suite_inequalities(trials, seed):
    rep = check_auxiliary_inequalities()
    out = [
        ClaimResult("inequalities.tanh_ratio", float(len(rep.tanh_ratio_violations)), "== 0 violations",
                    not rep.tanh_ratio_violations),
        ClaimResult("inequalities.power_reciprocal", float(len(rep.power_violations)), "== 0 violations",
                    not rep.power_violations),
    ]
    conv = check_auxiliary_inequalities(grid_A=(), grid_t=(1.4,))
    out.append(ClaimResult("inequalities.power_converse_t1.4", float(len(conv.power_violations)),
                           ">= 1 violation", bool(conv.power_violations)))
    return out


def _suite_descent(trials, seed):
    out = []
    for n in (2, 10, 100):
        est = descent_probability(n, trials, derive_stream(seed, "descent", n))
        lo = 3.0 / 7.0 - 3.0 * math.sqrt(0.25 / trials)
        out.append(ClaimResult(f"descent.n{n}", est.mean, f">= {lo:.6g}", est.mean >= lo))
    return out


def _suite_complexity(trials, seed):
    from .oracle import builtin_problem
    from .search import run_direct_search

    problem = builtin_problem("sphere", 2)
    bound = complexity_bound(0.5, 0.95, 1.3, 2.0, problem.f0, 1.0, 2, 0.5)
    cfg = SearchConfig(sigma2_f=1.0, budget=COMPLEXITY_BUDGET)
    hits = []
    for rep in range(20):
        trace = run_direct_search(cfg, problem, derive_stream(seed, "complexity", rep))
        t = first_stationary_iteration(trace, problem, 0.5)
        hits.append(math.inf if t is None else t)
    mean_t = float(np.mean(hits))
    return [ClaimResult("complexity.T_eps_sphere2", mean_t, f"<= {bound:.6g}", mean_t <= bound)]


_SUITE_FUNCS = {
    "testing": _suite_testing,
    "renewal": _suite_renewal,
    "inequalities": _suite_inequalities,
    "descent": _suite_descent,
    "complexity": _suite_complexity,
}


def run_suite(name: str, trials: int = 100_000, seed: int = 0) -> list[ClaimResult]:
    """Run a named verification suite (or ``"all"``) and return its claims."""
    if int(trials) < MIN_TRIALS:
        raise ParameterError(f"need >= {MIN_TRIALS} trials, got {trials}")
    names = SUITES if name == "all" else (name,)
    results = []
    for suite in names:
        try:
            func = _SUITE_FUNCS[suite]
        except KeyError:
            raise ParameterError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}") from None
        results.extend(func(int(trials), int(seed)))
    return results


def report_text(results: Sequence[ClaimResult]) -> str:
    return "\n".join(r.line() for r in results)


def report_csv(results: Sequence[ClaimResult]) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["claim_id", "statistic", "band", "pass"])
    for r in results:
        w.writerow([r.claim_id, repr(r.statistic), r.band, "pass" if r.passed else "fail"])
    return buf.getvalue()
