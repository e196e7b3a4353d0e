"""Probabilistic-descent direct search with a tested sufficient-decrease rule.

Each iteration polls one uniformly random unit direction ``d`` and tests
whether ``f(x) - f(x + delta d) >= c delta^2`` by sampling the decrease
observable at accuracy ``C_k = c delta^2 (1 - theta^2) / (2 (gamma^2 - theta^2))``.
Accepting H0 takes the step and expands ``delta`` by ``gamma``; H1 keeps the
iterate and contracts by ``theta``.

The noise variance is assumed known. Noiseless values of ``f`` are logged
for analysis only and never reach the algorithm or the budget.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .oracle import DecreaseObservable, GaussianNoiseModel, OracleCounter, Problem
from .stochastics import RngStream, uniform_sphere_direction
from .testing import (
    DEFAULT_CAP_FACTOR,
    BoundarySchedule,
    E,
    Hypothesis,
    fixed_decision,
    sequential_decision,
)

#: Runs stop once the stepsize falls below this value.
STEPSIZE_FLOOR = 1e-150


class TestKind(enum.Enum):
    SEQUENTIAL = "st"
    FIXED_SAMPLE = "ft"

    __test__ = False


class TerminationReason(enum.Enum):
    BUDGET_EXHAUSTED = "BudgetExhausted"
    STEPSIZE_UNDERFLOW = "StepsizeUnderflow"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SearchConfig:
    """Algorithm parameters.

    ``budget`` counts noisy oracle calls (two per decrease observation) when
    ``budget_unit == "calls"``, or decrease observations when it is
    ``"draws"``.
    """

    delta0: float = 1.0
    c: float = 0.5
    theta: float = 0.95
    gamma: float = 1.3
    test_kind: TestKind = TestKind.SEQUENTIAL
    budget: int = 10_000
    sigma2_f: float = 0.0
    budget_unit: str = "calls"
    cap_factor: int = DEFAULT_CAP_FACTOR
    max_iter: Optional[int] = None


def validate_config(config: SearchConfig) -> None:
    """Raise :class:`ConfigError` naming the first failed condition."""
    if not 0.0 < config.theta < 1.0:
        raise ConfigError("theta", f"theta must lie in (0, 1), got {config.theta}")
    if not config.gamma > 1.0:
        raise ConfigError("gamma", f"gamma must exceed 1, got {config.gamma}")
    if not config.delta0 > 0.0:
        raise ConfigError("delta0", f"delta0 must be positive, got {config.delta0}")
    if not config.c > 0.0:
        raise ConfigError("c", f"c must be positive, got {config.c}")
    drift = 3.0 * math.log(config.gamma) + 11.0 * math.log(config.theta)
    if not drift > 0.0:
        raise ConfigError(
            "stepsize_drift",
            f"3 log(gamma) + 11 log(theta) = {drift:.6g} must be positive",
        )
    if not config.sigma2_f >= 0.0:
        raise ConfigError("sigma2_f", f"sigma2_f must be >= 0, got {config.sigma2_f}")
    if int(config.budget) < 0:
        raise ConfigError("budget", f"budget must be >= 0, got {config.budget}")
    if config.budget_unit not in ("calls", "draws"):
        raise ConfigError("budget_unit", f"unknown budget unit {config.budget_unit!r}")
    if int(config.cap_factor) < 1:
        raise ConfigError("cap_factor", "cap_factor must be >= 1")
    if not isinstance(config.test_kind, TestKind):
        raise ConfigError("test_kind", f"unknown test kind {config.test_kind!r}")


def accuracy_level(c: float, theta: float, gamma: float, delta: float) -> float:
    """Test accuracy ``c delta^2 (1 - theta^2) / (2 (gamma^2 - theta^2))``."""
    return c * delta * delta * (1.0 - theta * theta) / (2.0 * (gamma * gamma - theta * theta))


@dataclass(frozen=True, eq=False)
class IterationRecord:
    k: int
    delta_k: float
    x_k: np.ndarray
    true_f: float
    trial_true_f: float
    samples_m: int
    accepted: bool
    capped: bool
    oracle_calls_cum: int
    c_delta2: float = 0.0

    @property
    def sufficient_decrease(self) -> bool:
        """Whether the noiseless trial satisfied the decrease condition.

        Verification channel only; the algorithm never sees it.
        """
        return self.true_f - self.trial_true_f - self.c_delta2 >= 0.0

    def astuple(self) -> tuple:
        return (self.k, self.delta_k, tuple(self.x_k.tolist()), self.true_f,
                self.trial_true_f, self.samples_m, self.accepted, self.capped,
                self.oracle_calls_cum)


@dataclass
class RunTrace:
    problem: str
    n: int
    config: SearchConfig
    records: list = field(default_factory=list)
    #: (oracle calls, best noiseless f among iterates so far), starting at (0, f0)
    best_true_f_by_calls: list = field(default_factory=list)
    terminated_reason: TerminationReason = TerminationReason.BUDGET_EXHAUSTED
    oracle_calls: int = 0
    x_final: Optional[np.ndarray] = None
    delta_final: float = 0.0
    f_final: float = math.nan
    #: convention note: tests use Var(Y) = 2 * sigma2_f
    sigma2_y: float = 0.0

    @property
    def f0(self) -> float:
        return self.best_true_f_by_calls[0][1]

    @property
    def best_true_f(self) -> float:
        return self.best_true_f_by_calls[-1][1]

    def fingerprint(self) -> tuple:
        return (
            tuple(r.astuple() for r in self.records),
            tuple(self.best_true_f_by_calls),
            self.terminated_reason.value,
            self.oracle_calls,
            self.delta_final,
            self.f_final,
        )


def _fixed_draws(sigma2_y: float, C: float) -> float:
    """Fixed-test sample count as a float; ``inf`` on overflow, 1 when noiseless."""
    if sigma2_y == 0.0:
        return 1.0
    ratio = sigma2_y / C / C
    return float(max(1, math.ceil(ratio))) if math.isfinite(ratio) else math.inf


def run_direct_search(config: SearchConfig, problem: Problem, stream: RngStream) -> RunTrace:
    """Run the direct search until the budget (or stepsize) is exhausted."""
    validate_config(config)
    noise = GaussianNoiseModel(config.sigma2_f)
    sigma2_y = noise.sigma2_y
    budget = int(config.budget)

    x = np.array(problem.x0, dtype=np.float64)
    fx = problem.eval(x)
    delta = float(config.delta0)
    counter = OracleCounter()
    trace = RunTrace(problem=problem.name, n=problem.n, config=config, sigma2_y=sigma2_y)
    trace.best_true_f_by_calls.append((0, fx))
    best = fx
    k = 0
    reason = TerminationReason.BUDGET_EXHAUSTED

    while True:
        if config.max_iter is not None and k >= config.max_iter:
            reason = TerminationReason.ITERATION_LIMIT
            break
        if delta < STEPSIZE_FLOOR:
            reason = TerminationReason.STEPSIZE_UNDERFLOW
            break
        if config.budget_unit == "calls":
            affordable = (budget - counter.calls) // 2
        else:
            affordable = budget - counter.calls // 2
        if affordable < 1:
            break
        C = accuracy_level(config.c, config.theta, config.gamma, delta)
        m_fixed = _fixed_draws(sigma2_y, C)
        if config.test_kind is TestKind.FIXED_SAMPLE and m_fixed > affordable:
            break

        d = uniform_sphere_direction(stream, problem.n)
        obs = DecreaseObservable(problem, noise, x, d, delta, config.c, counter)
        if config.test_kind is TestKind.SEQUENTIAL:
            c0 = sigma2_y / (2.0 * E * C) if sigma2_y > 0.0 else 0.0
            cap = int(min(config.cap_factor * m_fixed, affordable))
            decision = sequential_decision(obs, BoundarySchedule.constant_symmetric(c0, cap), stream)
        else:
            decision = fixed_decision(obs, int(m_fixed), stream)
        accepted = decision.accepted is Hypothesis.H0

        trace.records.append(
            IterationRecord(
                k=k,
                delta_k=delta,
                x_k=x,
                true_f=fx,
                trial_true_f=obs.fxd,
                samples_m=decision.samples_used,
                accepted=accepted,
                capped=decision.capped,
                oracle_calls_cum=counter.calls,
                c_delta2=obs.cdd,
            )
        )
        if accepted:
            x = obs.trial
            fx = obs.fxd
            delta *= config.gamma
            if fx < best:
                best = fx
                trace.best_true_f_by_calls.append((counter.calls, best))
        else:
            delta *= config.theta
        k += 1

    trace.terminated_reason = reason
    trace.oracle_calls = counter.calls
    trace.x_final = x
    trace.delta_final = delta
    trace.f_final = fx
    return trace
