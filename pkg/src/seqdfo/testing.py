"""Sequential and fixed-sample tests of ``H0: mu <= 0`` against ``H1: mu > 0``.

The sequential test accumulates i.i.d. observations until the running sum
reaches the upper boundary (decide H1) or the lower boundary (decide H0).
The lower boundary is checked first, so with coinciding boundaries a sum
exactly on them decides H0, matching the fixed-sample rule ``sum <= 0``.

Samplers are any object with ``draw(stream) -> float``. Samplers that also
provide ``walk(stream, lower, upper, cap, record)`` get the compiled fast
path for constant boundaries; it consumes the stream exactly like the
generic loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ._backend import kernels
from .errors import ParameterError
from .stochastics import RngStream, gaussian

E = math.e

#: Multiple of the fixed sample size used as the default sequential cap.
DEFAULT_CAP_FACTOR = 10


class Hypothesis(enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class HypothesisDecision:
    accepted: Hypothesis
    samples_used: int
    final_sum: float
    capped: bool = False

    def __post_init__(self):
        if self.samples_used < 1:
            raise ParameterError("samples_used must be >= 1")


class BoundaryKind(enum.Enum):
    CONSTANT_SYMMETRIC = "constant_symmetric"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class BoundarySchedule:
    """Upper boundaries ``a_l`` and lower boundaries ``b_l``, l = 1..cap.

    Use :meth:`constant_symmetric` or :meth:`explicit` to build one.
    ``c0 == 0`` is allowed for noiseless observations, where the first draw
    decides by its sign.
    """

    kind: BoundaryKind
    cap: int
    c0: float = 0.0
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        if int(self.cap) < 1:
            raise ParameterError(f"cap must be >= 1, got {self.cap}")
        if self.kind is BoundaryKind.CONSTANT_SYMMETRIC:
            if not self.c0 >= 0.0 or math.isinf(self.c0):
                raise ParameterError(f"c0 must be finite and >= 0, got {self.c0}")
        else:
            if len(self.a) != len(self.b):
                raise ParameterError("boundary sequences differ in length")
            if len(self.a) < self.cap:
                raise ParameterError("boundary sequences shorter than cap")
            for l, (al, bl) in enumerate(zip(self.a, self.b), start=1):
                if not al >= bl:
                    raise ParameterError(f"a_{l} = {al} < b_{l} = {bl}")

    @classmethod
    def constant_symmetric(cls, c0: float, cap: int) -> "BoundarySchedule":
        return cls(BoundaryKind.CONSTANT_SYMMETRIC, int(cap), c0=float(c0))

    @classmethod
    def explicit(cls, a: Sequence[float], b: Sequence[float], cap: Optional[int] = None):
        a = tuple(float(v) for v in a)
        b = tuple(float(v) for v in b)
        return cls(BoundaryKind.EXPLICIT, len(a) if cap is None else int(cap), a=a, b=b)

    def upper(self, l: int) -> float:
        if self.kind is BoundaryKind.CONSTANT_SYMMETRIC:
            return self.c0
        return self.a[l - 1]

    def lower(self, l: int) -> float:
        if self.kind is BoundaryKind.CONSTANT_SYMMETRIC:
            return -self.c0
        return self.b[l - 1]


@dataclass(frozen=True)
class TestTranscript:
    decision: HypothesisDecision
    partial_sums: tuple

    __test__ = False  # not a pytest class


class GaussianSampler:
    """Y ~ N(mu, sigma2)."""

    def __init__(self, mu: float, sigma2: float):
        if not sigma2 >= 0.0:
            raise ParameterError(f"sigma2 must be >= 0, got {sigma2}")
        self.mu = float(mu)
        self.sigma2 = float(sigma2)
        self.sd = math.sqrt(self.sigma2)

    def draw(self, stream: RngStream) -> float:
        return gaussian(stream, self.mu, self.sd)

    def walk(self, stream, lower, upper, cap, record=None):
        return kernels.gaussian_walk(stream, self.mu, self.sd, lower, upper, cap, record)


class ConstantSampler:
    """Deterministic Y; consumes no randomness."""

    def __init__(self, value: float):
        self.value = float(value)

    def draw(self, stream: RngStream) -> float:
        return self.value


def c_accurate_boundary(sigma2: float, C: float) -> float:
    """Smallest constant boundary ``sigma2 / (2 e C)`` giving C-accuracy."""
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    return sigma2 / (2.0 * E * C)


def fixed_sample_size(sigma2: float, C: float) -> int:
    """``ceil(sigma2 / C**2)`` samples for the fixed-sample test."""
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    ratio = sigma2 / C / C
    if not math.isfinite(ratio):
        raise ParameterError(f"fixed sample size overflows for C = {C}")
    return max(1, math.ceil(ratio))


def default_cap(sigma2: float, C: float) -> int:
    return DEFAULT_CAP_FACTOR * fixed_sample_size(sigma2, C)


def c_accurate_schedule(sigma2: float, C: float, cap: Optional[int] = None) -> BoundarySchedule:
    """Constant symmetric boundaries at ``c_accurate_boundary(sigma2, C)``."""
    c0 = c_accurate_boundary(sigma2, C)
    return BoundarySchedule.constant_symmetric(c0, default_cap(sigma2, C) if cap is None else cap)


def _capped_decision(total: float) -> Hypothesis:
    # truncated walk: H0 only on a strictly negative sum
    return Hypothesis.H0 if total < 0.0 else Hypothesis.H1


def _walk(sampler, schedule: BoundarySchedule, stream, record):
    cap = schedule.cap
    if schedule.kind is BoundaryKind.CONSTANT_SYMMETRIC and hasattr(sampler, "walk"):
        return sampler.walk(stream, -schedule.c0, schedule.c0, cap, record)
    total = 0.0
    for l in range(1, cap + 1):
        total += sampler.draw(stream)
        if record is not None:
            record.append(total)
        if total <= schedule.lower(l):
            return kernels.H0, l, total
        if total >= schedule.upper(l):
            return kernels.H1, l, total
    return kernels.CAPPED, cap, total


def _decision(code: int, m: int, total: float) -> HypothesisDecision:
    if code == kernels.H0:
        return HypothesisDecision(Hypothesis.H0, int(m), float(total))
    if code == kernels.H1:
        return HypothesisDecision(Hypothesis.H1, int(m), float(total))
    return HypothesisDecision(_capped_decision(total), int(m), float(total), capped=True)


def sequential_decision(sampler, schedule: BoundarySchedule, stream: RngStream) -> HypothesisDecision:
    """Run the sequential test without recording partial sums."""
    return _decision(*_walk(sampler, schedule, stream, None))


def run_sequential_test(sampler, schedule: BoundarySchedule, stream: RngStream) -> TestTranscript:
    """Draw until the running sum crosses a boundary or the cap is hit.

    At the cap the test decides H0 iff the running sum is negative and marks
    the decision ``capped``.
    """
    record: list = []
    decision = _decision(*_walk(sampler, schedule, stream, record))
    return TestTranscript(decision, tuple(record))


def fixed_decision(sampler, m: int, stream: RngStream) -> HypothesisDecision:
    if int(m) < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    return _fixed(sampler, int(m), stream, None)


def _fixed(sampler, m, stream, record):
    inf = math.inf
    if hasattr(sampler, "walk"):
        _, steps, total = sampler.walk(stream, -inf, inf, m, record)
    else:
        total = 0.0
        for _ in range(m):
            total += sampler.draw(stream)
            if record is not None:
                record.append(total)
        steps = m
    accepted = Hypothesis.H0 if total <= 0.0 else Hypothesis.H1
    return HypothesisDecision(accepted, int(steps), float(total))


def run_fixed_test(sampler, m: int, stream: RngStream) -> TestTranscript:
    """Draw exactly ``m`` samples; decide H0 iff their sum is <= 0."""
    if int(m) < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    record: list = []
    decision = _fixed(sampler, int(m), stream, record)
    return TestTranscript(decision, tuple(record))


def fixed_as_sequential_schedule(m: int) -> BoundarySchedule:
    """Boundaries under which the sequential test reproduces the fixed test."""
    inf = math.inf
    a = [inf] * (m - 1) + [0.0]
    b = [-inf] * (m - 1) + [0.0]
    return BoundarySchedule.explicit(a, b)


def wald_expected_sample_size(mu: float, sigma2: float, C: float) -> float:
    """Brownian approximation of the expected sequential sample size.

    ``(sigma2 / (2 e C mu)) * (e^x - 1) / (e^x + 1)`` with ``x = mu / (e C)``,
    evaluated as ``(sigma2 / (2 e^2 C^2)) * tanh(x / 2) / x`` so neither tiny
    nor huge ``mu`` overflows. Near ``mu == 0`` this tends to
    ``sigma2 / (4 e^2 C^2)``.
    """
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    x = mu / (E * C)
    # tanh(x/2)/x = 1/2 - x^2/24 + ...; exact to rounding below 1e-8
    ratio = 0.5 if abs(x) < 1e-8 else math.tanh(0.5 * x) / x
    return sigma2 / (2.0 * E * E * C * C) * ratio


def sample_size_bound(mu: float, sigma2: float, C: float) -> float:
    """``(sigma2 / (4 e^2 C^2)) * min(1, e C / |mu|)``.

    For ``|mu| > e C`` this falls below :func:`wald_expected_sample_size`
    (by a factor approaching 2 as ``|mu|`` grows, since ``tanh`` tends to 1);
    :func:`wald_sample_size_bound` is the dominating version.
    """
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    base = sigma2 / (4.0 * E * E * C * C)
    if mu == 0.0:
        return base
    return base * min(1.0, E * C / abs(mu))


def wald_sample_size_bound(mu: float, sigma2: float, C: float) -> float:
    """``(sigma2 / (4 e^2 C^2)) * min(1, 2 e C / |mu|)``.

    Dominates :func:`wald_expected_sample_size` for every ``mu``: the first
    branch uses ``tanh(x/2) <= x/2``, the second ``tanh <= 1``.
    """
    if not (sigma2 > 0.0 and C > 0.0):
        raise ParameterError(f"sigma2 and C must be positive, got {sigma2}, {C}")
    base = sigma2 / (4.0 * E * E * C * C)
    if mu == 0.0:
        return base
    return base * min(1.0, 2.0 * E * C / abs(mu))
