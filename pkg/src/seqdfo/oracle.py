"""Benchmark objectives, the additive Gaussian noise oracle, and the
decrease observable ``Y = c delta^2 - (F(x, xi_x) - F(x + delta d, xi_d))``.

The catalog is a native reimplementation of a few classic unconstrained
test functions (standard start points, known optimal values where closed
form). Noise is additive, homoscedastic and Gaussian; the variance of one
``Y`` draw is twice the per-evaluation variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import kernels
from .errors import CatalogError, ParameterError
from .stochastics import RngStream, gaussian


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    n: int
    eval: Callable[[np.ndarray], float]
    x0: np.ndarray
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    f_star: Optional[float] = None

    def __call__(self, x) -> float:
        return self.eval(x)

    @property
    def f0(self) -> float:
        return self.eval(self.x0)


@dataclass(frozen=True)
class GaussianNoiseModel:
    sigma2_f: float = 0.0

    def __post_init__(self):
        if not self.sigma2_f >= 0.0:
            raise ParameterError(f"sigma2_f must be >= 0, got {self.sigma2_f}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.sigma2_f)

    @property
    def sigma2_y(self) -> float:
        """Variance of one decrease observation (two independent calls)."""
        return 2.0 * self.sigma2_f


@dataclass
class OracleCounter:
    """Number of noisy oracle calls made in one run."""

    calls: int = 0


def _as_point(problem: Problem, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise ParameterError(f"{problem.name}: expected a point of length {problem.n}, got shape {x.shape}")
    return x


def noisy_eval(problem: Problem, noise: GaussianNoiseModel, x, stream: RngStream,
               counter: Optional[OracleCounter] = None) -> float:
    """One call to the stochastic oracle: ``f(x) + N(0, sigma2_f)``."""
    x = _as_point(problem, x)
    value = problem.eval(x) + gaussian(stream, 0.0, noise.sd)
    if counter is not None:
        counter.calls += 1
    return value


@dataclass
class DecreaseObservable:
    """Sampler of the decrease observable at trial point ``x + delta * d``."""

    problem: Problem
    noise: GaussianNoiseModel
    x: np.ndarray
    d: np.ndarray
    delta: float
    c: float
    counter: OracleCounter = field(default_factory=OracleCounter)

    def __post_init__(self):
        self.x = _as_point(self.problem, self.x)
        self.d = _as_point(self.problem, self.d)
        if not (self.delta > 0.0 and self.c > 0.0):
            raise ParameterError("delta and c must be positive")
        self.trial = self.x + self.delta * self.d
        self.cdd = self.c * self.delta * self.delta
        self.fx = self.problem.eval(self.x)
        self.fxd = self.problem.eval(self.trial)

    @property
    def mean(self) -> float:
        return self.cdd - (self.fx - self.fxd)

    @property
    def variance(self) -> float:
        return self.noise.sigma2_y

    def draw(self, stream: RngStream) -> float:
        f_x = noisy_eval(self.problem, self.noise, self.x, stream, self.counter)
        f_d = noisy_eval(self.problem, self.noise, self.trial, stream, self.counter)
        return self.cdd - (f_x - f_d)

    def walk(self, stream, lower, upper, cap, record=None):
        code, m, total = kernels.decrease_walk(
            stream, self.cdd, self.fx, self.fxd, self.noise.sd, lower, upper, cap, record
        )
        self.counter.calls += 2 * int(m)
        return code, m, total


def draw_Y(observable: DecreaseObservable, stream: RngStream) -> float:
    return observable.draw(stream)


# -- catalog -----------------------------------------------------------------

def _sphere(x):
    return float(x @ x)


def _sphere_grad(x):
    return 2.0 * x


def _quad_illcond(x):
    i = np.arange(1, x.size + 1)
    return float(np.sum(i * x * x))


def _quad_illcond_grad(x):
    return 2.0 * np.arange(1, x.size + 1) * x


def _rosenbrock(x):
    a, b = x[:-1], x[1:]
    return float(np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2))


def _rosenbrock_grad(x):
    a, b = x[:-1], x[1:]
    r = b - a * a
    g = np.zeros_like(x)
    g[:-1] += -400.0 * a * r - 2.0 * (1.0 - a)
    g[1:] += 200.0 * r
    return g


def _arwhead(x):
    a, last = x[:-1], x[-1]
    q = a * a + last * last
    return float(np.sum(q * q - 4.0 * a + 3.0))


def _arwhead_grad(x):
    a, last = x[:-1], x[-1]
    q = a * a + last * last
    g = np.empty_like(x)
    g[:-1] = 4.0 * q * a - 4.0
    g[-1] = float(np.sum(4.0 * q * last))
    return g


def _dqrtic(x):
    return float(np.sum((x - np.arange(1, x.size + 1)) ** 4))


def _dqrtic_grad(x):
    return 4.0 * (x - np.arange(1, x.size + 1)) ** 3


def _tridia(x):
    i = np.arange(2, x.size + 1)
    return float((x[0] - 1.0) ** 2 + np.sum(i * (2.0 * x[1:] - x[:-1]) ** 2))


def _tridia_grad(x):
    i = np.arange(2, x.size + 1)
    r = 2.0 * x[1:] - x[:-1]
    g = np.zeros_like(x)
    g[0] = 2.0 * (x[0] - 1.0)
    g[1:] += 4.0 * i * r
    g[:-1] -= 2.0 * i * r
    return g


def _engval1(x):
    q = x[:-1] ** 2 + x[1:] ** 2
    return float(np.sum(q * q - 4.0 * x[:-1] + 3.0))


def _engval1_grad(x):
    a, b = x[:-1], x[1:]
    q = a * a + b * b
    g = np.zeros_like(x)
    g[:-1] += 4.0 * q * a - 4.0
    g[1:] += 4.0 * q * b
    return g


def _cosine_chain(x):
    return float(np.sum(np.cos(-0.5 * x[1:] + x[:-1] ** 2)))


def _cosine_chain_grad(x):
    s = -np.sin(-0.5 * x[1:] + x[:-1] ** 2)
    g = np.zeros_like(x)
    g[:-1] += 2.0 * x[:-1] * s
    g[1:] += -0.5 * s
    return g


def _alternating_start(n):
    x0 = np.ones(n)
    x0[0::2] = -1.2
    return x0


# name -> (f, grad, min_n, x0(n), f_star(n))
_CATALOG = {
    "sphere": (_sphere, _sphere_grad, 1, np.ones, lambda n: 0.0),
    "quad_illcond": (_quad_illcond, _quad_illcond_grad, 1, np.ones, lambda n: 0.0),
    "rosenbrock_ext": (_rosenbrock, _rosenbrock_grad, 2, _alternating_start, lambda n: 0.0),
    "arwhead": (_arwhead, _arwhead_grad, 2, np.ones, lambda n: 0.0),
    "dqrtic": (_dqrtic, _dqrtic_grad, 1, lambda n: np.full(n, 2.0), lambda n: 0.0),
    "tridia": (_tridia, _tridia_grad, 1, np.ones, lambda n: 0.0),
    "engval1": (_engval1, _engval1_grad, 2, lambda n: np.full(n, 2.0), lambda n: None),
    "cosine_chain": (_cosine_chain, _cosine_chain_grad, 2, np.ones, lambda n: -(n - 1.0)),
}

CATALOG_NAMES = tuple(_CATALOG)


def builtin_problem(name: str, n: int) -> Problem:
    """Catalog problem ``name`` in dimension ``n``."""
    try:
        f, grad, min_n, start, f_star = _CATALOG[name]
    except KeyError:
        raise CatalogError(f"unknown problem {name!r}; known: {', '.join(CATALOG_NAMES)}") from None
    if not isinstance(n, (int, np.integer)) or n < min_n:
        raise CatalogError(f"{name} requires an integer n >= {min_n}, got {n!r}")
    n = int(n)
    x0 = np.asarray(start(n), dtype=np.float64)
    x0.setflags(write=False)
    return Problem(name=name, n=n, eval=f, x0=x0, grad=grad, f_star=f_star(n))
