"""Derivative-free direct search with sequential hypothesis tests for
sufficient decrease under noisy function evaluations.

Submodules: :mod:`~seqdfo.stochastics` (seeded streams, directions),
:mod:`~seqdfo.testing` (sequential and fixed-sample tests),
:mod:`~seqdfo.oracle` (test problems, noise, decrease observable),
:mod:`~seqdfo.search` (the optimizer), :mod:`~seqdfo.verify` (Monte Carlo
and closed-form checks) and :mod:`~seqdfo.bench` (experiments, profiles).
"""

from ._backend import BACKEND
from .errors import AssumptionError, CatalogError, ConfigError, ParameterError, UndefinedQualityError
from .oracle import CATALOG_NAMES, GaussianNoiseModel, Problem, builtin_problem
from .search import RunTrace, SearchConfig, TerminationReason, TestKind, run_direct_search
from .stochastics import RngStream, derive_seed, derive_stream
from .testing import (
    BoundarySchedule,
    Hypothesis,
    HypothesisDecision,
    c_accurate_boundary,
    fixed_sample_size,
    run_fixed_test,
    run_sequential_test,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AssumptionError",
    "CatalogError",
    "ConfigError",
    "ParameterError",
    "UndefinedQualityError",
    "CATALOG_NAMES",
    "GaussianNoiseModel",
    "Problem",
    "builtin_problem",
    "RunTrace",
    "SearchConfig",
    "TerminationReason",
    "TestKind",
    "run_direct_search",
    "RngStream",
    "derive_seed",
    "derive_stream",
    "BoundarySchedule",
    "Hypothesis",
    "HypothesisDecision",
    "c_accurate_boundary",
    "fixed_sample_size",
    "run_fixed_test",
    "run_sequential_test",
]
