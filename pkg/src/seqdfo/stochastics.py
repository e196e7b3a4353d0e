"""Deterministic random streams and direction sampling.

Every stochastic operation in the package takes an explicit
:class:`RngStream`. The generator is SplitMix64 (64-bit state, period 2**64)
and Gaussians come from the Marsaglia polar method with one cached spare.

Independent streams are derived from ``(master_seed, *keys)`` by
:func:`derive_seed`::

    h = mix64(master_seed)
    for key in keys:
        h = mix64((h ^ key64(key)) + GOLDEN_GAMMA)

where ``mix64`` is the SplitMix64 finalizer and ``key64`` maps an integer to
itself mod 2**64 and anything else to the first 8 bytes (little endian) of
BLAKE2b over ``repr(key)``.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from ._backend import kernels
from ._pykernels import GOLDEN_GAMMA, MASK64, mix64
from .errors import ParameterError, UndefinedQualityError

RngStream = kernels.RngStream


def _key64(key) -> int:
    if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
        return int(key) & MASK64
    digest = hashlib.blake2b(repr(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, *keys) -> int:
    """Mix a master seed and a key path into a 64-bit stream seed."""
    h = mix64(int(master_seed) & MASK64)
    for key in keys:
        h = mix64(((h ^ _key64(key)) + GOLDEN_GAMMA) & MASK64)
    return h


def derive_stream(master_seed: int, *keys) -> RngStream:
    return RngStream(derive_seed(master_seed, *keys))


def gaussian(stream: RngStream, mean: float, sd: float) -> float:
    """One draw from N(mean, sd**2); ``sd == 0`` returns ``mean`` exactly.

    A standard normal is consumed even when ``sd == 0`` so stream alignment
    does not depend on the noise level.
    """
    if not sd >= 0.0:
        raise ParameterError(f"sd must be >= 0, got {sd}")
    return mean + sd * stream.normal()


def uniform_sphere_direction(stream: RngStream, n: int) -> np.ndarray:
    """Uniform random unit vector in R^n."""
    if n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    return kernels.sphere_directions(stream, n, 1)[0]


def uniform_sphere_directions(stream: RngStream, n: int, count: int) -> np.ndarray:
    """``count`` i.i.d. directions as rows; same draws as repeated single calls."""
    if n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    return kernels.sphere_directions(stream, n, count)


def descent_quality(gradient, d) -> float:
    """Cosine between the steepest-descent direction and ``d``.

    Returns ``-g.d / (|g| |d|)`` clipped to [-1, 1].
    """
    g = np.asarray(gradient, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        raise UndefinedQualityError("descent quality is undefined for a zero gradient")
    dnorm = float(np.linalg.norm(d))
    if dnorm == 0.0:
        raise ParameterError("direction must be nonzero")
    kappa = -float(g @ d) / (gnorm * dnorm)
    return min(1.0, max(-1.0, kappa))


def descent_threshold(n: int, tau: float = 1.0 / 7.0) -> float:
    """Quality level ``tau / sqrt(n)`` a direction must reach to count as descent."""
    return tau / math.sqrt(n)
