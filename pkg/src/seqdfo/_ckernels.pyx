# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Operation-for-operation twin of ``_pykernels``; see that module for the
semantics. Built with ``-ffp-contract=off`` so no fused multiply-adds change
the rounding relative to the Python path.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

BACKEND = "cython"

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

H0 = 0
H1 = 1
CAPPED = 2

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef double _TWO_POW_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mix64(z):
    """SplitMix64 finalizer (Stafford variant 13)."""
    return _mix64(<uint64_t>(int(z) & MASK64))


cdef class RngStream:
    """SplitMix64 generator with a cached polar-method Gaussian."""

    cdef public uint64_t state
    cdef public bint has_spare
    cdef public double spare

    def __init__(self, seed=0):
        self.state = <uint64_t>(int(seed) & MASK64)
        self.has_spare = False
        self.spare = 0.0

    cdef inline uint64_t _next(self) noexcept nogil:
        self.state += _GAMMA
        return _mix64(self.state)

    cdef inline double _uniform(self) noexcept nogil:
        return <double>(self._next() >> 11) * _TWO_POW_M53

    cdef inline double _normal(self) noexcept nogil:
        cdef double u, v, s, f
        if self.has_spare:
            self.has_spare = False
            return self.spare
        while True:
            u = 2.0 * self._uniform() - 1.0
            v = 2.0 * self._uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = sqrt(-2.0 * log(s) / s)
        self.spare = v * f
        self.has_spare = True
        return u * f

    def next_u64(self):
        return self._next()

    def uniform(self):
        """Uniform double on [0, 1) with 53 random bits."""
        return self._uniform()

    def normal(self):
        """Standard normal draw (Marsaglia polar method, spare cached)."""
        return self._normal()

    def normals(self, k):
        cdef Py_ssize_t i, kk = int(k)
        cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(kk, dtype=np.float64)
        for i in range(kk):
            out[i] = self._normal()
        return out

    def getstate(self):
        return (int(self.state), bool(self.has_spare), float(self.spare))

    def setstate(self, st):
        self.state = <uint64_t>(int(st[0]) & MASK64)
        self.has_spare = bool(st[1])
        self.spare = float(st[2])

    def copy(self):
        other = RngStream(0)
        other.setstate(self.getstate())
        return other

    def __reduce__(self):
        return (_rebuild, (self.getstate(),))

    def __repr__(self):
        return f"RngStream(state={self.state:#018x}, has_spare={bool(self.has_spare)})"


def _rebuild(st):
    s = RngStream(0)
    s.setstate(st)
    return s


def sphere_directions(RngStream stream, n, count):
    cdef Py_ssize_t nn = int(n), cc = int(count), r, j
    cdef double g, ss, norm
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((cc, nn), dtype=np.float64)
    for r in range(cc):
        while True:
            ss = 0.0
            for j in range(nn):
                g = stream._normal()
                out[r, j] = g
                ss += g * g
            norm = sqrt(ss)
            if norm >= 1e-300:
                break
        for j in range(nn):
            out[r, j] = out[r, j] / norm
    return out


cdef inline int _gaussian_walk(RngStream stream, double mu, double sd, double lower,
                               double upper, int64_t cap, int64_t *steps,
                               double *total, list record):
    cdef int64_t m
    cdef double s = 0.0
    for m in range(1, cap + 1):
        s += mu + sd * stream._normal()
        if record is not None:
            record.append(s)
        if s <= lower:
            steps[0] = m
            total[0] = s
            return 0
        if s >= upper:
            steps[0] = m
            total[0] = s
            return 1
    steps[0] = cap
    total[0] = s
    return 2


def gaussian_walk(RngStream stream, double mu, double sd, double lower, double upper,
                  cap, record=None):
    cdef int64_t steps = 0
    cdef double total = 0.0
    cdef int code = _gaussian_walk(stream, mu, sd, lower, upper, <int64_t>cap,
                                   &steps, &total, record)
    return code, steps, total


def decrease_walk(RngStream stream, double cdd, double fx, double fxd, double sd,
                  double lower, double upper, cap, record=None):
    cdef int64_t m, c = <int64_t>cap
    cdef double s = 0.0, fx_noisy, fxd_noisy
    cdef list rec = record
    for m in range(1, c + 1):
        fx_noisy = fx + (0.0 + sd * stream._normal())
        fxd_noisy = fxd + (0.0 + sd * stream._normal())
        s += cdd - (fx_noisy - fxd_noisy)
        if rec is not None:
            rec.append(s)
        if s <= lower:
            return 0, m, s
        if s >= upper:
            return 1, m, s
    return 2, c, s


def gaussian_walk_batch(RngStream stream, double mu, double sd, double lower,
                        double upper, cap, trials):
    cdef Py_ssize_t t, tt = int(trials)
    cdef int64_t steps = 0
    cdef double total = 0.0
    cdef cnp.ndarray[cnp.int8_t, ndim=1] codes = np.empty(tt, dtype=np.int8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ms = np.empty(tt, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] totals = np.empty(tt, dtype=np.float64)
    for t in range(tt):
        codes[t] = _gaussian_walk(stream, mu, sd, lower, upper, <int64_t>cap,
                                  &steps, &total, None)
        ms[t] = steps
        totals[t] = total
    return codes, ms, totals


def renewal_times(RngStream stream, double a, double b, double p, trials,
                  bint from_ceiling, max_steps):
    cdef Py_ssize_t t, tt = int(trials)
    cdef int64_t k, kmax = <int64_t>max_steps
    cdef double z, w, nz
    cdef bint hit
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(tt, dtype=np.int64)
    for t in range(tt):
        z = 0.0 if from_ceiling else b
        k = 0
        hit = False
        while k < kmax:
            w = a if stream._uniform() < p else b
            k += 1
            if from_ceiling:
                nz = z + w
                z = 0.0 if 0.0 < nz else nz
                if z == 0.0:
                    hit = True
                    break
            else:
                z = z + w
                if z >= 0.0:
                    hit = True
                    break
        out[t] = k if hit else -1
    return out
