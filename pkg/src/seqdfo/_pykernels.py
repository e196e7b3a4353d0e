"""Pure-Python kernels.

Reference implementation of the hot loops. ``_ckernels.pyx`` mirrors every
function here operation for operation, so both backends produce bitwise
identical draws, walks and decisions from the same stream state.
"""

import math

import numpy as np

BACKEND = "python"

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_POW_M53 = 1.0 / 9007199254740992.0

# walk outcome codes
H0 = 0
H1 = 1
CAPPED = 2


def mix64(z):
    """SplitMix64 finalizer (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """SplitMix64 generator with a cached polar-method Gaussian.

    The 64-bit state walks a Weyl sequence with increment ``GOLDEN_GAMMA``
    (period 2**64); each output is ``mix64(state)``.
    """

    __slots__ = ("state", "has_spare", "spare")

    def __init__(self, seed=0):
        self.state = int(seed) & MASK64
        self.has_spare = False
        self.spare = 0.0

    def next_u64(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self):
        """Uniform double on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_POW_M53

    def normal(self):
        """Standard normal draw (Marsaglia polar method, spare cached)."""
        if self.has_spare:
            self.has_spare = False
            return self.spare
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self.spare = v * f
        self.has_spare = True
        return u * f

    def normals(self, k):
        out = np.empty(int(k), dtype=np.float64)
        for i in range(out.shape[0]):
            out[i] = self.normal()
        return out

    def getstate(self):
        return (self.state, self.has_spare, self.spare)

    def setstate(self, st):
        self.state = int(st[0]) & MASK64
        self.has_spare = bool(st[1])
        self.spare = float(st[2])

    def copy(self):
        other = RngStream(0)
        other.setstate(self.getstate())
        return other

    def __reduce__(self):
        return (_rebuild, (self.getstate(),))

    def __repr__(self):
        return f"RngStream(state={self.state:#018x}, has_spare={self.has_spare})"


def _rebuild(st):
    s = RngStream(0)
    s.setstate(st)
    return s


def sphere_directions(stream, n, count):
    """``count`` unit vectors in R^n, each a normalized Gaussian vector."""
    n = int(n)
    out = np.empty((int(count), n), dtype=np.float64)
    row = [0.0] * n
    for r in range(out.shape[0]):
        while True:
            ss = 0.0
            for j in range(n):
                g = stream.normal()
                row[j] = g
                ss += g * g
            norm = math.sqrt(ss)
            if norm >= 1e-300:
                break
        for j in range(n):
            out[r, j] = row[j] / norm
    return out


def gaussian_walk(stream, mu, sd, lower, upper, cap, record=None):
    """Random walk with N(mu, sd^2) increments between constant boundaries.

    Returns ``(code, steps, total)`` where code is H0 (sum <= lower), H1
    (sum >= upper, checked second) or CAPPED.
    """
    total = 0.0
    for m in range(1, int(cap) + 1):
        total += mu + sd * stream.normal()
        if record is not None:
            record.append(total)
        if total <= lower:
            return H0, m, total
        if total >= upper:
            return H1, m, total
    return CAPPED, int(cap), total


def decrease_walk(stream, cdd, fx, fxd, sd, lower, upper, cap, record=None):
    """Walk over Y = cdd - ((fx + e_x) - (fxd + e_d)), e_* ~ N(0, sd^2).

    Each increment consumes two normals, the one at the current point first.
    """
    total = 0.0
    for m in range(1, int(cap) + 1):
        fx_noisy = fx + (0.0 + sd * stream.normal())
        fxd_noisy = fxd + (0.0 + sd * stream.normal())
        total += cdd - (fx_noisy - fxd_noisy)
        if record is not None:
            record.append(total)
        if total <= lower:
            return H0, m, total
        if total >= upper:
            return H1, m, total
    return CAPPED, int(cap), total


def gaussian_walk_batch(stream, mu, sd, lower, upper, cap, trials):
    codes = np.empty(int(trials), dtype=np.int8)
    steps = np.empty(int(trials), dtype=np.int64)
    totals = np.empty(int(trials), dtype=np.float64)
    for t in range(codes.shape[0]):
        codes[t], steps[t], totals[t] = gaussian_walk(stream, mu, sd, lower, upper, cap)
    return codes, steps, totals


def renewal_times(stream, a, b, p, trials, from_ceiling, max_steps):
    """Hitting times of the +a / +b (prob p / 1-p) step process.

    ``from_ceiling=False``: start at b, count steps until the sum is >= 0.
    ``from_ceiling=True``: start at the ceiling 0 with updates
    ``z = min(z + w, 0)``, count steps until z returns to 0.
    Walks exceeding ``max_steps`` are reported as -1.
    """
    out = np.empty(int(trials), dtype=np.int64)
    for t in range(out.shape[0]):
        z = 0.0 if from_ceiling else b
        k = 0
        hit = False
        while k < max_steps:
            w = a if stream.uniform() < p else b
            k += 1
            if from_ceiling:
                z = min(z + w, 0.0)
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
