"""Deterministic, splittable random streams for reproducible experiments.

Seed derivation and generation are fully specified so that a master seed
pins every byte of experiment output regardless of worker count:

* ``mix64`` is the splitmix64 finalizer (Steele, Lea, Flood 2014).
* ``derive_seed(master, i_1, ..., i_m)`` absorbs each index with one
  splitmix64 round: ``s <- mix64((s + GAMMA) xor i)``.
* ``Stream`` steps ``state <- state + GAMMA`` and outputs ``mix64(state)``;
  uniforms take the top 53 bits; Gaussians use Marsaglia's polar rejection
  on pairs of uniforms (second value cached); Poisson counts use product
  inversion for mean <= 30 and Hormann's PTRS transformed rejection above.

Frozen test vectors live in the test suite; same-platform runs are
bit-exact (the Gaussian/Poisson paths call libm log/sqrt).
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Counter-style derivation of a child seed from a master seed."""
    s = master & MASK64
    for ix in indices:
        s = (s + GAMMA) & MASK64
        s = mix64(s ^ (ix & MASK64))
    return s


class Stream:
    """Sequential generator over the splitmix64 output function."""

    __slots__ = ("state", "_gauss_spare")

    def __init__(self, seed: int):
        self.state = seed & MASK64
        self._gauss_spare = None

    def u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.u64() >> 11) * (2.0 ** -53)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by top-bits rejection (unbiased)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        k = (n - 1).bit_length()
        if k == 0:
            return 0
        while True:
            r = self.u64() >> (64 - k)
            if r < n:
                return r

    def u64_array(self, count: int) -> np.ndarray:
        """Vectorized batch equal to ``count`` sequential :meth:`u64` calls."""
        idx = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(GAMMA)
        z = np.uint64(self.state) + idx
        self.state = int(z[-1]) if count else self.state
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def below_array(self, n: int, count: int) -> np.ndarray:
        """Vectorized batch equal to ``count`` sequential :meth:`below` calls
        (identical values and identical stream consumption)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        k = (n - 1).bit_length()
        out = np.empty(count, dtype=np.int64)
        if k == 0:
            out[:] = 0
            return out
        start_state = self.state
        consumed = 0
        filled = 0
        while filled < count:
            need = count - filled
            chunk = max(64, need + need // 2)
            cand = (self.u64_array(chunk) >> np.uint64(64 - k)).astype(np.int64)
            ok = cand[cand < n]
            take = min(len(ok), need)
            out[filled:filled + take] = ok[:take]
            filled += take
            if take == need:
                # rewind to the draw that produced the last accepted value
                accept_pos = np.nonzero(cand < n)[0]
                used = int(accept_pos[take - 1]) + 1
                consumed += used
                self.state = (start_state + consumed * GAMMA) & MASK64
                break
            consumed += chunk
        return out

    def gauss(self) -> float:
        """Standard normal variate by the polar rejection method."""
        spare = self._gauss_spare
        if spare is not None:
            self._gauss_spare = None
            return spare
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                f = math.sqrt(-2.0 * math.log(s) / s)
                self._gauss_spare = v * f
                return u * f

    def poisson(self, mean: float) -> int:
        if not mean > 0.0:
            raise ValueError("poisson mean must be positive")
        if mean <= 30.0:
            return self._poisson_inversion(mean)
        return self._poisson_ptrs(mean)

    def _poisson_inversion(self, mean: float) -> int:
        limit = math.exp(-mean)
        k = 0
        p = 1.0
        while True:
            p *= self.uniform()
            if p <= limit:
                return k
            k += 1

    def _poisson_ptrs(self, mean: float) -> int:
        # Hormann (1993), "The transformed rejection method for generating
        # Poisson random variables", algorithm PTRS.
        b = 0.931 + 2.53 * math.sqrt(mean)
        a = -0.059 + 0.02483 * b
        inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
        v_r = 0.9277 - 3.6224 / (b - 2.0)
        log_mean = math.log(mean)
        while True:
            u = self.uniform() - 0.5
            v = self.uniform()
            us = 0.5 - abs(u)
            k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
            if us >= 0.07 and v <= v_r:
                return int(k)
            if k < 0 or (us < 0.013 and v > us):
                continue
            lhs = math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
            rhs = k * log_mean - mean - math.lgamma(k + 1.0)
            if lhs <= rhs:
                return int(k)
