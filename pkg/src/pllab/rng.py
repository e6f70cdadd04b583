"""Deterministic random numbers for every stochastic operation.

The generator is xoshiro256** (Blackman & Vigna) seeded through splitmix64;
both are xorshift-family generators with well-known reference semantics.
Every stochastic solver and estimator takes an explicit 64-bit seed, and
uniform index selection uses rejection sampling so there is no modulo bias.

The jitted kernels in ``_kernels`` re-implement the identical integer
update, so the index stream produced for a given seed is bit-for-bit the
same under both execution backends (see ``tests/test_rng.py``).
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1

_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MULT1 = 0xBF58476D1CE4E5B9
_SM_MULT2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output word)."""
    state = (state + _SM_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SM_MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _SM_MULT2) & MASK64
    return state, z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into the four xoshiro256** state words."""
    s = seed & MASK64
    out = np.empty(4, dtype=np.uint64)
    for i in range(4):
        s, v = splitmix64(s)
        out[i] = v
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** stream with explicit seed and rejection-sampled indices."""

    __slots__ = ("seed", "_s")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        s = self.seed
        st = []
        for _ in range(4):
            s, v = splitmix64(s)
            st.append(v)
        self._s = st

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def next_index(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection: no modulo bias."""
        if n <= 0:
            raise ValueError("next_index needs n >= 1")
        r = ((MASK64 % n) + 1) % n  # 2**64 mod n
        lim = MASK64 - r            # accept u <= lim
        while True:
            u = self.next_u64()
            if u <= lim:
                return u % n

    def next_unit(self) -> float:
        """Uniform float64 in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_normal(self) -> float:
        """Standard normal via Box-Muller (one fresh pair per call, cosine leg)."""
        u1 = self.next_unit()
        u2 = self.next_unit()
        # guard log(0); 2**-53 keeps the magnitude finite
        if u1 <= 0.0:
            u1 = 2.0 ** -53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def uniform_vector(self, lo, hi, d: int) -> np.ndarray:
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (d,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (d,))
        out = np.empty(d)
        for i in range(d):
            out[i] = lo[i] + (hi[i] - lo[i]) * self.next_unit()
        return out

    def normal_vector(self, d: int) -> np.ndarray:
        return np.array([self.next_normal() for _ in range(d)])


def trial_seed(base_seed: int, trial: int) -> int:
    """Seed of the ``trial``-th independent repeat: base + trial mod 2**64."""
    return (base_seed + trial) & MASK64
