"""Portable seeded random streams.

xoshiro256** seeded through splitmix64. Uniforms take the top 53 bits of a
draw; gaussians use Box-Muller with one cosine sample per pair of uniforms,
so the exact sequence can be reproduced by any implementation.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** generator.

    >>> Xoshiro256(1).next_u64() == Xoshiro256(1).next_u64()
    True
    """

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self.s = [sm.next() for _ in range(4)]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def gaussian(self) -> float:
        u1 = 1.0 - self.uniform()  # (0, 1], safe for log
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def uniform_array(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        vals = [low + (high - low) * self.uniform() for _ in range(n)]
        return np.array(vals, dtype=np.float64).reshape(shape)

    def normal_array(self, shape, scale: float = 1.0) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        vals = [scale * self.gaussian() for _ in range(n)]
        return np.array(vals, dtype=np.float64).reshape(shape)

    def init_weight(self, fan_in: int, *shape) -> np.ndarray:
        """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
        bound = 1.0 / math.sqrt(fan_in)
        return self.uniform_array(shape, -bound, bound)

    def choice(self, n: int, k: int) -> list[int]:
        """``k`` distinct indices from ``range(n)`` (partial Fisher-Yates)."""
        idx = list(range(n))
        k = min(k, n)
        for i in range(k):
            j = i + self.next_u64() % (n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]


def prng(seed: int) -> Xoshiro256:
    return Xoshiro256(seed)
