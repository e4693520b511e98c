"""Deterministic 64-bit PRNG used everywhere a seed appears.

The generator is xoshiro256** (Blackman & Vigna), state initialized from the
seed via splitmix64.  Constants are fixed here so corpora, fold assignments
and training shuffles reproduce bit-for-bit across platforms and across
reimplementations; ``random.Random`` is deliberately not used because its
state-setup is CPython-specific.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

# splitmix64 constants
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MUL1 = 0xBF58476D1CE4E5B9
_SM_MUL2 = 0x94D049BB133111EB

# xoshiro256** output constants
_STAR_MUL1 = 5
_STAR_ROT = 7
_STAR_MUL2 = 9


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def splitmix64_stream(seed: int, n: int) -> list[int]:
    """First ``n`` outputs of splitmix64 starting from ``seed``."""
    out = []
    state = seed & _MASK64
    for _ in range(n):
        state = (state + _SM_GAMMA) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * _SM_MUL1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM_MUL2) & _MASK64
        out.append(z ^ (z >> 31))
    return out


class Rng:
    """xoshiro256** seeded via splitmix64."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = splitmix64_stream(seed, 4)
        if all(x == 0 for x in self._s):  # all-zero state is a fixed point
            self._s[0] = _SM_GAMMA

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * _STAR_MUL1) & _MASK64, _STAR_ROT) * _STAR_MUL2) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        out = list(range(n))
        self.shuffle(out)
        return out
