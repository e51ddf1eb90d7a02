"""Portable deterministic random number generation.

Every stochastic operator in this package draws from SplitMix64, a fixed
64-bit generator chosen so that outputs are reproducible bit-for-bit across
platforms and across reimplementations in other languages.  The OS RNG is
never consulted.  The full update rule, for a 64-bit state ``s`` (all
arithmetic modulo 2**64):

    s     = s + 0x9E3779B97F4A7C15
    z     = s
    z     = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z     = (z XOR (z >> 27)) * 0x94D049BB133111EB
    output= z XOR (z >> 31)

Derived draws are defined on top of ``next_u64``:

* ``below(n)`` -- unbiased integer in ``[0, n)`` by rejection sampling:
  draws are discarded while ``draw >= 2**64 - (2**64 % n)``, then reduced
  modulo ``n``.
* ``uniform()`` -- float in ``[0, 1)`` as ``(next_u64() >> 11) * 2**-53``.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit unsigned integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        if seed < 0 or seed > _MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def sample_distinct(self, n: int, k: int) -> list[int]:
        """``k`` distinct integers from ``[0, n)``, without replacement.

        Partial Fisher-Yates over a virtual ``range(n)``; consumes exactly
        the draws needed by ``k`` calls of :meth:`below`.
        """
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        swapped: dict[int, int] = {}
        picks = []
        for i in range(k):
            j = i + self.below(n - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            picks.append(vj)
            swapped[j] = vi
        return picks
