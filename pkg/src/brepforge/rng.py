"""Seeded random number generator with a cross-platform draw contract.

Uses the PCG-XSH-RR 32-bit generator (64-bit state, published multiplier
6364136223846793005).  Every derived draw is defined exactly in terms of
successive 32-bit outputs so that a reimplementation in any language
reproduces identical datasets:

  uniform_int(lo, hi) = lo + next_u32() % (hi - lo + 1)
  uniform_index(n)    = next_u32() % n
  unit_float()        = next_u32() / 2**32
"""

from __future__ import annotations

_MULTIPLIER = 6364136223846793005
_MASK64 = (1 << 64) - 1


class SeededRng:
    """PCG32 stream addressed by a (seed, stream) pair.

    One generated sample owns one stream; identical (seed, stream) pairs
    yield identical draw sequences on every platform.
    """

    __slots__ = ("seed", "stream", "_state", "_inc")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & _MASK64
        self.stream = stream & _MASK64
        self._inc = ((self.stream << 1) | 1) & _MASK64
        self._state = 0
        self.next_u32()
        self._state = (self._state + self.seed) & _MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self._state
        self._state = (old * _MULTIPLIER + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def uniform_int(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u32() % (hi - lo + 1)

    def uniform_index(self, n: int) -> int:
        """Uniform index in [0, n)."""
        if n <= 0:
            raise ValueError("uniform_index needs n >= 1")
        return self.next_u32() % n

    def unit_float(self) -> float:
        """Uniform float in [0, 1)."""
        return self.next_u32() / 4294967296.0

    def coin(self) -> bool:
        return bool(self.next_u32() & 1)
