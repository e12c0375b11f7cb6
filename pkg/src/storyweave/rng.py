"""Deterministic random number generation.

Reproducibility is a hard contract here: the same (model, seed) must yield
the same scenario bytes on every platform, so we pin a PCG32 generator and
a splitmix64 mixer instead of relying on ``random``'s unspecified details.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1

PCG_MULTIPLIER = 6364136223846793005
DEFAULT_STREAM = 0xDA3E39CB94B95BDB


class Pcg32:
    """PCG32 (XSH RR 64/32) with the reference seeding procedure."""

    def __init__(self, seed: int, stream: int = DEFAULT_STREAM):
        self._inc = (((stream & MASK64) << 1) | 1) & MASK64
        self._state = 0
        self.next_u32()
        self._state = (self._state + (seed & MASK64)) & MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self._state
        self._state = (old * PCG_MULTIPLIER + self._inc) & MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & MASK32

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) for arbitrary-precision bounds.

        Rejection sampling over bit_length-sized draws, so there is no
        modulo bias even for huge run counts.
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        bits = bound.bit_length()
        while True:
            value = self._next_bits(bits)
            if value < bound:
                return value

    def _next_bits(self, bits: int) -> int:
        value = 0
        filled = 0
        while filled < bits:
            value = (value << 32) | self.next_u32()
            filled += 32
        return value >> (filled - bits)

    def choice_index(self, length: int) -> int:
        """Selection rule pinned for the engine: next_u32 mod length."""
        if length <= 0:
            raise ValueError("length must be positive")
        return self.next_u32() % length


def splitmix64(x: int) -> int:
    """Standard splitmix64 step: advance by the golden gamma and mix."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(base_seed: int, index: int) -> int:
    """Per-walk seed for batch sampling: splitmix64 of (seed + index)."""
    return splitmix64((base_seed + index) & MASK64)
