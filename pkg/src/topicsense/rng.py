"""Deterministic 64-bit LCG used by the Gibbs and training kernels.

The same recurrence is implemented inside the numba kernels; keeping the
constants and the draw protocol in one place lets a pure-Python caller
replay the exact random stream a kernel consumed, which the oracle tests
rely on.
"""

import numpy as np

# Knuth MMIX constants, modulo 2**64.
LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
_MASK = (1 << 64) - 1

# uint64 copies for use inside numba kernels.
LCG_A_U64 = np.uint64(LCG_A)
LCG_C_U64 = np.uint64(LCG_C)


class Lcg:
    """Pure-Python mirror of the kernel RNG. One instance = one stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state * LCG_A + LCG_C) & _MASK
        return self.state

    def next_double(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / 9007199254740992.0

    def next_index(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return (self.next_u64() >> 16) % n
