"""Counter-based SplitMix64 streams and seed derivation.

Every Monte Carlo routine in the package draws from seeds produced by
:func:`derive_seed`, so a replicate's randomness depends only on
``(master, experiment, replicate)`` and never on scheduling.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer (full avalanche on 64-bit input)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Mix a master seed with any number of integer indices into a 64-bit seed.

    Pure and deterministic; the chained finalizer makes neighbouring index
    tuples land on unrelated seeds.
    """
    h = mix64(master & MASK64)
    for i in indices:
        h = mix64((h + GOLDEN + (i & MASK64) * 0xD1B54A32D192ED03) & MASK64)
    return h


class SplitMix64:
    """Pure-Python twin of the generator used inside the compiled kernels.

    Output ``k`` is ``mix64(seed + (k + 1) * GOLDEN)``; the compiled kernels
    reproduce this stream bit for bit.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` via a 64x64->128 multiply-shift."""
        return (self.next_u64() * bound) >> 64

    def random(self) -> float:
        """Uniform double in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
