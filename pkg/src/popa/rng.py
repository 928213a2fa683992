"""Deterministic seed derivation and a small splitmix64 stream.

The classifier kernels embed the identical stream in compiled form; this
module is the pure-Python mirror used for seed derivation, replay in tests,
and anywhere speed does not matter. The derivation rules are part of the
model reproducibility contract:

* ``mix64(z)``            -- the splitmix64 finalizer.
* per-tree seed           -- ``mix64(forest_seed XOR tree_index)``.
* per-pair SVM seed       -- ``mix64(svm_seed XOR pair_index)``.
* stream                  -- state += GOLDEN each step, output = finalizer.
* ``rand_below(n)``       -- top 53 bits scaled to [0, n), clamped.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def mix64(z: int) -> int:
    """splitmix64 finalizer; maps 64-bit ints to well-mixed 64-bit ints."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(seed: int, index: int) -> int:
    """Sub-seed for the index-th independent stream of a seeded run."""
    return mix64((seed ^ index) & MASK64)


class SplitMix64:
    """Tiny deterministic PRNG; bit-identical to the compiled kernels."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def rand_below(self, n: int) -> int:
        """Uniform draw from [0, n). n must be positive and < 2**53."""
        u = (self.next_u64() >> 11) * _INV53
        i = int(u * n)
        return n - 1 if i >= n else i

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates, high index down, matching the kernels."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.rand_below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
