"""Deterministic seed derivation and the splitmix64 stream.

Every source of randomness in the package is a pure function of the run
seed and a path of string/int tokens, so reruns are bit-reproducible and
subsystems cannot perturb each other's streams.

The splitmix64 generator is also implemented in the compiled kernels; the
two implementations must stay in lockstep (64-bit wrap-around arithmetic,
identical constants) because per-node feature sampling happens inside the
tree growers.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *parts) -> int:
    """Derive an independent 64-bit stream seed from a root seed and tokens."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "little")


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z
