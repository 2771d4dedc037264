"""Seed derivation and the in-kernel generator used by the switch chains.

Chains run inside numba kernels, so they carry their own generator state:
xoshiro256** (Blackman & Vigna) seeded through splitmix64.  Python-level
randomness (test vectors, martingale draws) uses numpy's PCG64 seeded with
the same derived 64-bit seeds.
"""
import numpy as np
from numba import njit, uint64

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for the 64-bit input ``x``."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, index: int) -> int:
    """Per-trial seed: a fixed 64-bit mix of (base_seed, index)."""
    return splitmix64((base_seed & MASK64) ^ splitmix64(index & MASK64))


def numpy_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def xoshiro_state(seed: int) -> np.ndarray:
    """Four-word xoshiro256** state filled by a splitmix64 stream."""
    out = np.empty(4, dtype=np.uint64)
    x = seed & MASK64
    for i in range(4):
        x = (x + _GOLDEN) & MASK64
        out[i] = splitmix64((x - _GOLDEN) & MASK64)
    if not out.any():
        out[0] = 1
    return out


@njit(cache=True)
def _rotl(x, k):
    return (x << uint64(k)) | (x >> uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * uint64(5), 7) * uint64(9)
    t = s[1] << uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def randbelow(s, n):
    # Lemire's unbiased multiply-shift on 32-bit draws; requires 0 < n < 2**32
    nn = uint64(n)
    low_mask = uint64(0xFFFFFFFF)
    m = (next_u64(s) >> uint64(32)) * nn
    low = m & low_mask
    if low < nn:
        thresh = ((low_mask + uint64(1)) - nn) % nn
        while low < thresh:
            m = (next_u64(s) >> uint64(32)) * nn
            low = m & low_mask
    return np.int64(m >> uint64(32))


@njit(cache=True)
def uniform01(s):
    return (next_u64(s) >> uint64(11)) * (1.0 / 9007199254740992.0)
