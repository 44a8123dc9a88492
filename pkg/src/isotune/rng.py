"""Deterministic, portable random number generation (splitmix64).

All stochastic streams in this package are derived from splitmix64, a
counter-based 64-bit mixer (Steele, Lea & Flood's SplittableRandom
finalizer).  Output k for seed s is::

    z = (s + (k+1) * 0x9E3779B97F4A7C15) mod 2^64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    z = z ^ (z >> 31)

Unit doubles are z >> 11 scaled by 2^-53, i.e. uniform on [0, 1) with 53
bits.  Because the generator is a pure function of (seed, counter) it is
reproducible across platforms and languages, and whole streams can be
produced vectorized without carrying state.
"""
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / (1 << 53)


def raw(seed, start, count):
    """uint64 outputs for counters start..start+count-1."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform(seed, count, start=0):
    """Uniform doubles on [0, 1), one per counter."""
    return (raw(seed, start, count) >> np.uint64(11)).astype(np.float64) * _INV53


def gaussian(seed, count, start=0):
    """Standard normal doubles via Box-Muller on consecutive uniform pairs."""
    u = uniform(seed, 2 * count, start)
    u1 = np.maximum(u[0::2], _INV53)  # keep log() finite
    u2 = u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def derive(seed, tag):
    """Derive a sub-seed; tag is a small integer namespace."""
    with np.errstate(over="ignore"):
        mixed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ (np.uint64(tag) * _MIX2)
    return int(raw(mixed, 0, 1)[0])
