"""Counter-addressable uniform streams.

Every draw is a pure function of ``(seed, tag, t)``, so two users that
share a seed can reproduce each other's draws for any slot without
exchanging state, and draws for a whole block of slots can be computed in
one vectorised call.  The mixing function is the SplitMix64 finaliser.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# stream tags
SELECT_P = 1      # G1: multiset-vs-fallback coin
SELECT_INDEX = 2  # G2: index into the multiset of selectors
RANDOM_PICK = 3   # uniform channel choice


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _key(seed: int, tag: int) -> np.uint64:
    with np.errstate(over="ignore"):
        k = _mix(np.uint64(seed & _MASK) ^ (np.uint64(tag) * _GOLDEN))
        return _mix(k + _GOLDEN)


def uniform(seed: int, tag: int, t) -> np.ndarray:
    """Uniform draws in ``[0, 1)`` for slot indices ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        z = _mix(_key(seed, tag) + (t + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def randint(seed: int, tag: int, t, n) -> np.ndarray:
    """Uniform integers in ``[0, n)``; ``n`` may broadcast against ``t``."""
    return np.floor(uniform(seed, tag, t) * np.asarray(n)).astype(np.int64)
