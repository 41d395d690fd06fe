"""Time-indexed consistent selector schedules.

A schedule assigns a relabeling ``pi_t`` to every slot ``t = 1, 2, ...``
and selects ``pi_t^-1(min pi_t(c))`` from an available set ``c``.  All
variants expose the relabeling as a rank vector (``ranks[c-1] = pi_t(c)``,
or any injective score with the same order) so a block of slots can be
evaluated with array operations.
"""

from collections import OrderedDict
from typing import Iterable, Sequence

import numpy as np

from rendezvous.errors import InvalidInput
from rendezvous.permutations import (
    Permutation,
    find_generator,
    is_generator,
    is_one_cycle,
    next_prime_pad,
    power,
    rotation,
)

BLOCK = 32


def _members(c: Iterable[int], N: int) -> np.ndarray:
    arr = np.asarray(sorted(set(int(x) for x in c)), dtype=np.int64)
    if arr.size == 0:
        raise InvalidInput("available channel set must be nonempty")
    if arr[0] < 1 or arr[-1] > N:
        raise InvalidInput(f"channels must lie in 1..{N}, got {arr.tolist()}")
    return arr


class Schedule:
    """Base class.  ``N`` is the (padded) number of channels ranked."""

    N: int
    name = "schedule"

    def rank_block(self, t0: int, count: int) -> np.ndarray:
        """``(count, N)`` array of ranks for slots ``t0 .. t0+count-1``."""
        return self.ranks_at(np.arange(t0, t0 + count))

    def ranks_at(self, ts: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def select(self, t: int, c: Iterable[int]) -> int:
        if t < 1:
            raise InvalidInput("slots are numbered from 1")
        members = _members(c, self.N)
        ranks = self.ranks_at([t])[0]
        return int(members[np.argmin(ranks[members - 1])])

    def relabeling(self, t: int) -> Permutation:
        """``pi_t`` as a permutation of ``{1..N}``."""
        ranks = self.ranks_at([t])[0]
        order = np.argsort(ranks, kind="stable")
        fwd = np.empty(self.N, dtype=np.int64)
        fwd[order] = np.arange(1, self.N + 1)
        return Permutation(tuple(int(x) for x in fwd))


class RandomPermSchedule(Schedule):
    """A fresh uniform permutation per slot, addressable by ``(seed, t)``.

    Permutations are drawn ``BLOCK`` at a time from a generator keyed by
    ``(seed, block index)``, each row shuffled with Fisher-Yates.
    """

    name = "pi-random"

    def __init__(self, N: int, seed: int, block: int = BLOCK, cache: int = 8):
        if N < 1:
            raise InvalidInput("N must be >= 1")
        self.N = N
        self.seed = int(seed)
        self.block = block
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache
        self._base = np.tile(np.arange(1, N + 1, dtype=np.int64), (block, 1))

    def _block(self, b: int) -> np.ndarray:
        hit = self._cache.get(b)
        if hit is not None:
            self._cache.move_to_end(b)
            return hit
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, b])))
        perms = rng.permuted(self._base, axis=1)
        self._cache[b] = perms
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return perms

    def ranks_at(self, ts):
        ts = np.asarray(ts, dtype=np.int64)
        if ts.size and ts.min() < 1:
            raise InvalidInput("slots are numbered from 1")
        out = np.empty((ts.size, self.N), dtype=np.int64)
        idx = ts - 1
        blocks = idx // self.block
        rows = idx % self.block
        for b in np.unique(blocks):
            sel = blocks == b
            out[sel] = self._block(int(b))[rows[sel]]
        return out

    def rank_block(self, t0, count):
        first, last = (t0 - 1) // self.block, (t0 + count - 2) // self.block
        if first == last:
            r = (t0 - 1) % self.block
            return self._block(first)[r:r + count]
        return self.ranks_at(np.arange(t0, t0 + count))


class OneCyclePowerSchedule(Schedule):
    """``pi_t = pi^t`` for a fixed one-cycle permutation; period ``N``."""

    name = "one-cycle"

    def __init__(self, pi: Permutation, require_one_cycle: bool = True):
        if require_one_cycle and not is_one_cycle(pi):
            raise InvalidInput("permutation is not a single N-cycle")
        self.pi = pi
        self.N = pi.N
        # row t holds pi^t for t = 0..N-1
        table = np.empty((self.N, self.N), dtype=np.int64)
        cur = np.arange(1, self.N + 1, dtype=np.int64)
        fwd = pi.as_array()
        for t in range(self.N):
            table[t] = cur
            cur = fwd[cur - 1]
        self._powers = table

    @classmethod
    def rotation(cls, N: int) -> "OneCyclePowerSchedule":
        return cls(rotation(N))

    def ranks_at(self, ts):
        ts = np.asarray(ts, dtype=np.int64)
        return self._powers[ts % self.N]

    def permutation_at(self, t: int) -> Permutation:
        return power(self.pi, t)


class ModuloSchedule(Schedule):
    """``pi_t(c) = g^t * c mod P`` on ``{1..P-1}``.

    Powers ``g^t`` come from modular exponentiation, so any slot can be
    addressed directly; :class:`VirtualClocks` gives the streaming form.
    """

    name = "modulo"

    def __init__(self, P: int, g: int):
        if not is_generator(P, g):
            raise InvalidInput(f"{g} is not a generator modulo {P}")
        self.P = P
        self.g = g
        self.N = P - 1
        self._labels = np.arange(1, P, dtype=np.int64)

    @classmethod
    def for_channels(cls, N: int, g: int = None) -> "ModuloSchedule":
        """Smallest prime ``P > N``; channels above ``N`` are fictitious."""
        P, _ = next_prime_pad(N)
        return cls(P, g if g is not None else find_generator(P))

    def multipliers(self, ts) -> np.ndarray:
        return np.asarray([pow(self.g, int(t) % (self.P - 1), self.P) for t in np.ravel(ts)],
                          dtype=np.int64)

    def ranks_at(self, ts):
        gt = self.multipliers(ts)
        return (gt[:, None] * self._labels[None, :]) % self.P

    def rank_block(self, t0, count):
        gt = np.empty(count, dtype=np.int64)
        cur = pow(self.g, t0 % (self.P - 1), self.P)
        for i in range(count):
            gt[i] = cur
            cur = cur * self.g % self.P
        return (gt[:, None] * self._labels[None, :]) % self.P

    def select(self, t, c):
        if t < 1:
            raise InvalidInput("slots are numbered from 1")
        members = _members(c, self.N)
        gt = pow(self.g, t % (self.P - 1), self.P)
        return int(members[np.argmin(gt * members % self.P)])


class VirtualClocks:
    """Per-channel clocks ``v(c)``, starting at ``v_0(c) = c`` and advancing
    ``v <- g*v mod P`` each slot.  After ``t`` steps the selected channel is
    the one with the smallest clock; the work per slot is O(n)."""

    def __init__(self, c: Iterable[int], P: int, g: int):
        self.P, self.g = P, g
        self.channels = _members(c, P - 1)
        self.values = self.channels.copy()
        self.t = 0

    def step(self) -> "VirtualClocks":
        self.values = self.values * self.g % self.P
        self.t += 1
        return self

    def current(self) -> int:
        return int(self.channels[np.argmin(self.values)])


def modulo_step(vc: VirtualClocks) -> VirtualClocks:
    return vc.step()


class Lsh2Schedule(Schedule):
    """Channel relabeling ``pi1`` and slot relabeling ``pi2``: at slot ``t``
    the channel whose ``pi1`` label follows ``pi2(t)`` most closely (cyclic
    distance ``(pi1(c) - pi2(t)) mod N``) is selected.  Period ``N``."""

    name = "lsh2"

    def __init__(self, pi1: Permutation, pi2: Permutation):
        if pi1.N != pi2.N:
            raise InvalidInput("pi1 and pi2 must act on the same N")
        self.pi1, self.pi2 = pi1, pi2
        self.N = pi1.N
        self._p1 = pi1.as_array()
        self._p2 = pi2.as_array()

    def ranks_at(self, ts):
        ts = np.asarray(ts, dtype=np.int64)
        shift = self._p2[(ts - 1) % self.N]
        return (self._p1[None, :] - shift[:, None]) % self.N


def lsh2_equivalent_pi(pi1: Permutation, pi2: Permutation, t: int) -> Permutation:
    """The single relabeling that reproduces the LSH2 choice at slot ``t``.

    It is ``pi1`` followed by ``pi2(t) - 1`` inverse rotations, which sends
    the channel at cyclic distance 0 to label 1.
    """
    N = pi1.N
    k = pi2(((t - 1) % N) + 1) - 1
    inv_rot = rotation(N).inverse()
    return power(inv_rot, k).compose(pi1)


def make_schedule(algorithm: str, N: int, seed: int = 0, P: int = None, g: int = None,
                  rng: np.random.Generator = None) -> Schedule:
    """Build the shared schedule for one run; ``None`` for the random baseline."""
    from rendezvous.permutations import random_permutation

    if algorithm == "random":
        return None
    if algorithm == "pi-random":
        return RandomPermSchedule(N, seed)
    if algorithm == "modulo":
        if P is None:
            return ModuloSchedule.for_channels(N, g)
        if P - 1 < N:
            raise InvalidInput(f"prime {P} is too small for N={N}")
        return ModuloSchedule(P, g if g is not None else find_generator(P))
    if algorithm == "lsh2":
        rng = rng if rng is not None else np.random.default_rng(seed)
        return Lsh2Schedule(random_permutation(N, rng), random_permutation(N, rng))
    if algorithm == "rotation":
        return OneCyclePowerSchedule.rotation(N)
    raise InvalidInput(f"unknown algorithm {algorithm!r}")
