"""Permutations of ``{1..N}``, one-cycle tests and the modular-arithmetic
one-cycle permutation ``i -> g*i mod P``."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from rendezvous.errors import InvalidInput


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{1..N}`` stored as ``forward[i-1] = pi(i)``."""

    forward: Tuple[int, ...]

    def __post_init__(self):
        fwd = tuple(int(x) for x in self.forward)
        if sorted(fwd) != list(range(1, len(fwd) + 1)):
            raise InvalidInput(f"not a permutation of 1..{len(fwd)}: {fwd}")
        object.__setattr__(self, "forward", fwd)

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(tuple(range(1, N + 1)))

    @property
    def N(self) -> int:
        return len(self.forward)

    def __call__(self, i: int) -> int:
        return self.forward[i - 1]

    def __len__(self) -> int:
        return len(self.forward)

    def apply(self, channels: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self.forward[c - 1] for c in channels)

    def inverse(self) -> "Permutation":
        inv = [0] * self.N
        for i, v in enumerate(self.forward, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        if other.N != self.N:
            raise InvalidInput("cannot compose permutations of different sizes")
        return Permutation(tuple(self.forward[other.forward[i] - 1] for i in range(self.N)))

    def __matmul__(self, other: "Permutation") -> "Permutation":
        return self.compose(other)

    def power(self, t: int) -> "Permutation":
        return power(self, t)

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = [False] * (self.N + 1)
        out = []
        for start in range(1, self.N + 1):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = self.forward[i - 1]
            out.append(tuple(cyc))
        return out

    def as_array(self) -> np.ndarray:
        return np.asarray(self.forward, dtype=np.int64)


def random_permutation(N: int, rng: np.random.Generator) -> Permutation:
    """Uniform permutation of ``{1..N}`` (numpy's Fisher-Yates shuffle)."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    return Permutation(tuple(int(x) for x in rng.permutation(N) + 1))


def rotation(N: int) -> Permutation:
    """The cyclic shift ``i -> (i mod N) + 1``."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    return Permutation(tuple((i % N) + 1 for i in range(1, N + 1)))


def power(pi: Permutation, t: int) -> Permutation:
    """``pi`` composed with itself ``t`` times, by repeated squaring."""
    if t < 0:
        raise InvalidInput("power requires t >= 0")
    result = Permutation.identity(pi.N)
    base = pi
    while t:
        if t & 1:
            result = base.compose(result)
        base = base.compose(base)
        t >>= 1
    return result


def is_one_cycle(pi: Permutation) -> bool:
    i, steps = 1, 0
    while True:
        i = pi(i)
        steps += 1
        if i == 1:
            return steps == pi.N


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> List[int]:
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def is_generator(P: int, g: int) -> bool:
    """True iff ``g`` is a primitive root modulo the prime ``P``."""
    if not is_prime(P):
        raise InvalidInput(f"{P} is not prime")
    if not 1 <= g <= P - 1:
        raise InvalidInput(f"generator must lie in [1, {P - 1}], got {g}")
    if P == 2:
        return g == 1
    return all(pow(g, (P - 1) // q, P) != 1 for q in prime_factors(P - 1))


def find_generator(P: int) -> int:
    """Largest primitive root modulo ``P``; small generators tend to give
    less random-looking schedules, so the search runs downward."""
    if not is_prime(P):
        raise InvalidInput(f"{P} is not prime")
    for g in range(P - 1, 0, -1):
        if is_generator(P, g):
            return g
    raise AssertionError("every prime has a primitive root")


def next_prime_pad(N: int) -> Tuple[int, int]:
    """Smallest prime ``P >= N+1`` and the padded channel count ``P-1``.

    Channels ``N+1..P-1`` are fictitious: no user ever has them available.
    """
    if N < 1:
        raise InvalidInput("N must be >= 1")
    P = N + 1
    while not is_prime(P):
        P += 1
    return P, P - 1


def modulo_permutation(P: int, g: int) -> Permutation:
    """``i -> g*i mod P`` on ``{1..P-1}``."""
    if not is_generator(P, g):
        raise InvalidInput(f"{g} is not a generator modulo {P}")
    return Permutation(tuple(g * i % P for i in range(1, P)))
