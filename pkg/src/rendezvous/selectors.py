"""Channel selection functions and the consistency property.

A selection function picks one channel from any nonempty available set.
It is *consistent* when shrinking the set never changes the pick unless the
picked channel itself is removed.  Every consistent selector is the
smallest-label selector after a relabeling of the channels.
"""

import math
from itertools import permutations as _all_orders
from typing import Callable, Dict, Iterable, Iterator, Sequence

from rendezvous.channels import channel_set, from_mask, to_mask
from rendezvous.errors import InvalidInput, InvalidScore, ResourceLimit
from rendezvous.permutations import Permutation

# An explicit selector: subset bitmask -> selected channel.
SelectorTable = Dict[int, int]

MAX_TABLE_N = 12
MAX_COUNT_N = 6


def _nonempty(c: Iterable[int]) -> Sequence[int]:
    c = tuple(c)
    if not c:
        raise InvalidInput("available channel set must be nonempty")
    return c


def phi_min(c: Iterable[int]) -> int:
    return min(_nonempty(c))


def phi_max(c: Iterable[int]) -> int:
    return max(_nonempty(c))


def score_select(f: Callable[[int], float], c: Iterable[int]) -> int:
    """The channel of ``c`` with the smallest score ``f``.

    Raises InvalidScore when two channels of ``c`` tie, since the argmin is
    then not a function of the set alone.
    """
    c = _nonempty(c)
    scored = sorted((f(ch), ch) for ch in c)
    for (a, _), (b, _) in zip(scored, scored[1:]):
        if a == b:
            raise InvalidScore(f"score {a!r} is shared by two channels of {c}")
    return scored[0][1]


def conjugate_select(pi: Permutation, c: Iterable[int]) -> int:
    """``pi^-1(min(pi(c)))``: relabel with ``pi``, take the smallest, map back."""
    c = _nonempty(c)
    return min(c, key=pi)


def selector_from_priority(sigma: Permutation, c: Iterable[int]) -> int:
    """The first channel in the priority order ``sigma(1), sigma(2), ...``
    that is present in ``c``."""
    present = set(_nonempty(c))
    for ch in sigma.forward:
        if ch in present:
            return ch
    raise InvalidInput(f"{sorted(present)} is not a subset of 1..{sigma.N}")


def all_subsets(N: int) -> range:
    """Bitmasks of every nonempty subset of ``{1..N}``."""
    return range(1, 1 << N)


def tabulate(selector: Callable[[Sequence[int]], int], N: int) -> SelectorTable:
    if N > MAX_TABLE_N:
        raise ResourceLimit(f"explicit selector tables are limited to N <= {MAX_TABLE_N}")
    return {m: selector(from_mask(m)) for m in all_subsets(N)}


def check_consistent(phi: SelectorTable, N: int) -> bool:
    """Consistency of an explicit selector over all subsets of ``{1..N}``.

    Only single-channel removals are checked; the general subset condition
    follows by chaining removals.
    """
    if N > MAX_TABLE_N:
        raise ResourceLimit(f"explicit selector tables are limited to N <= {MAX_TABLE_N}")
    full = 1 << N
    if len(phi) != full - 1 or any(m not in phi for m in range(1, full)):
        raise InvalidInput("selector table does not cover every nonempty subset")
    for m in range(1, full):
        pick = phi[m]
        bit = 1 << (pick - 1)
        if not m & bit:
            raise InvalidInput(f"table selects {pick} outside {from_mask(m)}")
        rest = m & ~bit
        while rest:
            low = rest & -rest
            rest ^= low
            if phi[m & ~low] != pick:
                return False
    return True


def _consistent_tables(N: int) -> Iterator[SelectorTable]:
    # Backtracking over subsets from largest to smallest.  Once every
    # superset S+{x} is fixed, consistency forces phi(S) whenever one of
    # them selects a channel inside S; otherwise every member of S is
    # still a candidate.
    order = sorted(all_subsets(N), key=lambda m: -bin(m).count("1"))
    full = (1 << N) - 1
    table: SelectorTable = {}

    def candidates(m):
        forced = set()
        missing = full & ~m
        while missing:
            low = missing & -missing
            missing ^= low
            pick = table[m | low]
            if m & (1 << (pick - 1)):
                forced.add(pick)
        if len(forced) > 1:
            return ()
        if forced:
            return tuple(forced)
        return from_mask(m)

    def extend(k):
        if k == len(order):
            yield dict(table)
            return
        m = order[k]
        for pick in candidates(m):
            table[m] = pick
            yield from extend(k + 1)
        table.pop(m, None)

    yield from extend(0)


def count_consistent(N: int) -> int:
    """Number of distinct consistent selection functions on ``N`` channels,
    found by exhaustive backtracking search over selector tables."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    if N > MAX_COUNT_N:
        raise ResourceLimit(f"count_consistent is limited to N <= {MAX_COUNT_N}")
    return sum(1 for _ in _consistent_tables(N))


def consistent_tables(N: int) -> Iterator[SelectorTable]:
    if N > MAX_COUNT_N:
        raise ResourceLimit(f"enumeration is limited to N <= {MAX_COUNT_N}")
    return _consistent_tables(N)


def priority_tables(N: int) -> Iterator[SelectorTable]:
    """One selector table per priority order (all ``N!`` of them)."""
    for order in _all_orders(range(1, N + 1)):
        sigma = Permutation(order)
        yield tabulate(lambda c, s=sigma: selector_from_priority(s, c), N)


def count_all_selectors(N: int) -> int:
    """Number of (not necessarily consistent) selection functions."""
    return math.prod(k ** math.comb(N, k) for k in range(2, N + 1))


def table_select(phi: SelectorTable, c: Iterable[int]) -> int:
    return phi[to_mask(channel_set(c))]
