"""Channel sets in canonical (sorted, duplicate-free) form."""

from typing import Iterable, Tuple

from rendezvous.errors import InvalidInput

ChannelSet = Tuple[int, ...]


def channel_set(channels: Iterable[int], N: int = None) -> ChannelSet:
    """Return ``channels`` as a sorted tuple, rejecting empty sets,
    duplicates and labels outside ``1..N``."""
    members = tuple(sorted(int(c) for c in channels))
    if not members:
        raise InvalidInput("channel set must be nonempty")
    if len(set(members)) != len(members):
        raise InvalidInput(f"duplicate channels in {members}")
    if members[0] < 1:
        raise InvalidInput(f"channel labels start at 1, got {members[0]}")
    if N is not None and members[-1] > N:
        raise InvalidInput(f"channel {members[-1]} exceeds N={N}")
    return members


def to_mask(c: Iterable[int]) -> int:
    """Bitmask with bit ``i-1`` set for every channel ``i`` in ``c``."""
    mask = 0
    for i in c:
        mask |= 1 << (i - 1)
    return mask


def from_mask(mask: int) -> ChannelSet:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def intersection(sets: Iterable[Iterable[int]]) -> frozenset:
    it = iter(sets)
    acc = frozenset(next(it))
    for s in it:
        acc &= frozenset(s)
    return acc


def union(sets: Iterable[Iterable[int]]) -> frozenset:
    acc = frozenset()
    for s in sets:
        acc |= frozenset(s)
    return acc
