"""Discrete-time K-user rendezvous simulator.

Selections are evaluated a block of slots at a time.  Between two
state-changing rendezvous every user's hop set is fixed (up to slot
parity), so a whole block can be computed with array operations; after a
state change the simulation resumes from the following slot.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from rendezvous import streams
from rendezvous.errors import InvalidInput, InvalidScenario, Unsupported
from rendezvous.schedules import Schedule
from rendezvous.strategies import (
    SpreadOutPhase,
    StrategyKind,
    apply_hybrid,
    apply_stick,
    hop_sets,
)

DEFAULT_MAX_SLOTS = 20_000
_MIN_BLOCK, _MAX_BLOCK = 8, 64


def _as_members(c) -> np.ndarray:
    arr = np.unique(np.asarray(list(c), dtype=np.int64))
    if arr.size == 0:
        raise InvalidInput("available channel set must be nonempty")
    if arr[0] < 1:
        raise InvalidInput("channel labels start at 1")
    return arr


@dataclass
class UserState:
    """One user's clock offset, seed and channel sets.

    ``c_known`` is the intersection of every set this user has learned
    about; ``c_stick`` is the set it hops on in stick-together slots.
    Local slot = global slot + ``offset``.
    """

    id: int
    c: np.ndarray
    seed: int = 0
    offset: int = 0
    c_known: np.ndarray = None
    c_stick: np.ndarray = None

    def __post_init__(self):
        self.c = _as_members(self.c)
        self.c_known = self.c if self.c_known is None else _as_members(self.c_known)
        self.c_stick = self.c if self.c_stick is None else _as_members(self.c_stick)
        if self.offset < 0:
            raise InvalidInput("offset must be non-negative")

    def local_slot(self, g: int) -> int:
        return g + self.offset


def make_users(sets: Sequence, seeds: Sequence[int] = None,
               offsets: Sequence[int] = None) -> List[UserState]:
    K = len(sets)
    seeds = list(seeds) if seeds is not None else [0] * K
    offsets = list(offsets) if offsets is not None else [0] * K
    return [UserState(k, sets[k], int(seeds[k]), int(offsets[k])) for k in range(K)]


@dataclass(frozen=True)
class RendezvousEvent:
    global_slot: int
    group: frozenset
    channel: int


@dataclass
class RunResult:
    ttr: Optional[int]
    events: List[RendezvousEvent] = field(default_factory=list)
    selections: Optional[np.ndarray] = None
    anomalies: List[str] = field(default_factory=list)
    phases: List = field(default_factory=list)

    @property
    def timed_out(self) -> bool:
        return self.ttr is None

    def full_slots(self, K: int) -> List[int]:
        return [e.global_slot for e in self.events if len(e.group) == K]


def detect_groups(selections: Mapping[int, int]) -> List[frozenset]:
    """Users that picked the same channel, for every channel picked twice
    or more, ordered by smallest member."""
    by_channel = defaultdict(list)
    for user, ch in selections.items():
        by_channel[ch].append(user)
    groups = [frozenset(us) for us in by_channel.values() if len(us) >= 2]
    return sorted(groups, key=min)


def random_baseline_select(user: UserState, t: int, members=None) -> int:
    """Uniform pick from ``members`` (default: the user's available set)
    drawn from the stream keyed by ``(user.seed, t)``."""
    members = user.c if members is None else _as_members(members)
    idx = streams.randint(user.seed, streams.RANDOM_PICK, t, members.size)
    return int(members[int(idx)])


@dataclass
class Protocol:
    """How a user turns a hop set into a channel at a given slot.

    ``schedule=None`` is the seeded random baseline.  In asynchronous mode
    each slot flips coin ``G1``: below ``p0`` the user applies selector
    ``t'`` of the multiset ``{1..T0}`` (index from ``G2``); otherwise it
    falls back either to a uniform random channel (``fallback="random"``)
    or to the selector of its current local slot (``fallback="current"``).
    """

    schedule: Optional[Schedule]
    asynchronous: bool = False
    T0: int = 20
    p0: float = 0.75
    fallback: str = "random"

    def __post_init__(self):
        if self.asynchronous:
            if self.T0 < 1:
                raise InvalidInput("T0 must be >= 1")
            if not 0.0 <= self.p0 <= 1.0:
                raise InvalidInput("p0 must lie in [0, 1]")
            if self.fallback not in ("random", "current"):
                raise InvalidInput(f"unknown fallback {self.fallback!r}")
        self._multiset = None
        if self.schedule is not None and self.asynchronous:
            self._multiset = self.schedule.rank_block(1, self.T0)

    def _check(self, members):
        if self.schedule is not None and members[-1] > self.schedule.N:
            raise InvalidInput(f"channel {members[-1]} exceeds schedule size {self.schedule.N}")

    def _pick(self, members, seed, t, shared_ranks):
        if self.schedule is None:
            return members[streams.randint(seed, streams.RANDOM_PICK, t, members.size)]
        if not self.asynchronous:
            return members[shared_ranks[:, members - 1].argmin(axis=1)]
        coin = streams.uniform(seed, streams.SELECT_P, t) < self.p0
        idx = streams.randint(seed, streams.SELECT_INDEX, t, self.T0)
        from_multiset = members[self._multiset[:, members - 1].argmin(axis=1)][idx]
        if self.fallback == "random":
            other = members[streams.randint(seed, streams.RANDOM_PICK, t, members.size)]
        else:
            ranks = self.schedule.rank_block(int(t[0]), t.size)
            other = members[ranks[:, members - 1].argmin(axis=1)]
        return np.where(coin, from_multiset, other)

    def block(self, seed, offset, odd, even, g0, count, shared_ranks=None) -> np.ndarray:
        """Selections of one user for global slots ``g0 .. g0+count-1``."""
        t = np.arange(g0, g0 + count, dtype=np.int64) + offset
        a = self._pick(odd, seed, t, shared_ranks)
        if even is odd or (even.size == odd.size and np.array_equal(even, odd)):
            return a
        b = self._pick(even, seed, t, shared_ranks)
        return np.where(t % 2 == 1, a, b)


class _Run:
    def __init__(self, users, protocol: Protocol, strategy: StrategyKind, max_slots: int,
                 stop_on_rendezvous: bool, record_events: bool, record_selections: bool):
        self.users = users
        self.K = len(users)
        self.protocol = protocol
        self.strategy = StrategyKind(strategy)
        self.max_slots = max_slots
        self.stop = stop_on_rendezvous
        self.record_events = record_events
        self.record_selections = record_selections
        self.phase = None
        if self.strategy is StrategyKind.SPREADOUT3:
            if self.K != 3:
                raise Unsupported("the spread-out strategy is defined for exactly three users")
            self.phase = SpreadOutPhase()
        if self.K < 2:
            raise InvalidInput("rendezvous needs at least two users")
        ids = [u.id for u in users]
        if ids != list(range(self.K)):
            raise InvalidInput("user ids must be 0..K-1 in order")
        common = users[0].c
        for u in users[1:]:
            common = np.intersect1d(common, u.c, assume_unique=True)
        if common.size == 0:
            raise InvalidScenario("users share no common channel")
        for u in users:
            protocol._check(u.c)
        self.reacts = self.strategy is not StrategyKind.GENERIC

    def _shared_ranks(self, g0, count):
        p = self.protocol
        if p.schedule is None or p.asynchronous:
            return None
        return p.schedule.rank_block(g0, count)

    def clusters(self):
        """Representative users and each user's representative column.

        Users with the same seed, offset and hop-set objects pick the same
        channel in every slot, so only one of them needs evaluating and
        their mutual collisions carry no new information.
        """
        reps, column, seen = [], np.empty(self.K, dtype=np.int64), {}
        for k, u in enumerate(self.users):
            odd, even = hop_sets(self.strategy, u)
            key = (u.seed, u.offset, id(odd), id(even))
            if key not in seen:
                seen[key] = len(reps)
                reps.append(k)
            column[k] = seen[key]
        return reps, column

    def selections(self, g0, count, reps=None):
        reps = range(self.K) if reps is None else reps
        shared = self._shared_ranks(g0, count)
        out = np.empty((count, len(reps)), dtype=np.int64)
        for j, k in enumerate(reps):
            u = self.users[k]
            odd, even = hop_sets(self.strategy, u)
            out[:, j] = self.protocol.block(u.seed, u.offset, odd, even, g0, count, shared)
        return out

    def predict(self, pending, seed, offset, hop_set, after):
        """First slot after ``after`` at which ``pending`` (hopping as now)
        and a user with ``(seed, offset)`` hopping on ``hop_set`` coincide."""
        g, count = after + 1, _MAX_BLOCK
        odd, even = hop_sets(self.strategy, pending)
        while g <= self.max_slots:
            n = min(count, self.max_slots - g + 1)
            shared = self._shared_ranks(g, n)
            sp = self.protocol.block(pending.seed, pending.offset, odd, even, g, n, shared)
            sh = self.protocol.block(seed, offset, hop_set, hop_set, g, n, shared)
            hit = np.flatnonzero(sp == sh)
            if hit.size:
                return g + int(hit[0])
            g += n
            count = min(count * 2, 4096)
        return None

    def _synchronise(self, group) -> bool:
        ref = self.users[min(group)]
        changed = False
        for k in group:
            u = self.users[k]
            if u.offset != ref.offset or u.seed != ref.seed:
                u.offset, u.seed = ref.offset, ref.seed
                changed = True
        return changed

    def update(self, groups, slot) -> bool:
        changed = False
        for group in groups:
            if self.strategy is StrategyKind.GENERIC:
                continue
            changed |= self._synchronise(group)
            t = self.users[min(group)].local_slot(slot)
            if self.strategy is StrategyKind.STICK:
                changed |= apply_stick(group, self.users)
            elif self.strategy is StrategyKind.HYBRID:
                changed |= apply_hybrid(group, self.users, t)
            else:
                changed |= self.phase.apply(group, self.users, slot, self.predict)
        return changed

    def run(self) -> RunResult:
        result = RunResult(ttr=None)
        chunks = []
        g, count = 1, _MIN_BLOCK
        everyone = frozenset(range(self.K))
        expand = self.record_events or self.record_selections
        reps, column = self.clusters()
        while g <= self.max_slots:
            n = min(count, self.max_slots - g + 1)
            rep_sel = self.selections(g, n, reps)
            full = (rep_sel == rep_sel[:, :1]).all(axis=1)
            sel = rep_sel[:, column] if expand else None
            if self.record_events:
                probe = sel
            elif self.reacts:
                probe = rep_sel
            else:
                probe = None
            if probe is None or probe.shape[1] < 2:
                hits = full
            else:
                s = np.sort(probe, axis=1)
                hits = (s[:, 1:] == s[:, :-1]).any(axis=1)
            done_rows = n
            restart = False
            for r in np.flatnonzero(hits):
                slot = g + int(r)
                row = sel[r] if expand else rep_sel[r][column]
                if full[r]:
                    groups = [everyone]
                else:
                    groups = detect_groups(dict(enumerate(row.tolist())))
                if self.record_events:
                    result.events.extend(
                        RendezvousEvent(slot, grp, int(row[min(grp)])) for grp in groups)
                changed = self.reacts and self.update(groups, slot)
                if full[r] and result.ttr is None:
                    result.ttr = slot
                    if self.stop:
                        done_rows = int(r) + 1
                        restart = True
                        g = self.max_slots + 1
                        break
                if changed:
                    done_rows = int(r) + 1
                    restart = True
                    g = slot + 1
                    break
            if self.record_selections:
                chunks.append(sel[:done_rows])
            if restart:
                count = _MIN_BLOCK
                reps, column = self.clusters()
            else:
                g += n
                count = min(count * 2, _MAX_BLOCK)
        if self.record_selections:
            result.selections = np.concatenate(chunks) if chunks else np.empty((0, self.K), int)
        if self.phase is not None:
            result.anomalies.extend(self.phase.anomalies)
            result.phases = list(self.phase.history)
        return result


def run_sync(users: Sequence[UserState], sched: Optional[Schedule],
             strategy=StrategyKind.GENERIC, max_slots: int = DEFAULT_MAX_SLOTS, *,
             stop_on_rendezvous: bool = True, record_events: bool = True,
             record_selections: bool = False) -> RunResult:
    """Synchronous run: every user is at local slot ``t`` in global slot ``t``.

    ``sched=None`` runs the seeded random baseline.  ``ttr`` is the first
    slot at which all users pick the same channel, or None on timeout.
    """
    if any(u.offset != 0 for u in users):
        raise InvalidInput("synchronous runs require zero clock offsets")
    return _Run(list(users), Protocol(sched), strategy, max_slots, stop_on_rendezvous,
                record_events, record_selections).run()


def run_async(users: Sequence[UserState], sched: Optional[Schedule],
              strategy=StrategyKind.HYBRID, T0: int = 20, p0: float = 0.75,
              max_slots: int = DEFAULT_MAX_SLOTS, *, fallback: str = "random",
              stop_on_rendezvous: bool = True, record_events: bool = True,
              record_selections: bool = False) -> RunResult:
    """Asynchronous run with independent seeds and clock offsets.

    Users that rendezvous adopt the clock and seed of the member with the
    smallest id (except under the generic strategy, which never changes
    any state).
    """
    protocol = Protocol(sched, asynchronous=True, T0=T0, p0=p0, fallback=fallback)
    return _Run(list(users), protocol, strategy, max_slots, stop_on_rendezvous,
                record_events, record_selections).run()
