"""Closed-form ETTR/MTTR results, computed in exact rational arithmetic.

Infinite expectations (no common channel) are returned as ``math.inf``
rather than raised, so parameter sweeps can include degenerate corners.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Sequence, Union

from rendezvous.channels import intersection, union
from rendezvous.errors import DegenerateChain, InvalidInput

Value = Union[Fraction, float]
INFINITE = math.inf


class NoCommonChannelWarning(UserWarning):
    pass


def jaccard(sets: Iterable[Iterable[int]]) -> Fraction:
    """``|intersection| / |union|`` of any number of channel sets."""
    sets = [frozenset(s) for s in sets]
    if not sets:
        raise InvalidInput("need at least one channel set")
    common = intersection(sets)
    if not common:
        warnings.warn("channel sets share no channel; rendezvous is impossible",
                      NoCommonChannelWarning, stacklevel=2)
        return Fraction(0)
    return Fraction(len(common), len(union(sets)))


def jaccard_counts(n1: int, n2: int, n12: int) -> Fraction:
    return Fraction(n12, n1 + n2 - n12)


def ettr_consistent(J: Fraction) -> Value:
    """ETTR of a consistent schedule driven by independent uniform
    permutations: the reciprocal of the Jaccard index."""
    J = Fraction(J)
    if J <= 0:
        return INFINITE
    return 1 / J


def mttr_bound(N: int, common: int) -> int:
    """Worst-case TTR of a one-cycle schedule over ``N`` (padded) channels."""
    if not 1 <= common <= N:
        raise InvalidInput(f"need 1 <= common <= N, got common={common}, N={N}")
    return N - common + 1


def ettr_random_baseline(n1: int, n2: int, n12: int) -> Value:
    """Two users picking independently and uniformly from their own sets
    meet with probability ``n12 / (n1 n2)`` per slot."""
    if n12 <= 0:
        return INFINITE
    return Fraction(n1 * n2, n12)


@dataclass(frozen=True)
class ThreeUserProfile:
    """Overlap counts of three available channel sets.

    ``n123 = 0`` is accepted so sweeps can reach the degenerate corner; the
    ETTR functions then return ``INFINITE``.
    """

    n1: int
    n2: int
    n3: int
    n12: int
    n13: int
    n23: int
    n123: int
    N: int = 256

    def __post_init__(self):
        vals = (self.n1, self.n2, self.n3, self.n12, self.n13, self.n23, self.n123)
        if any(v < 0 for v in vals):
            raise InvalidInput(f"negative count in {self}")
        if self.n123 > min(self.n12, self.n13, self.n23):
            raise InvalidInput("n123 exceeds a pairwise overlap")
        if self.n12 > min(self.n1, self.n2) or self.n13 > min(self.n1, self.n3) \
                or self.n23 > min(self.n2, self.n3):
            raise InvalidInput("pairwise overlap exceeds a set size")
        if min(self.exclusive) < 0:
            raise InvalidInput(f"overlaps are not realisable: exclusive counts {self.exclusive}")
        if self.n_union > self.N:
            raise InvalidInput(f"union of {self.n_union} channels exceeds N={self.N}")

    @property
    def n_union(self) -> int:
        return (self.n1 + self.n2 + self.n3 - self.n12 - self.n13 - self.n23 + self.n123)

    @property
    def exclusive(self):
        return (self.n1 - self.n12 - self.n13 + self.n123,
                self.n2 - self.n12 - self.n23 + self.n123,
                self.n3 - self.n13 - self.n23 + self.n123)

    @property
    def region_sizes(self):
        """Sizes of the seven nonempty Venn regions:
        (123, 12 only, 13 only, 23 only, 1 only, 2 only, 3 only)."""
        return (self.n123, self.n12 - self.n123, self.n13 - self.n123,
                self.n23 - self.n123) + self.exclusive

    @property
    def jaccard(self) -> Fraction:
        return Fraction(self.n123, self.n_union)

    def size(self, k: int) -> int:
        return (self.n1, self.n2, self.n3)[k - 1]

    def overlap(self, a: int, b: int) -> int:
        a, b = sorted((a, b))
        return {(1, 2): self.n12, (1, 3): self.n13, (2, 3): self.n23}[(a, b)]

    @classmethod
    def symmetric(cls, n: int, n_core: int, n_exclusive: int, N: int = 256) -> "ThreeUserProfile":
        """Equal set sizes ``n`` and equal pairwise-exclusive counts."""
        pair = n_core + n_exclusive
        return cls(n, n, n, pair, pair, pair, n_core, N)

    @classmethod
    def from_sets(cls, c1, c2, c3, N: int) -> "ThreeUserProfile":
        c1, c2, c3 = frozenset(c1), frozenset(c2), frozenset(c3)
        return cls(len(c1), len(c2), len(c3), len(c1 & c2), len(c1 & c3),
                   len(c2 & c3), len(c1 & c2 & c3), N)


class EventProbs(NamedTuple):
    """Per-slot probabilities of the five outcomes for three users."""

    p12: Fraction
    p13: Fraction
    p23: Fraction
    p123: Fraction
    p0: Fraction


def _pair_only(p: ThreeUserProfile, a: int, b: int) -> Fraction:
    # a and b meet without the third user c: either the union's pick lies
    # in (a & b) \ c, or it lies in c's exclusive region and a, b agree.
    c = 6 - a - b
    nab = p.overlap(a, b)
    excl_c = p.exclusive[c - 1]
    nu = p.n_union
    return (Fraction(nab - p.n123, nu)
            + Fraction(nab, p.size(a) + p.size(b) - nab) * Fraction(excl_c, nu))


def three_user_event_probs(p: ThreeUserProfile) -> EventProbs:
    p12 = _pair_only(p, 1, 2)
    p13 = _pair_only(p, 1, 3)
    p23 = _pair_only(p, 2, 3)
    p123 = Fraction(p.n123, p.n_union)
    p0 = 1 - p12 - p13 - p23 - p123
    return EventProbs(p12, p13, p23, p123, p0)


def pairwise_stick_ettr(p: ThreeUserProfile, pair) -> Value:
    """ETTR after the users in ``pair`` have merged onto their common set
    and the third user still hops on its own set."""
    a, b = sorted(pair)
    if (a, b) not in ((1, 2), (1, 3), (2, 3)):
        raise InvalidInput(f"pair must be two distinct users of 1..3, got {pair}")
    if p.n123 == 0:
        return INFINITE
    c = 6 - a - b
    return Fraction(p.overlap(a, b) + p.size(c) - p.n123, p.n123)


def stick_ettr3(p: ThreeUserProfile) -> Value:
    """Three-user ETTR of the stick-together strategy under random
    permutations, by conditioning on the first slot's outcome."""
    if p.n123 == 0:
        return INFINITE
    e = three_user_event_probs(p)
    num = (1 + e.p12 * pairwise_stick_ettr(p, (1, 2))
           + e.p13 * pairwise_stick_ettr(p, (1, 3))
           + e.p23 * pairwise_stick_ettr(p, (2, 3)))
    return num / (e.p12 + e.p13 + e.p23 + e.p123)


# Spread-out chain states, numbered 1..12 as in the state diagram.
STATES = ("R_I", "R_12", "R_13", "R_23",
          "R_12,13", "R_12,23", "R_13,12", "R_13,23", "R_23,12", "R_23,13",
          "R_A", "R_F")
AWARE, FINAL = 11, 12

# second-rendezvous state -> (bridge, pending, newcomer)
SECOND_STATE_ROLES = {
    5: (1, 2, 3), 6: (2, 1, 3), 7: (1, 3, 2),
    8: (3, 1, 2), 9: (2, 3, 1), 10: (3, 2, 1),
}


@dataclass(frozen=True)
class SpreadOutChain:
    """12x12 transition matrix; ``p[i-1][j-1]`` is the probability of
    moving from state ``i`` to state ``j``."""

    p: List[List[Fraction]]

    def prob(self, i: int, j: int) -> Fraction:
        return self.p[i - 1][j - 1]

    def row_sums(self) -> List[Fraction]:
        return [sum(row, Fraction(0)) for row in self.p]

    def is_upper_triangular(self) -> bool:
        return all(self.p[i][j] == 0 for i in range(12) for j in range(i))


def spreadout_matrix(p: ThreeUserProfile) -> SpreadOutChain:
    e = three_user_event_probs(p)
    P = [[Fraction(0)] * 12 for _ in range(12)]

    def put(i, j, v):
        P[i - 1][j - 1] += v

    put(1, 1, e.p0)
    put(1, 2, e.p12)
    put(1, 3, e.p13)
    put(1, 4, e.p23)
    put(1, FINAL, e.p123)

    # after the first pair meets, everyone keeps the original sequence
    first = {2: (e.p12, (e.p13, 5), (e.p23, 6)),
             3: (e.p13, (e.p12, 7), (e.p23, 8)),
             4: (e.p23, (e.p12, 9), (e.p13, 10))}
    for i, (same_pair, (pa, ja), (pb, jb)) in first.items():
        put(i, i, same_pair + e.p0)
        put(i, ja, pa)
        put(i, jb, pb)
        put(i, FINAL, e.p123)

    # the two informed users now only wait on the pending user's pick
    for i, (bridge, pending, newcomer) in SECOND_STATE_ROLES.items():
        n_p = p.size(pending)
        shared = p.overlap(pending, bridge) + p.overlap(pending, newcomer)
        put(i, FINAL, Fraction(p.n123, n_p))
        put(i, AWARE, Fraction(shared - 2 * p.n123, n_p))
        put(i, i, Fraction(n_p - shared + p.n123, n_p))

    put(AWARE, FINAL, Fraction(1))
    put(FINAL, FINAL, Fraction(1))
    return SpreadOutChain(P)


def spreadout_absorption_times(chain: SpreadOutChain) -> List[Fraction]:
    """Expected steps to absorption from states 1..11, by back-substitution
    over the upper-triangular chain."""
    t = [Fraction(0)] * 13
    t[AWARE] = Fraction(1)

    def solve(i, rest):
        stay = chain.prob(i, i)
        if stay == 1:
            raise DegenerateChain(f"state {STATES[i - 1]} never leaves")
        return (1 + rest) / (1 - stay)

    for i in range(5, 11):
        t[i] = solve(i, chain.prob(i, AWARE) * t[AWARE])
    for i in (2, 3, 4):
        t[i] = solve(i, chain.prob(i, 2 * i + 1) * t[2 * i + 1]
                     + chain.prob(i, 2 * i + 2) * t[2 * i + 2])
    t[1] = solve(1, sum((chain.prob(1, j) * t[j] for j in (2, 3, 4)), Fraction(0)))
    return t[1:12]


def spreadout_ettr3(p: ThreeUserProfile) -> Value:
    if p.n123 == 0:
        return INFINITE
    return spreadout_absorption_times(spreadout_matrix(p))[0]


def as_float(v: Value) -> float:
    return float(v)
