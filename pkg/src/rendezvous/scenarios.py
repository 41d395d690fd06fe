"""Random scenario generators for two users, three users and a
cognitive-radio field of many secondary users."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from rendezvous.analytic import ThreeUserProfile
from rendezvous.channels import ChannelSet
from rendezvous.errors import InvalidInput


def _as_set(arr) -> ChannelSet:
    return tuple(sorted(int(x) for x in arr))


@dataclass(frozen=True)
class TwoUserSpec:
    N: int = 256
    n1: int = 60
    n2: int = 60
    n12: int = 30

    def __post_init__(self):
        if self.n12 < 1:
            raise InvalidInput("n12 must be at least 1")
        if self.n12 > min(self.n1, self.n2):
            raise InvalidInput("n12 cannot exceed either set size")
        if self.n1 + self.n2 - self.n12 > self.N:
            raise InvalidInput(f"union of {self.n1 + self.n2 - self.n12} channels exceeds N={self.N}")

    @property
    def jaccard(self) -> float:
        return self.n12 / (self.n1 + self.n2 - self.n12)


def gen_two_user(spec: TwoUserSpec, rng: np.random.Generator) -> Tuple[ChannelSet, ChannelSet]:
    """Common channels first, then disjoint exclusive channels, all drawn
    without replacement from 1..N."""
    u = spec.n1 + spec.n2 - spec.n12
    pick = rng.choice(spec.N, size=u, replace=False) + 1
    common = pick[:spec.n12]
    only1 = pick[spec.n12:spec.n1]
    only2 = pick[spec.n1:]
    return _as_set(np.concatenate([common, only1])), _as_set(np.concatenate([common, only2]))


def gen_three_user(p: ThreeUserProfile, rng: np.random.Generator):
    """Shuffle 1..N and cut it into the seven Venn regions plus the rest."""
    sizes = p.region_sizes
    if min(sizes) < 0:
        raise InvalidInput(f"profile has a negative region size: {sizes}")
    perm = rng.permutation(p.N) + 1
    cuts = np.cumsum(sizes)
    r123, r12, r13, r23, r1, r2, r3 = np.split(perm[:cuts[-1]], cuts[:-1])
    c1 = np.concatenate([r123, r12, r13, r1])
    c2 = np.concatenate([r123, r12, r23, r2])
    c3 = np.concatenate([r123, r13, r23, r3])
    return _as_set(c1), _as_set(c2), _as_set(c3)


@dataclass(frozen=True)
class CognitiveRadioSpec:
    """Secondary users (SUs) and primary users (PUs) in a square field.

    Channels outside the core are handed out to the PUs that interfere with
    at least one SU; an SU loses every channel of every PU within range.
    """

    N: int = 256
    K: int = 100
    num_pus: int = 50
    area_side: float = 1000.0
    interference_range: float = 500.0
    core_size: int = 10

    def __post_init__(self):
        if not 1 <= self.core_size <= self.N:
            raise InvalidInput("core_size must lie in [1, N]")
        if self.K < 1 or self.num_pus < 0:
            raise InvalidInput("need K >= 1 and num_pus >= 0")
        if self.area_side <= 0 or self.interference_range < 0:
            raise InvalidInput("area_side must be positive and the range non-negative")


@dataclass(frozen=True)
class CognitiveRadioInstance:
    sets: List[ChannelSet]
    core: ChannelSet
    active_pus: int

    @property
    def common(self) -> ChannelSet:
        acc = set(self.sets[0])
        for s in self.sets[1:]:
            acc &= set(s)
        return tuple(sorted(acc))

    @property
    def core_is_exact(self) -> bool:
        return self.common == self.core


def gen_cognitive_radio_instance(spec: CognitiveRadioSpec,
                                 rng: np.random.Generator) -> CognitiveRadioInstance:
    perm = rng.permutation(spec.N) + 1
    core, pu_channels = np.sort(perm[:spec.core_size]), perm[spec.core_size:]
    su = rng.uniform(0.0, spec.area_side, size=(spec.K, 2))
    pu = rng.uniform(0.0, spec.area_side, size=(spec.num_pus, 2))
    dist = np.linalg.norm(su[:, None, :] - pu[None, :, :], axis=2)
    blocks = dist < spec.interference_range  # K x num_pus
    active = np.flatnonzero(blocks.any(axis=0))
    owner = np.full(spec.N + 1, -1, dtype=np.int64)  # channel -> PU index
    if active.size:
        # pu_channels is already in random order; shuffle which PU gets which share
        shares = np.array_split(pu_channels, active.size)
        for pu_idx, share in zip(rng.permutation(active), shares):
            owner[share] = pu_idx
    ch = np.arange(1, spec.N + 1)
    taken = owner[ch] >= 0
    avail = np.ones((spec.K, spec.N), dtype=bool)
    avail[:, taken] = ~blocks[:, owner[ch][taken]]
    sets = [tuple((np.flatnonzero(row) + 1).tolist()) for row in avail]
    return CognitiveRadioInstance(sets, _as_set(core), int(active.size))


def gen_cognitive_radio(spec: CognitiveRadioSpec, rng: np.random.Generator) -> List[ChannelSet]:
    return gen_cognitive_radio_instance(spec, rng).sets
