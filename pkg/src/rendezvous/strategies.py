"""What users do after part of the group has rendezvoused.

Users are mutated in place; every update returns True when it changed any
state that affects future channel selections.
"""

import enum
import logging
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from rendezvous.errors import Unsupported

log = logging.getLogger(__name__)


class StrategyKind(str, enum.Enum):
    GENERIC = "generic"
    STICK = "stick"
    SPREADOUT3 = "spreadout3"
    HYBRID = "hybrid"


def hop_sets(kind: StrategyKind, user):
    """The sets a user hops on in (odd, even) local slots."""
    if kind is StrategyKind.GENERIC:
        return user.c, user.c
    if kind is StrategyKind.HYBRID:
        return user.c_stick, user.c
    return user.c_stick, user.c_stick


def _intersect_all(arrays):
    it = iter(arrays)
    acc = next(it)
    for a in it:
        acc = np.intersect1d(acc, a, assume_unique=True)
    return acc


def apply_generic(group, users) -> bool:
    """Users keep their original hopping sequences."""
    return False


def apply_stick(group, users) -> bool:
    """Members adopt the intersection of their known common sets and hop on it."""
    known = _intersect_all(users[k].c_known for k in group)
    changed = False
    for k in group:
        u = users[k]
        if u.c_known.size != known.size or u.c_stick.size != known.size:
            changed = True
        u.c_known = known
        u.c_stick = known
    return changed


def apply_hybrid(group, users, t: int) -> bool:
    """Members always merge their known common sets; the stick-together set
    follows only on odd slots ``t``."""
    known = _intersect_all(users[k].c_known for k in group)
    changed = False
    for k in group:
        u = users[k]
        if u.c_known.size != known.size:
            changed = True
        u.c_known = known
        if t % 2 == 1:
            if u.c_stick.size != known.size:
                changed = True
            u.c_stick = known
    return changed


class Stage(enum.IntEnum):
    INITIAL = 0
    FIRST_MET = 1
    SECOND_MET = 2
    AWARE = 3
    DONE = 4


# predictor(pending_user, seed, offset, hop_set, after_slot) -> slot or None
Predictor = Callable[[object, int, int, np.ndarray, int], Optional[int]]


class SpreadOutPhase:
    """Information-passing state machine for three users.

    The first pair to meet swaps sets but keeps hopping as before.  When
    one of them (the bridge) meets the third user (the newcomer), both know
    every set.  Each predicts when it would meet the still-uninformed user
    (the pending user) while hopping on its intersection with the pending
    user's set; the earlier one keeps that task and the other moves to the
    triple intersection (on a tie both keep it and all three meet at once).
    Once the pending user is informed everyone hops on the triple
    intersection.
    """

    def __init__(self):
        self.stage = Stage.INITIAL
        self.pair = None
        self.bridge = self.pending = self.newcomer = None
        self.passer = None
        self.predicted = None
        self.anomalies = []
        self.history = []  # (slot, stage) after every transition

    def _enter(self, stage, slot):
        self.stage = stage
        self.history.append((slot, stage))

    def _core(self, users):
        return _intersect_all(u.c for u in users)

    def apply(self, group, users, slot: int, predictor: Predictor) -> bool:
        if len(users) != 3:
            raise Unsupported("the spread-out strategy is defined for exactly three users")
        group = frozenset(group)
        if len(group) == 3:
            core = self._core(users)
            for u in users:
                u.c_known = u.c_stick = core
            self._enter(Stage.DONE, slot)
            return True

        if self.stage is Stage.INITIAL:
            a, b = sorted(group)
            self.pair = (a, b)
            shared = np.intersect1d(users[a].c, users[b].c, assume_unique=True)
            users[a].c_known = users[b].c_known = shared
            self._enter(Stage.FIRST_MET, slot)
            return True

        if self.stage is Stage.FIRST_MET:
            if group == frozenset(self.pair):
                return False
            (bridge,) = group & set(self.pair)
            (newcomer,) = group - {bridge}
            (pending,) = set(self.pair) - {bridge}
            self.bridge, self.newcomer, self.pending = bridge, newcomer, pending
            core = self._core(users)
            ub, ux, up = users[bridge], users[newcomer], users[pending]
            ub.c_known = ux.c_known = core
            via_bridge = np.intersect1d(ub.c, up.c, assume_unique=True)
            via_newcomer = np.intersect1d(ux.c, up.c, assume_unique=True)
            tb = predictor(up, ub.seed, ub.offset, via_bridge, slot)
            tx = predictor(up, ux.seed, ux.offset, via_newcomer, slot)
            self._enter(Stage.SECOND_MET, slot)
            if tb is None and tx is None:
                self.anomalies.append(f"slot {slot}: no meeting with user {pending} within horizon")
                log.warning("spread-out: no predicted meeting with user %d after slot %d",
                            pending, slot)
                ub.c_stick = ux.c_stick = core
                return True
            if tx is None or (tb is not None and tb < tx):
                self.passer, self.predicted = bridge, tb
                ub.c_stick, ux.c_stick = via_bridge, core
            elif tb is None or tx < tb:
                self.passer, self.predicted = newcomer, tx
                ub.c_stick, ux.c_stick = core, via_newcomer
            else:
                self.passer, self.predicted = None, tb
                ub.c_stick, ux.c_stick = via_bridge, via_newcomer
            return True

        if self.stage is Stage.SECOND_MET:
            if self.pending not in group:
                return False
            core = self._core(users)
            for u in users:
                u.c_known = u.c_stick = core
            self._enter(Stage.AWARE, slot)
            return True

        return False


def apply_spreadout3(group, users, phase: SpreadOutPhase, slot: int,
                     predictor: Predictor) -> bool:
    return phase.apply(group, users, slot, predictor)
