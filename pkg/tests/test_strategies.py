import numpy as np
import pytest

from rendezvous.engine import make_users, run_async, run_sync
from rendezvous.errors import Unsupported
from rendezvous.schedules import ModuloSchedule, RandomPermSchedule
from rendezvous.strategies import (
    SpreadOutPhase,
    Stage,
    StrategyKind,
    apply_generic,
    apply_hybrid,
    apply_spreadout3,
    apply_stick,
    hop_sets,
)


def _random_sets(rng, N, K):
    common = int(rng.integers(1, N + 1))
    out = []
    for _ in range(K):
        mask = rng.random(N) < rng.uniform(0.2, 0.9)
        mask[common - 1] = True
        out.append(np.flatnonzero(mask) + 1)
    return out


def _snapshot(users):
    return [(u.c.tolist(), u.c_known.tolist(), u.c_stick.tolist(), u.seed, u.offset) for u in users]


def test_generic_changes_nothing():
    users = make_users([[1, 2, 3], [2, 3, 4]])
    before = _snapshot(users)
    assert apply_generic(frozenset({0, 1}), users) is False
    assert _snapshot(users) == before


def test_stick_example():
    users = make_users([[1, 2, 3], [2, 3, 4], [3, 9]])
    assert apply_stick(frozenset({0, 1}), users)
    for k in (0, 1):
        assert users[k].c_known.tolist() == users[k].c_stick.tolist() == [2, 3]
        assert [x.tolist() for x in hop_sets(StrategyKind.STICK, users[k])] == [[2, 3], [2, 3]]
    assert users[2].c_stick.tolist() == [3, 9]
    assert apply_stick(frozenset({0, 1}), users) is False


def test_hybrid_updates_stick_set_on_odd_slots_only():
    users = make_users([[1, 2, 3], [2, 3, 4]])
    assert apply_hybrid(frozenset({0, 1}), users, t=4)
    assert users[0].c_known.tolist() == [2, 3]
    assert users[0].c_stick.tolist() == [1, 2, 3]
    odd, even = hop_sets(StrategyKind.HYBRID, users[0])
    assert (odd.tolist(), even.tolist()) == ([1, 2, 3], [1, 2, 3])
    assert apply_hybrid(frozenset({0, 1}), users, t=5)
    odd, even = hop_sets(StrategyKind.HYBRID, users[0])
    assert (odd.tolist(), even.tolist()) == ([2, 3], [1, 2, 3])


@pytest.mark.parametrize("strategy", ["stick", "hybrid", "spreadout3"])
@pytest.mark.parametrize("setting", ["sync", "async"])
def test_known_sets_never_lose_the_global_core(strategy, setting):
    rng = np.random.default_rng(hash((strategy, setting)) % 2**32)
    for trial in range(40):
        N = int(rng.integers(3, 40))
        sets = _random_sets(rng, N, 3 if strategy == "spreadout3" else int(rng.integers(2, 7)))
        core = set.intersection(*map(set, sets))
        if setting == "sync":
            users = make_users(sets)
            run_sync(users, RandomPermSchedule(N, trial), strategy, stop_on_rendezvous=False,
                     max_slots=6 * N)
        else:
            users = make_users(sets, seeds=rng.integers(0, 2**31, len(sets)),
                               offsets=rng.integers(0, N, len(sets)))
            run_async(users, ModuloSchedule.for_channels(N), strategy, T0=5,
                      stop_on_rendezvous=False, max_slots=6 * N)
        for u in users:
            assert core <= set(u.c_known.tolist()) <= set(u.c.tolist())
            assert core <= set(u.c_stick.tolist()) <= set(u.c.tolist())


def test_hybrid_hops_on_full_set_in_even_slots():
    rng = np.random.default_rng(2)
    for trial in range(20):
        N = 30
        sets = _random_sets(rng, N, 4)
        sched = RandomPermSchedule(N, trial)
        res = run_sync(make_users(sets), sched, "hybrid", max_slots=80, stop_on_rendezvous=False,
                       record_selections=True)
        for t in range(2, 81, 2):
            assert res.selections[t - 1].tolist() == [sched.select(t, c) for c in sets]


def test_spreadout_requires_three_users():
    with pytest.raises(Unsupported):
        SpreadOutPhase().apply(frozenset({0, 1}), make_users([[1], [1]]), 1, lambda *a: None)


def test_spreadout_identical_sets():
    res = run_sync(make_users([[2, 5, 7]] * 3), RandomPermSchedule(8, 1), "spreadout3")
    assert res.ttr == 1
    assert [s for _, s in res.phases] == [Stage.DONE]


def test_spreadout_stages_move_forward_and_aware_meets_next_slot():
    rng = np.random.default_rng(7)
    aware_seen = 0
    for trial in range(300):
        N = int(rng.integers(4, 40))
        sets = _random_sets(rng, N, 3)
        res = run_sync(make_users(sets), RandomPermSchedule(N, trial), "spreadout3",
                       max_slots=20_000)
        stages = [s for _, s in res.phases]
        assert stages == sorted(stages) and len(set(stages)) == len(stages)
        assert stages[-1] is Stage.DONE
        assert res.phases[-1][0] == res.ttr
        if Stage.AWARE in stages:
            aware_seen += 1
            aware_slot = dict((s, t) for t, s in res.phases)[Stage.AWARE]
            assert res.ttr == aware_slot + 1
        assert not res.anomalies
    assert aware_seen > 20


def test_spreadout_predictions_come_true():
    # the informed user chosen to pass the sets meets the pending user exactly when predicted
    rng = np.random.default_rng(9)
    for trial in range(200):
        N = int(rng.integers(4, 40))
        sets = _random_sets(rng, N, 3)
        phase = SpreadOutPhase()
        users = make_users(sets)
        sched = RandomPermSchedule(N, trial)
        from rendezvous.engine import Protocol, _Run
        run = _Run(users, Protocol(sched), StrategyKind.SPREADOUT3, 20_000, True, True, False)
        res = run.run()
        slots = dict((s, t) for t, s in res.phases)
        if Stage.SECOND_MET in slots and run.phase.passer is not None:
            meet = min(t for t, s in res.phases if s in (Stage.AWARE, Stage.DONE))
            assert meet == run.phase.predicted


def test_apply_spreadout3_wrapper():
    users = make_users([[1, 2], [2, 3], [2, 4]])
    phase = SpreadOutPhase()
    assert apply_spreadout3(frozenset({0, 1}), users, phase, 1, lambda *a: None)
    assert phase.stage is Stage.FIRST_MET and phase.pair == (0, 1)
    assert users[0].c_known.tolist() == [2]


@pytest.mark.parametrize("strategy", ["stick", "hybrid"])
def test_coupled_runs_never_slower_than_generic(strategy):
    rng = np.random.default_rng(11)
    for trial in range(300):
        N = int(rng.integers(3, 48))
        sets = _random_sets(rng, N, int(rng.integers(2, 6)))
        sched = RandomPermSchedule(N, trial)
        base = run_sync(make_users(sets), sched, "generic").ttr
        assert run_sync(make_users(sets), sched, strategy).ttr <= base
