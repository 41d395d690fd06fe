import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rendezvous.channels import channel_set, from_mask, to_mask
from rendezvous.errors import InvalidInput, InvalidScore, ResourceLimit
from rendezvous.permutations import Permutation, random_permutation
from rendezvous.selectors import (
    all_subsets,
    check_consistent,
    conjugate_select,
    consistent_tables,
    count_all_selectors,
    count_consistent,
    phi_max,
    phi_min,
    priority_tables,
    score_select,
    selector_from_priority,
    table_select,
    tabulate,
)

nonempty_sets = st.sets(st.integers(1, 12), min_size=1, max_size=12)


def test_phi_min_max_examples():
    assert phi_min({3, 5, 9}) == 3
    assert phi_min(range(1, 11)) == 1
    assert phi_min({7}) == 7
    assert phi_max({3, 5, 9}) == 9
    assert phi_max({7}) == 7


@pytest.mark.parametrize("f", [phi_min, phi_max])
def test_empty_set_rejected(f):
    with pytest.raises(InvalidInput):
        f(())


def test_phi_max_is_reversal_conjugate_of_phi_min():
    N = 4
    rev = Permutation(tuple(N + 1 - i for i in range(1, N + 1)))
    for m in all_subsets(N):
        c = from_mask(m)
        assert conjugate_select(rev, c) == phi_max(c)


def test_score_select_examples():
    assert score_select(lambda i: i, {2, 5}) == 2
    assert score_select(lambda i: -i, {2, 5}) == 5
    assert score_select(lambda i: 3 * i % 7, {1, 2, 3}) == 3


def test_score_select_rejects_ties():
    with pytest.raises(InvalidScore):
        score_select(lambda i: i % 2, {1, 3})


def test_conjugate_select_examples():
    assert conjugate_select(Permutation.identity(6), {2, 5, 6}) == 2
    assert conjugate_select(Permutation((4, 3, 2, 1)), {2, 3}) == 3
    assert conjugate_select(Permutation((2, 3, 4, 1)), {1, 4}) == 4


def test_priority_examples():
    sigma = Permutation((3, 1, 2))
    assert selector_from_priority(sigma, {1, 2}) == 1
    assert selector_from_priority(sigma, {2, 3}) == 3
    ident = Permutation.identity(5)
    for m in all_subsets(5):
        assert selector_from_priority(ident, from_mask(m)) == phi_min(from_mask(m))


@given(nonempty_sets, st.integers(0, 2**32 - 1))
def test_selectors_return_members(c, seed):
    pi = random_permutation(12, np.random.default_rng(seed))
    for f in (phi_min, phi_max, lambda s: conjugate_select(pi, s),
              lambda s: selector_from_priority(pi, s)):
        assert f(c) in c


@pytest.mark.parametrize("N", range(1, 7))
def test_priority_equals_inverse_conjugate(N):
    rng = np.random.default_rng(N)
    for _ in range(5):
        sigma = random_permutation(N, rng)
        for m in all_subsets(N):
            c = from_mask(m)
            assert selector_from_priority(sigma, c) == conjugate_select(sigma.inverse(), c)


def test_check_consistent_examples():
    assert check_consistent(tabulate(phi_min, 4), 4)
    bad = tabulate(phi_min, 3)
    bad[to_mask({1, 2, 3})] = 1
    bad[to_mask({1, 2})] = 2
    assert not check_consistent(bad, 3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        pi = random_permutation(5, rng)
        assert check_consistent(tabulate(lambda c: conjugate_select(pi, c), 5), 5)


def test_check_consistent_rejects_incomplete_or_foreign_tables():
    t = tabulate(phi_min, 3)
    del t[to_mask({1, 2})]
    with pytest.raises(InvalidInput):
        check_consistent(t, 3)
    t = tabulate(phi_min, 3)
    t[to_mask({2, 3})] = 1
    with pytest.raises(InvalidInput):
        check_consistent(t, 3)


def _subset_pairs_oracle(phi, N):
    # Definition checked over every pair c' subset of c'' directly.
    masks = list(all_subsets(N))
    for big in masks:
        for small in masks:
            if small & big == small and small != big:
                pick = phi[big]
                if small & (1 << (pick - 1)) and phi[small] != pick:
                    return False
    return True


@pytest.mark.parametrize("N", [2, 3])
def test_single_removal_check_agrees_with_definition(N):
    # every selector table on N <= 3 channels
    masks = list(all_subsets(N))
    choices = [from_mask(m) for m in masks]
    n = 0
    for picks in itertools.product(*choices):
        phi = dict(zip(masks, picks))
        assert check_consistent(phi, N) == _subset_pairs_oracle(phi, N)
        n += 1
    assert n == count_all_selectors(N)


@pytest.mark.parametrize("N", range(1, 7))
def test_conjugation_preserves_consistency(N):
    rng = np.random.default_rng(100 + N)
    base = tabulate(phi_max, N)
    for _ in range(3):
        pi = random_permutation(N, rng)
        inv = pi.inverse()
        conj = {m: inv(base[to_mask(pi.apply(from_mask(m)))]) for m in all_subsets(N)}
        assert check_consistent(conj, N)


@pytest.mark.parametrize("N,expected", [(1, 1), (2, 2), (3, 6), (4, 24), (5, 120)])
def test_count_consistent(N, expected):
    assert count_consistent(N) == expected == math.factorial(N)


def test_count_consistent_limits():
    with pytest.raises(ResourceLimit):
        count_consistent(7)
    with pytest.raises(InvalidInput):
        count_consistent(0)


@pytest.mark.parametrize("N", range(1, 6))
def test_every_consistent_table_is_a_relabeled_min(N):
    reps = {tuple(sorted(t.items())) for t in priority_tables(N)}
    assert len(reps) == math.factorial(N)
    found = {tuple(sorted(t.items())) for t in consistent_tables(N)}
    assert found == reps


def test_count_all_selectors():
    assert count_all_selectors(1) == 1
    assert count_all_selectors(3) == 2**3 * 3


def test_table_select_and_channel_sets():
    t = tabulate(phi_max, 4)
    assert table_select(t, [4, 1]) == 4
    assert channel_set([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(InvalidInput):
        channel_set([1, 1])
    with pytest.raises(InvalidInput):
        channel_set([5], N=4)
    with pytest.raises(InvalidInput):
        channel_set([])
    with pytest.raises(ResourceLimit):
        tabulate(phi_min, 13)


@given(nonempty_sets)
def test_mask_roundtrip(c):
    assert from_mask(to_mask(c)) == tuple(sorted(c))
