import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from rendezvous.analytic import (
    AWARE,
    FINAL,
    INFINITE,
    NoCommonChannelWarning,
    ThreeUserProfile,
    ettr_consistent,
    ettr_random_baseline,
    jaccard,
    jaccard_counts,
    mttr_bound,
    pairwise_stick_ettr,
    spreadout_absorption_times,
    spreadout_ettr3,
    spreadout_matrix,
    stick_ettr3,
    three_user_event_probs,
)
from rendezvous.errors import DegenerateChain, InvalidInput


def test_jaccard_examples():
    assert jaccard([{1, 2, 3}, {1, 2, 3}]) == 1
    assert jaccard_counts(60, 60, 30) == Fraction(1, 3)
    assert jaccard([{1, 2}, {2, 3}, {2, 4}]) == Fraction(1, 4)
    with pytest.warns(NoCommonChannelWarning):
        assert jaccard([{1}, {2}]) == 0


def test_ettr_and_bounds():
    assert ettr_consistent(Fraction(1)) == 1
    assert ettr_consistent(Fraction(1, 3)) == 3
    assert ettr_consistent(0) == INFINITE
    assert mttr_bound(256, 30) == 227
    assert mttr_bound(17, 17) == 1
    with pytest.raises(InvalidInput):
        mttr_bound(10, 0)
    assert ettr_random_baseline(60, 60, 30) == 120
    assert ettr_random_baseline(3, 3, 0) == INFINITE


def test_profile_validation():
    with pytest.raises(InvalidInput):
        ThreeUserProfile(2, 2, 2, 1, 1, 1, 2)
    with pytest.raises(InvalidInput):
        ThreeUserProfile(2, 2, 2, 3, 1, 1, 1)
    with pytest.raises(InvalidInput):
        ThreeUserProfile(2, 2, 2, 0, 0, 0, 0, N=5)
    with pytest.raises(InvalidInput):
        ThreeUserProfile(1, 2, 2, 1, 1, 1, 0)  # user 1 would need -1 exclusive channels
    p = ThreeUserProfile.symmetric(60, 5, 3)
    assert p.exclusive == (60 - 2 * 3 - 5,) * 3
    assert p.n_union == 5 + 3 * 3 + 3 * (60 - 11)


def test_event_probability_examples():
    same = ThreeUserProfile(4, 4, 4, 4, 4, 4, 4, N=8)
    assert three_user_event_probs(same) == (0, 0, 0, 1, 0)
    small = ThreeUserProfile(2, 2, 2, 1, 1, 1, 1, N=8)
    e = three_user_event_probs(small)
    assert e == (Fraction(1, 12),) * 3 + (Fraction(1, 4), Fraction(1, 2))
    assert sum(e) == 1


def _enumerated_event_probs(p: ThreeUserProfile):
    sizes = p.region_sizes
    labels = iter(range(p.n_union))
    regions = [[next(labels) for _ in range(k)] for k in sizes]
    r123, r12, r13, r23, r1, r2, r3 = regions
    sets = [r123 + r12 + r13 + r1, r123 + r12 + r23 + r2, r123 + r13 + r23 + r3]
    counts = [0] * 5
    for order in itertools.permutations(range(p.n_union)):
        picks = [min(s, key=order.__getitem__) for s in sets]
        if picks[0] == picks[1] == picks[2]:
            counts[3] += 1
        elif picks[0] == picks[1]:
            counts[0] += 1
        elif picks[0] == picks[2]:
            counts[1] += 1
        elif picks[1] == picks[2]:
            counts[2] += 1
        else:
            counts[4] += 1
    total = math.factorial(p.n_union)
    return tuple(Fraction(c, total) for c in counts)


def _profiles(max_union):
    for sizes in itertools.product(range(max_union + 1), repeat=7):
        if sizes[0] >= 1 and sum(sizes) <= max_union:
            r123, r12, r13, r23, r1, r2, r3 = sizes
            yield ThreeUserProfile(r123 + r12 + r13 + r1, r123 + r12 + r23 + r2,
                                   r123 + r13 + r23 + r3, r123 + r12, r123 + r13,
                                   r123 + r23, r123, N=16)


def test_event_probabilities_match_enumeration_small():
    for p in _profiles(5):
        assert three_user_event_probs(p) == _enumerated_event_probs(p)


def test_pairwise_and_stick_examples():
    same = ThreeUserProfile(3, 3, 3, 3, 3, 3, 3, N=8)
    assert pairwise_stick_ettr(same, (1, 2)) == 1
    assert stick_ettr3(same) == 1
    p = ThreeUserProfile(3, 3, 3, 2, 1, 1, 1, N=8)
    assert pairwise_stick_ettr(p, (1, 2)) == 4
    small = ThreeUserProfile(2, 2, 2, 1, 1, 1, 1, N=8)
    assert pairwise_stick_ettr(small, (2, 3)) == 2
    assert stick_ettr3(small) == 3
    with pytest.raises(InvalidInput):
        pairwise_stick_ettr(small, (1, 1))


def test_pairwise_stick_is_inverse_jaccard_of_merged_sets():
    rng = np.random.default_rng(1)
    for p in _profiles(6):
        for a, b in ((1, 2), (1, 3), (2, 3)):
            c = 6 - a - b
            merged_vs_third = Fraction(p.n123, p.overlap(a, b) + p.size(c) - p.n123)
            assert pairwise_stick_ettr(p, (a, b)) == 1 / merged_vs_third


def test_stick_never_worse_than_generic():
    profiles = list(_profiles(9))
    rng = np.random.default_rng(0)
    for i in rng.choice(len(profiles), size=1000, replace=False):
        p = profiles[i]
        assert stick_ettr3(p) <= ettr_consistent(p.jaccard)


def test_infinite_marker_without_core():
    p = ThreeUserProfile(2, 2, 2, 1, 1, 1, 0, N=8)
    assert stick_ettr3(p) == INFINITE
    assert spreadout_ettr3(p) == INFINITE
    assert pairwise_stick_ettr(p, (1, 2)) == INFINITE


def test_spreadout_chain_structure():
    for p in _profiles(6):
        chain = spreadout_matrix(p)
        assert chain.row_sums() == [1] * 12
        assert chain.is_upper_triangular()
        assert chain.prob(FINAL, FINAL) == 1
        assert chain.prob(AWARE, FINAL) == 1
        times = spreadout_absorption_times(chain)
        assert times[AWARE - 1] == 1
        assert all(t >= 1 for t in times)


def test_spreadout_row_example():
    # state R_12,13: pending user 2
    p = ThreeUserProfile(3, 4, 3, 2, 1, 2, 1, N=16)
    chain = spreadout_matrix(p)
    assert (chain.prob(5, FINAL), chain.prob(5, AWARE), chain.prob(5, 5)) == (
        Fraction(1, 4), Fraction(2, 4), Fraction(1, 4))


def test_spreadout_identical_sets():
    same = ThreeUserProfile(5, 5, 5, 5, 5, 5, 5, N=8)
    assert spreadout_matrix(same).prob(1, FINAL) == 1
    assert spreadout_ettr3(same) == 1


def test_degenerate_chain_detected():
    # user 3 shares nothing with the others
    p = ThreeUserProfile(2, 2, 1, 1, 0, 0, 0, N=8)
    with pytest.raises(DegenerateChain):
        spreadout_absorption_times(spreadout_matrix(p))


def test_spreadout_by_generic_linear_solve():
    # independent oracle: (I - Q) t = 1 over the transient states
    for p in list(_profiles(5))[::37]:
        chain = spreadout_matrix(p)
        Q = [[chain.prob(i, j) for j in range(1, 12)] for i in range(1, 12)]
        A = [[(1 if i == j else 0) - Q[i][j] for j in range(11)] + [Fraction(1)]
             for i in range(11)]
        for col in range(11):
            piv = next(r for r in range(col, 11) if A[r][col] != 0)
            A[col], A[piv] = A[piv], A[col]
            for r in range(11):
                if r != col and A[r][col] != 0:
                    f = A[r][col] / A[col][col]
                    A[r] = [x - f * y for x, y in zip(A[r], A[col])]
        solution = [A[i][11] / A[i][i] for i in range(11)]
        assert solution == spreadout_absorption_times(chain)
