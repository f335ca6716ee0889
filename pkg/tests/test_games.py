import itertools
import random
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit.games import (CappedPointset, check_ideal_sandwich, ideal_rank_verdict, solve_game,
                            symmetric_difference, vid)
from borelkit.normal_trees import binary_words, random_normal_tree
from borelkit.trees import rank

seeds = st.integers(0, 10 ** 6)


def random_pointset(rng, depth, cap, p):
    pairs = {(u, s) for n in range(depth + 1) for u in binary_words(n)
             for s in itertools.product(range(cap + 1), repeat=n) if rng.random() < p}
    return CappedPointset(frozenset(pairs), depth, cap)


def winner_oracle(f, u, X):
    """Minimax recursion on (sum, remaining budget) with II to move; zero moves are answered in place."""
    xs = X.slice(u)
    n = len(u)

    @lru_cache(maxsize=None)
    def i_survives(q, r):
        for t in itertools.product(*(range(b + 1) for b in r)):
            if not any(t):
                continue
            p = tuple(a + b for a, b in zip(q, t))
            rest = tuple(a - b for a, b in zip(r, t))
            if not any(all(a <= b for a, b in zip(p, x)) and i_survives(x, rest) for x in xs):
                return False
        return True

    return "I" if any(i_survives(q, tuple(f[:n])) for q in xs) else "II"


def test_pointset_caps_are_enforced():
    with pytest.raises(ValueError):
        CappedPointset(frozenset({((0,), (5,))}), 1, 2)
    with pytest.raises(ValueError):
        CappedPointset(frozenset({((0, 1), (0, 0))}), 1, 2)


def test_small_games():
    X = CappedPointset(frozenset({((0,), (1,))}), 1, 2)
    assert solve_game((0,), (0,), X) == "I"
    assert solve_game((1,), (0,), X) == "II"
    assert solve_game((0,), (1,), X) == "II"


@given(seeds)
def test_attractor_matches_minimax(seed):
    rng = random.Random(seed)
    X = random_pointset(rng, 2, 2, 0.5)
    for n in range(3):
        for u in binary_words(n):
            for f in itertools.product(range(3), repeat=n):
                assert solve_game(f, u, X) == winner_oracle(f, u, X)


@given(seeds)
def test_vid_routes_agree(seed):
    X = random_pointset(random.Random(seed), 2, 2, 0.4)
    assert vid(X, 2, 2, "dp") == vid(X, 2, 2, "attractor")


@given(seeds)
def test_vid_is_antitone(seed):
    rng = random.Random(seed)
    A = random_pointset(rng, 2, 2, 0.3)
    B = A.union(random_pointset(rng, 2, 2, 0.3))
    assert vid(B, 2, 2).nodes <= vid(A, 2, 2).nodes


def test_vid_of_empty_and_full_sets():
    assert vid(CappedPointset(frozenset(), 2, 2), 2, 2).nodes == {
        s for n in range(3) for s in itertools.product(range(3), repeat=n)}
    assert vid(CappedPointset.full(2, 2), 2, 2).is_empty()
    with pytest.raises(ValueError):
        vid(CappedPointset.full(1, 1), 1, 1, "bogus")


@given(seeds)
def test_symmetric_difference_brute_force(seed):
    rng = random.Random(seed)
    S, T = random_normal_tree(rng, 2, 2), random_normal_tree(rng, 2, 2)
    X = symmetric_difference(S, T, 2, 3)
    want = {(u, s) for n in range(3) for u in binary_words(n) for s in itertools.product(range(4), repeat=n)
            if S.member(u, s) != T.member(u, s)}
    assert X.pairs == want


@given(seeds)
def test_sandwich_holds(seed):
    rng = random.Random(seed)
    S, T = random_normal_tree(rng, 2, 2), random_normal_tree(rng, 2, 2)
    rep = check_ideal_sandwich(S, T, 2, 2)
    assert rep.ok, rep.to_json()


def test_rank_verdicts():
    empty = CappedPointset(frozenset(), 2, 1)
    v = ideal_rank_verdict(empty, 2, 2, 1)
    assert v["rank_level"] == "In" and v["ill_founded_proxy"] == "ApparentIn"
    full = CappedPointset.full(2, 1)
    v = ideal_rank_verdict(full, 1, 2, 1)
    assert v["rank_level"] == "Out" and v["rank"] == {"exact": -1}
    with pytest.raises(ValueError):
        ideal_rank_verdict(empty, 3, 2, 1)


def test_vid_rank_of_single_point():
    X = CappedPointset(frozenset({((0,), (1,))}), 1, 2)
    V = vid(X, 1, 2)
    assert V.nodes == {(), (1,), (2,)}
    assert rank(V).n == 1
