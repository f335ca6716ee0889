import itertools
import random
from collections import deque

import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit.normal_trees import (NormalTree, NormalTriTree, TriTree, binary_words, check_normal_tree, dominated, lip,
                                   lip_vs_slice, lr_check_properties, lr_transform, minimal_antichain, normalize_tritree,
                                   random_normal_tree, random_tritree, theta)

seeds = st.integers(0, 10 ** 6)


def lip_oracle(S, T, depth, cap):
    """f is in Lip(S, T) iff s in S_u implies s + f|m in T_u, scanning every s in a box."""
    box = max((max(g) for gs in S.gen.values() for g in gs if g), default=0)
    out = set()
    for n in range(depth + 1):
        for f in itertools.product(range(cap + 1), repeat=n):
            ok = True
            for m in range(n + 1):
                for u in binary_words(m):
                    for s in itertools.product(range(box + 1), repeat=m):
                        if S.member(u, s) and not T.member(u, tuple(a + b for a, b in zip(s, f[:m]))):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok and (n == 0 or f[:-1] in out):
                out.add(f)
    return out


def graph_distance(Q, a, b, s):
    """BFS distance in the graph joining x, y when Q has (x, y, t) or (y, x, t) with t <= s."""
    def edge(x, y):
        return x == y or any((p == x and q == y or p == y and q == x) and all(c <= d for c, d in zip(t, s))
                             for (p, q, t) in Q.triples if len(p) == len(s))
    words = binary_words(len(s))
    seen, todo = {a: 0}, deque([a])
    while todo:
        x = todo.popleft()
        for y in words:
            if y not in seen and edge(x, y):
                seen[y] = seen[x] + 1
                todo.append(y)
    return seen.get(b)


def test_minimal_antichain():
    assert minimal_antichain([(1, 2), (2, 1), (2, 2), (1, 3)]) == frozenset({(1, 2), (2, 1)})


@given(seeds)
def test_random_normal_trees_are_well_formed(seed):
    T = random_normal_tree(random.Random(seed), 3, 2)
    assert check_normal_tree(T) == []
    assert NormalTree.from_json(T.to_json()).to_json() == T.to_json()


@given(seeds)
def test_lip_matches_brute_force(seed):
    rng = random.Random(seed)
    S, T = random_normal_tree(rng, 2, 2), random_normal_tree(rng, 2, 2)
    assert lip(S, T, 2, 2).nodes == lip_oracle(S, T, 2, 2)


@given(seeds)
def test_lip_of_a_tree_with_itself_contains_zero(seed):
    S = random_normal_tree(random.Random(seed), 3, 2)
    L = lip(S, S, 3, 1)
    assert all((0,) * n in L for n in range(4))


def test_member_rejects_length_mismatch():
    T = NormalTree(1, {(): frozenset({()})})
    with pytest.raises(ValueError):
        T.member((0,), ())
    with pytest.raises(ValueError):
        T.member((0, 0), (0, 0))


@given(seeds)
def test_lr_transform_counts_graph_distance(seed):
    Q = random_tritree(random.Random(seed), 2, 1, p=0.2)
    R = lr_transform(Q)
    for n in range(Q.depth):
        for a, b in itertools.product(binary_words(n), repeat=2):
            for s in itertools.product(range(2), repeat=n):
                d = graph_distance(Q, a, b, s)
                for k in range(4):
                    want = d is not None and k >= d
                    for i, j in itertools.product((0, 1), repeat=2):
                        assert R.member(a + (i,), b + (j,), (k,) + s) == want


@given(seeds)
def test_lr_transform_properties_and_slices(seed):
    R = lr_transform(random_tritree(random.Random(seed), 3, 2))
    assert lr_check_properties(R).ok
    for x, y in itertools.product(binary_words(3), repeat=2):
        assert lip_vs_slice(R, x, y) == (True, None)


def test_lr_check_flags_an_asymmetric_explicit_tree():
    Q = TriTree(frozenset({((), (), ()), ((0,), (1,), (0,))}), 1, 1)
    kinds = {v["property"] for v in lr_check_properties(Q).violations}
    assert "i" in kinds and "ii" in kinds


def test_theta_rejects_trees_failing_the_properties():
    bad = NormalTriTree(1, {((), ()): frozenset({()}), ((0,), (1,)): frozenset({(0,)})})
    with pytest.raises(ValueError):
        theta(bad, (0,))
    assert normalize_tritree(TriTree(frozenset({((), (), ())}), 0, 0)).member((), (), ())


@given(seeds)
def test_theta_slices_are_normal(seed):
    R = lr_transform(random_tritree(random.Random(seed), 3, 2))
    T = theta(R, (0, 1, 1))
    assert check_normal_tree(T) == []
    assert dominated(T.gens(()), ())
