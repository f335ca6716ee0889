import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit.actions import (LevelMap, ReducedWord, bits_to_int, build_lipschitz_pair, e0_action, find_cycle,
                              identity_maps, int_to_bits, is_cycle, reduce_word, shift_action, two_core,
                              verify_pair, word, word_apply, word_concat, words_of_length)

letter_strings = st.text(alphabet="abAB", max_size=10)


@pytest.fixture(scope="module")
def maps8():
    return build_lipschitz_pair(8)


@given(letter_strings)
def test_word_times_inverse_is_identity(s):
    w = word(s)
    assert word_concat(w, w.inverse()).letters == ""
    assert reduce_word(w.letters) == w.letters


def test_reduced_word_counts():
    assert [len(list(words_of_length(n))) for n in range(5)] == [1, 4, 12, 36, 108]
    assert [w.letters for w in words_of_length(1)] == ["a", "b", "A", "B"]
    with pytest.raises(ValueError):
        ReducedWord("aA")


@given(st.integers(0, 255), st.integers(1, 8))
def test_bits_round_trip(v, n):
    v %= 1 << n
    assert bits_to_int(int_to_bits(v, n)) == v


@given(letter_strings, letter_strings, st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_words_act_on_the_left(maps8, u, v, x):
    U, V = word(u), word(v)
    assert word_apply(word_concat(U, V), x, maps8) == word_apply(U, word_apply(V, x, maps8), maps8)
    assert word_apply(U.inverse(), word_apply(U, x, maps8), maps8) == tuple(x)


def test_built_pair_verifies(maps8):
    rep = verify_pair(maps8)
    assert rep.ok, rep.violations[:3]
    assert len(rep.processed) == 7


def test_killed_words_lose_fixed_points_above_s(maps8):
    for n, w, s, _ in maps8.processed:
        lvl = n + 1
        perm = maps8.word_perm(w, lvl)
        for t in range(1 << lvl):
            if int_to_bits(t, lvl)[:len(s)] == tuple(s):
                assert perm[t] != t


def test_level_maps_are_prefix_preserving_bijections(maps8):
    for lv in (maps8.f, maps8.g):
        for n in range(8):
            assert sorted(lv[n + 1].tolist()) == list(range(1 << (n + 1)))
            assert np.array_equal(lv[n + 1] >> 1, np.repeat(lv[n], 2))


def test_verify_catches_corruption(maps8):
    bad = LevelMap.from_json(maps8.to_json())
    bad.f[5] = bad.f[5].copy()
    bad.f[5][[0, 1]] = bad.f[5][[1, 0]]
    bad.f[5][[2, 4]] = bad.f[5][[4, 2]]
    assert not verify_pair(bad).ok
    assert not verify_pair(identity_maps(4)).ok


def test_json_round_trip(maps8):
    again = LevelMap.from_json(maps8.to_json())
    assert all(np.array_equal(a, b) for a, b in zip(again.f + again.g, maps8.f + maps8.g))


@given(st.lists(st.integers(0, 7), max_size=8), st.lists(st.integers(0, 1), min_size=8, max_size=8))
def test_e0_action_is_an_involution(w, x):
    assert e0_action(w, e0_action(w, x)) == tuple(x)
    assert sum(a != b for a, b in zip(e0_action(w, x), x)) == len(set(w))


def test_shift_action():
    assert shift_action(2, {0, 1}, range(5)) == frozenset({2, 3})
    with pytest.raises(ValueError):
        shift_action(4, {0, 1}, range(5))
    with pytest.raises(ValueError):
        shift_action(0, {7}, range(5))
    mul = lambda g, h: word_concat(word(g), word(h)).letters
    assert shift_action("a", {"", "A"}, {"", "a", "A"}, mul) == frozenset({"a", ""})


graphs = st.integers(2, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]))))


@given(graphs)
def test_find_cycle_against_networkx(g):
    n, edges = g
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    cyc = find_cycle(range(n), edges)
    if nx.is_forest(G):
        assert cyc is None
    else:
        assert cyc is not None and is_cycle(cyc, edges)
    core, _ = two_core(range(n), edges)
    assert core == set(nx.k_core(G, 2).nodes)


def test_two_core_rejects_loops():
    with pytest.raises(ValueError):
        two_core([0], [(0, 0)])
