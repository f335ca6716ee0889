import itertools
import math
from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit import descriptors as D
from borelkit import reductions as R
from borelkit.descriptors import Matrix, UltimatelyPeriodic
from borelkit.trees import pair_code

seeds = st.integers(0, 10 ** 6)
bits = st.integers(0, 1)
ups = st.builds(UltimatelyPeriodic, st.lists(bits, max_size=3).map(tuple),
                st.lists(bits, min_size=1, max_size=3).map(tuple))
eighths = st.integers(1, 8).map(lambda k: Fraction(k, 8))
terms = st.builds(R.Term, ups, eighths, st.sampled_from(R.DECAYS))
realseqs = st.builds(R.RealSeq, st.lists(eighths, max_size=3).map(tuple), st.lists(terms, max_size=2).map(tuple))


def test_verdicts_refuse_truth_testing():
    with pytest.raises(TypeError):
        bool(R.EQUIV)
    assert R.EQUIV.definite and not R.EqVerdict("Unknown").definite


@given(st.integers(-1000, 1000), st.integers(0, 1000))
def test_pairing_round_trips(eta, n):
    assert R.unzigzag(R.zigzag(eta)) == eta
    assert R.pi_decode(R.pi_code(n, eta)) == (n, eta)


def test_pairing_is_onto_an_initial_segment():
    codes = {R.pi_code(n, eta) for n in range(60) for eta in range(-60, 60)}
    assert set(range(1500)) <= codes


@given(st.fractions(0, 1), st.integers(0, 12))
def test_round_below(v, k):
    r = R.round_below(v, k)
    assert (r * 2 ** k).denominator == 1
    if v == 0:
        assert r == 0
    else:
        assert r < v <= r + Fraction(1, 2 ** k)


# ---------------------------------------------------------------- real sequences, window oracles

@given(realseqs, realseqs)
def test_c0_verdict_matches_far_window(x, y):
    v = R.c0_real(x, y)
    gap = max(abs(x.value(n) - y.value(n)) for n in range(600, 660))
    assert v.kind == ("Equivalent" if gap < Fraction(1, 100) else "Inequivalent")


@given(realseqs, realseqs)
def test_l1_verdict_matches_tail_sums(x, y):
    v = R.lp_real(x, y, 1)
    tail = sum(abs(float(x.value(n) - y.value(n))) for n in range(1 << 8, 1 << 13))
    assert v.kind == ("Equivalent" if tail < 0.05 else "Inequivalent")


@given(realseqs, realseqs)
def test_limsup_gap_matches_window(x, y):
    g = R.limsup_gap(x, y)
    # decaying terms are below 1/600 on this window
    w = max(abs(x.value(n) - y.value(n)) for n in range(600, 660))
    assert abs(w - g) < Fraction(1, 100)


def test_grid_examples():
    b = R.map_grid_z0(R.grid_from_values([0, 1, Fraction(1, 4)]))
    assert b.block(1) == {2, 3} and b.block(2) == {4}
    with pytest.raises(ValueError):
        R.grid_from_values([0, Fraction(1, 3)])
    with pytest.raises(ValueError):
        R.GridSeq(R.RealSeq((), (R.Term(D.EVERYTHING, Fraction(3, 2)),)))


@given(realseqs.filter(lambda s: all(0 <= v <= 1 for v in s.head) and sum(t.coef for t in s.terms) <= 1),
       st.integers(0, 12))
def test_grid_counts(s, n):
    g = R.GridSeq(s)
    assert g.value(n) <= s.value(n) < g.value(n) + Fraction(1, 2 ** n)
    assert R.BlockCodedSet(g).elements_below(1 << (n + 1)) == sorted(
        m for k in range(n + 1) for m in R.BlockCodedSet(g).block(k))


@given(realseqs)
def test_clip_grid_values(s):
    c = R.map_c0_grid(s)
    for k in range(40):
        n, eta = R.pi_decode(k)
        want = min(max(s.value(n) - eta, 0), 1)
        assert c.clipped(k) == want
        assert c.value(k) == R.round_below(want, k)


# ---------------------------------------------------------------- density and counting

def test_z_sets_enumerate_subsets_once_per_block():
    for n in range(1, 7):
        subsets = [R.z_set(j) for j in range(1 << n, 1 << (n + 1))]
        assert len(set(subsets)) == 1 << n
        assert all(s <= set(range(n)) for s in subsets)
    with pytest.raises(ValueError):
        R.z_set(0)


@given(ups, st.integers(2, 300))
def test_count_seq(x, j):
    n = j.bit_length() - 1
    want = Fraction(sum(1 for i in R.z_set(j) if x.contains(i)), n)
    assert R.map_z0_c0(x).value(j) == want


@given(ups, ups)
def test_count_seq_sup_gap_by_block(x, y):
    a, b = R.map_z0_c0(x), R.map_z0_c0(y)
    n = 9
    block_sup = max(abs(a.value(j) - b.value(j)) for j in range(1 << n, 1 << (n + 1)))
    diff = lambda u, v: sum(1 for i in range(n) if u.contains(i) and not v.contains(i))
    assert block_sup == Fraction(max(diff(x, y), diff(y, x)), n)


@given(ups)
def test_upper_density_of_periodic_sets(x):
    N = 12 * 60
    assert R.upper_density(x) == Fraction(sum(x.contains(n) for n in range(60, 60 + N)), N)


# ---------------------------------------------------------------- summable images

def test_e2_l1_example():
    assert R.map_e2_l1(D.finite_set([1, 3])).window(5) == [0, Fraction(1, 2), 0, Fraction(1, 4), 0]


def test_harmonic_blocks():
    hb = R.HarmonicBlocks(K=6)
    seen = set()
    for n in range(4):
        for k in range(2 ** n):
            b = hb.block(n, k)
            assert not b & seen
            seen |= b
            err = Fraction(1, 2 ** n) - sum(Fraction(1, j + 1) for j in b)
            assert 0 <= err < Fraction(1, 2 ** (n + 6))
    with pytest.raises(ValueError):
        hb.block(1, 2)
    with pytest.raises(RuntimeError, match="budget"):
        tight = R.HarmonicBlocks(K=30, budget=20)
        for n in range(4):
            for k in range(2 ** n):
                tight.block(n, k)


def test_harmonic_block_set_weight():
    g = R.grid_from_values([1, Fraction(1, 2), Fraction(3, 4)])
    hs = R.map_l1grid_e2(g, K=8)
    w = sum(Fraction(1, j + 1) for j in hs.members_through(2))
    want = sum(g.value(n) for n in range(3))
    assert abs(w - want) <= want * Fraction(1, 2 ** 8)


# ---------------------------------------------------------------- E0, E1, E3

def test_row_matrix_reading():
    x = D.finite_set([2, 5])
    M = R.map_e0_e1(x)
    assert M.column(2) == {0} and M.column(3) == frozenset()
    assert M.contains((5, 0)) and not M.contains((0, 5))


def test_e3_c0_example():
    M = Matrix.of({2: D.finite_set([0])}, D.EMPTY)
    w = R.map_e3_c0(M).window(8)
    assert w[pair_code(2, 0)] == Fraction(1, 3)
    assert sum(1 for v in w if v) == 1


@given(st.dictionaries(st.integers(0, 3), ups, max_size=3), ups,
       st.dictionaries(st.integers(0, 3), ups, max_size=3), ups)
def test_interleaved_limsup_matches_window(cx, dx, cy, dy):
    x, y = Matrix.of(cx, dx), Matrix.of(cy, dy)
    v = R.c0_interleaved(R.map_e3_c0(x), R.map_e3_c0(y))
    # far out in every column n <= 4: positions pair_code(n, k) for k in [200, 236)
    far = [abs(R.map_e3_c0(x).value(j) - R.map_e3_c0(y).value(j))
           for n in range(5) for j in (pair_code(n, k) for k in range(200, 236))]
    assert v.kind == ("Equivalent" if max(far) == 0 else "Inequivalent")


def test_e3_t2_codes():
    M = Matrix.of({0: D.finite_set([1])}, D.EMPTY)
    out = R.map_e3_t2(M, 2, 3)
    assert out[pair_code(0, 0)] == (0, (0, 1, 0))
    assert out[pair_code(1, 0)] == (0, (0, 1, 0))  # s = (0) flips nothing
    assert out[pair_code(2, 0)] == (0, (1, 1, 0))  # s = (1) flips bit 0


# ---------------------------------------------------------------- embeddings

@given(seeds, st.integers(1, 6))
def test_frechet_embeddings_are_isometric(seed, n):
    M = R.random_metric_space(np.random.default_rng(seed), n)
    for method in ("stepwise", "oracle"):
        E = R.frechet_embed(M, method)
        assert R.is_isometric(M, E)
    E = R.frechet_embed(M)
    if n > 1:
        assert E.dim == (n * (n - 1) // 2 if not E.fallback else n)


def test_oracle_embedding_of_a_line():
    from borelkit.c0eq import line_space
    assert R.oracle_embed(line_space([0, 1, 2])) == [(0, 1, 2), (1, 0, 1), (2, 1, 0)]
    with pytest.raises(ValueError):
        R.frechet_embed(line_space([0, 1]), "bogus")


@given(seeds)
def test_family_points_and_blocks(seed):
    rng = np.random.default_rng(seed)
    x, y = R.sample_family_points(rng)
    bx, by = R.map_c0family_dmax(x), R.map_c0family_dmax(y)
    m = len(x.spaces)
    for k in range(1, 20):
        S = x.spaces[(k - 1) % m]
        assert R.sup_dist(bx.block(k), by.block(k)) == S.d[x.choice(k)][y.choice(k)]


def test_family_point_validation():
    from borelkit.c0eq import uniform_space
    with pytest.raises(ValueError):
        R.FamilyPoint((uniform_space(2),), (), ())
    with pytest.raises(ValueError):
        R.FamilyPoint((uniform_space(2),), (2,), (0,))


# ---------------------------------------------------------------- tuples

def test_t2_examples():
    assert R.map_t2((2, 0, 1)) == {2, 3, 5}
    assert R.t2_normalize((1, 1, 2), "count") == ((2, 1), (2, 1), (1, 2))
    with pytest.raises(ValueError):
        R.t2_normalize((), "dup")


tuples = st.lists(st.integers(0, 3), max_size=5).map(tuple)
nonempty = st.lists(st.integers(0, 3), min_size=1, max_size=5).map(tuple)


@given(tuples, tuples)
def test_t2_map_is_injective(x, y):
    assert (x == y) == (R.map_t2(x) == R.map_t2(y))


@given(nonempty, nonempty)
def test_duplication_turns_sets_into_orbits(x, y):
    dx, dy = R.t2_normalize(x), R.t2_normalize(y)
    window = lambda d: Counter(d.value(j) for j in range(4096))
    # every value recurs in each window of length 4096 with a count growing with the window
    assert (set(x) == set(y)) == (set(window(dx)) == set(window(dy)))
    assert R.orbit_dup(dx, dy).kind == R.t2_tuple(x, y).kind


@given(tuples, tuples)
def test_count_map_turns_orbits_into_sets(x, y):
    same_orbit = sorted(x) == sorted(y)
    cx, cy = R.t2_normalize(x, "count"), R.t2_normalize(y, "count")
    assert same_orbit == (set(cx) == set(cy))


# ---------------------------------------------------------------- hull

@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=8))
def test_equivalence_hull_against_components(R_):
    pts = range(8)
    G = nx.Graph()
    G.add_nodes_from(pts)
    G.add_edges_from(R_)
    assert R.equivalence_hull(pts, R_) == sorted(sorted(c) for c in nx.connected_components(G))


def test_hull_example():
    cls = R.equivalence_hull("abc", [("a", "b")])
    assert cls == [["a", "b"], ["c"]]
    assert R.hull_pairs(cls) == {("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"), ("c", "c")}


# ---------------------------------------------------------------- Koch curves

def test_koch_curve_shape():
    c = R.koch_curve(0.6, 3)
    assert c.shape == (4 ** 3 + 1, 2)
    assert np.allclose(c[0], [0, 0]) and np.allclose(c[-1], [1, 0])
    g = R.koch_generator(0.6)
    r = 4 ** -0.6
    assert np.allclose(np.abs(np.diff(g)), r)
    with pytest.raises(ValueError):
        R.koch_curve(0.4, 2)
    with pytest.raises(ValueError):
        R.koch_curve(0.6, 11)


def test_koch_self_similarity():
    a = 0.7
    c2, c3 = R.koch_curve(a, 2), R.koch_curve(a, 3)
    assert np.allclose(c3[::4], c2)
    # the first quarter is the whole curve scaled by 4^-alpha
    assert np.allclose(np.linalg.norm(c3[16] - c3[0]), 4 ** -a)


@given(st.lists(st.fractions(0, 1), min_size=1, max_size=4), st.lists(st.fractions(0, 1), min_size=1, max_size=4))
def test_koch_sandwich(x, y):
    p, q = 1.2, 2.0
    curve = R.koch_curve(p / q, 6)
    bounds = R.koch_ratio_bounds(p / q, 6, grid=4000)
    assert 0 < bounds[0] < bounds[1]
    xs = [round(float(v) * 4 ** 6) / 4 ** 6 for v in x]
    ys = [round(float(v) * 4 ** 6) / 4 ** 6 for v in y]
    rep = R.lp_lq_sandwich(xs, ys, p, q, bounds, 6, curve)
    # sampled extremes can miss the true ones; allow a factor of 2 each side
    assert 0.5 * rep["lower"] <= rep["value"] + 1e-12
    assert rep["value"] <= 2 * rep["upper"] + 1e-12
    with pytest.raises(ValueError):
        R.map_lp_lq([0.5], 1.0, 2.5)


# ---------------------------------------------------------------- suites

@pytest.mark.parametrize("name", sorted(set(R.CASES) - {"e0_e1_faulty", "t2_r_faulty"}))
def test_reduction_cases_agree(name):
    rep = R.run_reduction_suite(name, n=60, seed=3)
    assert rep["counterexamples"] == []
    assert rep["agreements"] + rep["unknowns"] == 60


@pytest.mark.parametrize("name", ["e0_e1_faulty", "t2_r_faulty"])
def test_faulty_cases_are_caught(name):
    rep = R.run_reduction_suite(name, n=100, seed=3)
    assert rep["counterexamples"]


def test_suite_is_reproducible():
    assert R.run_reduction_suite("e3_c0", 30, 5) == R.run_reduction_suite("e3_c0", 30, 5)
