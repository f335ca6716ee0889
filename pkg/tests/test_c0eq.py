import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit import descriptors as D
from borelkit.c0eq import (ActingGroup, DMaxFamily, E0Family, E3Family, FiniteMetricSpace, LVFamily,
                           TableFamily, bottleneck, build_DA, check_lv, classify_c0, delta_r,
                           delta_r_bruteforce, extract_net, family_from_json, farthest_point_net, galaxy,
                           grainy_check, line_space, sigma, sigma_galaxy, uniform_space)
from borelkit.reductions import random_metric_space

seeds = st.integers(0, 10 ** 6)


def space(seed, n=None):
    import numpy as np
    rng = np.random.default_rng(seed)
    return random_metric_space(rng, n or int(rng.integers(2, 7)))


def delta_oracle(A, r):
    """Scan thresholds q just above each distance; galaxy diameters via closed reachability."""
    for w in sorted({A.d[i][j] for i in range(A.n) for j in range(A.n) if i != j}):
        for a in range(A.n):
            comp = {a}
            changed = True
            while changed:
                changed = False
                for i, j in itertools.product(list(comp), range(A.n)):
                    if j not in comp and A.d[i][j] <= w:
                        comp.add(j)
                        changed = True
            if max(A.d[x][y] for x in comp for y in comp) >= r:
                return w
    return math.inf


def test_space_validation():
    with pytest.raises(ValueError):
        FiniteMetricSpace(((0, 1), (2, 0)))
    with pytest.raises(ValueError):
        FiniteMetricSpace(((0, 1, 5), (1, 0, 1), (5, 1, 0)))
    with pytest.raises(ValueError):
        FiniteMetricSpace(((0, 0), (0, 0)))
    X = FiniteMetricSpace.from_json({"d": [[0, "1/2"], ["1/2", 0]]})
    assert X.dist(0, 1) == Fraction(1, 2) and X.exact


@given(seeds, st.fractions(Fraction(1, 10), 3))
def test_delta_r_matches_scans(seed, r):
    A = space(seed)
    assert delta_r(A, r) == delta_r_bruteforce(A, r) == delta_oracle(A, r)


@given(seeds)
def test_galaxy_is_closed_under_short_steps(seed):
    A = space(seed)
    q = sorted({A.d[0][j] for j in range(1, A.n)})[0] * Fraction(3, 2)
    G = galaxy(A, q, 0)
    assert all(j in G for i in G for j in range(A.n) if A.d[i][j] < q)


@given(seeds, st.integers(1, 3))
def test_bottleneck_matches_chain_enumeration(seed, m):
    A = space(seed, 4)
    B = bottleneck(A, m)
    for i, j in itertools.product(range(A.n), repeat=2):
        best = min(max(A.d[c[t]][c[t + 1]] for t in range(m))
                   for mid in itertools.product(range(A.n), repeat=m - 1)
                   for c in [(i,) + mid + (j,)])
        assert B[i][j] == best
    full = bottleneck(A)
    assert all(full[i][j] <= B[i][j] for i in range(A.n) for j in range(A.n))


@given(seeds, st.fractions(Fraction(1, 4), 2))
def test_nets(seed, r):
    A = space(seed)
    net = extract_net(A, r)
    assert all(A.d[x][y] >= r for x, y in itertools.combinations(net, 2))
    eps_net = farthest_point_net(A, r)
    assert all(min(A.d[j][x] for x in eps_net) <= r for j in range(A.n))


def test_extract_net_walks_a_far_chain():
    L = line_space(range(9))
    assert extract_net(L, Fraction(2)) == [0, 2, 4, 6, 8]
    assert extract_net(uniform_space(3), Fraction(1)) == [0, 1, 2]


def test_fixture_classification():
    assert classify_c0(E0Family()).to_json()["verdict"] == "E0like"
    assert classify_c0(E3Family()).to_json()["verdict"] == "E3like"
    assert classify_c0(DMaxFamily()).to_json()["verdict"] == "HasTurbulentSub"
    assert classify_c0(LVFamily()).to_json()["verdict"] == "HasTurbulentSub"
    DA = build_DA(DMaxFamily(), D.EVENS)
    assert classify_c0(DA).exact


def test_dmax_threshold_closed_form():
    for k in range(1, 8):
        assert delta_r(DMaxFamily().space(k), Fraction(1)) == Fraction(1, k)


def test_truncated_family_is_labelled_apparent():
    F = TableFamily([uniform_space(2)] * 6)
    v = classify_c0(F, 6).to_json()
    assert v["verdict"].startswith("Apparent(") and not v["exact"]
    with pytest.raises(ValueError):
        classify_c0(F, 0)


def test_family_json():
    F = family_from_json({"family": "DA", "base": {"family": "dmax"}, "A": {"kind": "periodic", "period": "01"}})
    assert F.base_indices(3) == [1, 3, 5]
    assert F.space(2).n == 4
    with pytest.raises(ValueError):
        family_from_json({"family": "nope"})


def test_lv_condition():
    assert check_lv(LVFamily(), 8).passed
    bad = TableFamily([line_space(range(5))])
    rep = check_lv(bad, 1)
    assert not rep.passed and rep.worst_slack == pytest.approx(-1.0)


def test_sigma_values():
    assert sigma("000", "011") == Fraction(3, 2)
    assert sigma("100", "000") == 0
    with pytest.raises(ValueError):
        sigma("0", "00")


@given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4).map(tuple), min_size=1, max_size=6, unique=True),
       st.fractions(Fraction(1, 4), 2))
def test_grainy_check_brute_force(words, q):
    reach = {a: {b for b in words if b in sigma_galaxy(words, q, a)} for a in words}
    assert grainy_check(words, q) == all(sigma(a, b) < 1 for a in words for b in reach[a])
    for a in words:
        assert a in sigma_galaxy(words, q, a)


def test_acting_group_rho_is_a_metric():
    G = ActingGroup(DMaxFamily(), 3)
    perms = list(G.elements(3))
    assert G.rho(3, G.identity(3), G.identity(3)) == 0
    rng = random.Random(0)
    for _ in range(50):
        s, t, u = rng.sample(perms, 3)
        assert G.rho(3, s, u) <= G.rho(3, s, t) + G.rho(3, t, u)
    assert G.act({2: (1, 0, 2)}, (0, 1, 2)) == (0, 0, 2)
    with pytest.raises(ValueError):
        ActingGroup(DMaxFamily(), 9)
