from hypothesis import given
from hypothesis import strategies as st

from borelkit.descriptors import (EVERYTHING, GeometricGen, Matrix, PolynomialGen, UltimatelyPeriodic,
                                  cofinite, combine, eventually_equal, exactly_equal, finite_set, is_empty,
                                  is_finite, point_from_json, set_from_json, sparse)

bits = st.integers(0, 1)
ups = st.builds(UltimatelyPeriodic, st.lists(bits, max_size=5).map(tuple),
                st.lists(bits, min_size=1, max_size=3).map(tuple))
# geometric only: membership in a polynomial range is a linear search, too slow far out
GENS = (GeometricGen(1, 2, 0), GeometricGen(1, 3, 1))
gens = st.sampled_from(GENS)
sparses = st.builds(sparse, gens, ups)
atoms = st.one_of(ups, sparses)
combos = st.recursive(atoms, lambda c: st.one_of(
    st.tuples(st.sampled_from(("union", "inter", "diff", "symdiff")), c, c).map(lambda t: combine(*t)),
    c.map(lambda a: combine("complement", a))), max_leaves=3)
single_gen = gens.flatmap(lambda g: st.recursive(
    st.one_of(ups, st.builds(sparse, st.just(g), ups)),
    lambda c: st.tuples(st.sampled_from(("union", "inter", "diff", "symdiff")), c, c).map(lambda t: combine(*t)),
    max_leaves=3))

FAR = 10 ** 6


def infinite_oracle(x):
    """An element in a long window far out, or a far generator value inside x."""
    cands = list(range(FAR, FAR + 600))
    for g in GENS:
        cands += [g(n) for n in range(60) if g(n) >= FAR]
    return any(x.contains(m) for m in cands)


def test_basic_sets():
    assert finite_set([3, 1]).elements_below(10) == [1, 3]
    assert cofinite([0, 2]).elements_below(5) == [1, 3, 4]
    assert sparse(GeometricGen(1, 2, 0)).elements_below(20) == [1, 2, 4, 8, 16]
    assert sparse(GeometricGen(4, 2, 0), UltimatelyPeriodic((), (1, 0))).elements_below(100) == [4, 16, 64]
    assert sparse(PolynomialGen(1, 2, 1)).elements_below(30) == [1, 2, 5, 10, 17, 26]
    assert is_finite(combine("inter", sparse(PolynomialGen(1, 2, 0)), finite_set(range(50)))) is True


@given(ups)
def test_canonical_form_preserves_membership(x):
    c = x.canonical()
    assert all(c.contains(n) == x.contains(n) for n in range(40))


@given(combos, combos, st.sampled_from(("union", "inter", "diff", "symdiff")))
def test_combine_membership(x, y, op):
    z = combine(op, x, y)
    ref = {"union": lambda a, b: a or b, "inter": lambda a, b: a and b,
           "diff": lambda a, b: a and not b, "symdiff": lambda a, b: a != b}[op]
    for n in list(range(80)) + [GENS[0](k) for k in range(7, 12)]:
        assert z.contains(n) == ref(x.contains(n), y.contains(n))


@given(combos)
def test_complement_membership(x):
    z = combine("complement", x)
    assert all(z.contains(n) != x.contains(n) for n in range(60))


@given(combos)
def test_is_finite_when_decided(x):
    v = is_finite(x)
    if v is not None:
        assert v == (not infinite_oracle(x))


@given(single_gen)
def test_is_finite_decides_single_generator_sets(x):
    v = is_finite(x)
    assert v is not None
    assert v == (not infinite_oracle(x))


@given(single_gen)
def test_is_empty_when_decided(x):
    v = is_empty(x)
    if v is not None:
        found = any(x.contains(n) for n in range(2000)) or infinite_oracle(x)
        assert v == (not found)


@given(single_gen, single_gen)
def test_eventual_and_exact_equality(x, y):
    d = combine("symdiff", x, y)
    ev = eventually_equal(x, y)
    if ev is not None:
        assert ev == (not infinite_oracle(d))
    ex = exactly_equal(x, y)
    if ex is not None:
        differs = any(d.contains(n) for n in range(2000)) or infinite_oracle(d)
        assert ex == (not differs)


@given(combos)
def test_json_round_trip(x):
    y = set_from_json(x.to_json())
    assert all(x.contains(n) == y.contains(n) for n in range(100))


def test_matrix_columns():
    M = Matrix.of({0: finite_set([1]), 2: EVERYTHING}, finite_set([5]))
    assert M.contains((0, 1)) and not M.contains((0, 2))
    assert M.contains((2, 7)) and M.contains((9, 5)) and not M.contains((9, 4))
    N = point_from_json(M.to_json())
    assert all(N.contains((k, n)) == M.contains((k, n)) for k in range(4) for n in range(8))
