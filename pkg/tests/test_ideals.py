from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from borelkit import descriptors as D
from borelkit.descriptors import GeometricGen, Matrix, UltimatelyPeriodic, finite_set, sparse
from borelkit.ideals import (Constant, Density0, DyadicValuation, ErdosUlam, Fin, FinTimes0, FubiniProduct,
                             Geometric, Harmonic, Periodic, Summable, Table, TrivialVariation, Zero,
                             ZeroTimesFin, check_delta_homomorphism, check_rb_witness, classify_summable,
                             frechet, ideal_from_json, membership, rb_witness_summable, weights_from_json)

N0, N1 = 1 << 8, 1 << 14
bits = st.integers(0, 1)
ups = st.builds(UltimatelyPeriodic, st.lists(bits, max_size=5).map(tuple),
                st.lists(bits, min_size=1, max_size=3).map(tuple))
sparses = st.builds(sparse, st.sampled_from((GeometricGen(1, 2, 0), GeometricGen(1, 3, 1))), ups)
sets = st.one_of(ups, sparses, st.tuples(st.sampled_from(("union", "symdiff")), ups, sparses)
                 .map(lambda t: D.combine(*t)))
decaying = st.sampled_from((Harmonic(), Geometric(), Constant(Fraction(0))))
any_part = st.sampled_from((Harmonic(), Geometric(), Constant(), DyadicValuation()))
divergent = st.lists(any_part, min_size=1, max_size=2).filter(
    lambda ps: any(not isinstance(p, Geometric) for p in ps)).map(lambda ps: Periodic(tuple(ps)))
to_zero = st.lists(decaying, min_size=1, max_size=2).filter(
    lambda ps: any(isinstance(p, Harmonic) for p in ps)).map(lambda ps: Periodic(tuple(ps)))


def indicator(x):
    return np.array([x.contains(n) for n in range(N1)], dtype=bool)


def weights(r):
    return np.array([float(r.value(n)) for n in range(N1)])


def tail_sum(x, r):
    return float((indicator(x)[N0:] * weights(r)[N0:]).sum())


@given(sets, divergent)
def test_summable_matches_tail_sums(x, r):
    v = membership(Summable(r), x).kind
    if v != "Unknown":
        assert v == ("Out" if tail_sum(x, r) > 0.3 else "In")


@given(sets, to_zero)
def test_erdos_ulam_matches_tail_ratio(x, r):
    v = membership(ErdosUlam(r), x).kind
    w = weights(r)[N0:]
    ratio = float((indicator(x)[N0:] * w).sum() / w.sum())
    assert v == ("Out" if ratio > 0.1 else "In")


@given(sets)
def test_density_zero_matches_counts(x):
    dens = indicator(x)[N1 // 2:].mean()
    assert membership(Density0(), x).kind == ("Out" if dens > 0.05 else "In")


@given(sets)
def test_fin_and_zero(x):
    fin = D.is_finite(x)
    assert membership(Fin(), x).kind == ("In" if fin else "Out")
    if D.is_empty(x) is not None:
        assert membership(Zero(), x).kind == ("In" if D.is_empty(x) else "Out")


def test_trivial_variation_ignores_odds():
    I = TrivialVariation(Fin())
    assert membership(I, D.ODDS).kind == "In"
    assert membership(I, D.EVENS).kind == "Out"


def test_classify_summable():
    assert classify_summable(Harmonic()) == "Dense"
    assert classify_summable(Constant()) == "Atomic"
    assert classify_summable(Periodic((Constant(), Harmonic()))) == "FinPlusDense"
    assert classify_summable(DyadicValuation()) == "Sliced"
    with pytest.raises(ValueError):
        classify_summable(Geometric())


def test_weights_json_round_trip():
    for r in (Harmonic(Fraction(1, 2)), Geometric(Fraction(1), Fraction(1, 3)),
              Periodic((Constant(), Harmonic())), Table((Fraction(5),), DyadicValuation())):
        s = weights_from_json(r.to_json())
        assert [s.value(n) for n in range(20)] == [r.value(n) for n in range(20)]


cols = st.dictionaries(st.integers(0, 4), ups, max_size=3)


@given(cols, ups)
def test_product_ideals_against_column_rules(columns, default):
    x = Matrix.of(columns, default)
    all_cols = [default] + list(columns.values())
    assert membership(FinTimes0(), x).kind == ("In" if default.canonical().is_empty() else "Out")
    assert membership(ZeroTimesFin(), x).kind == ("In" if all(c.is_finite() for c in all_cols) else "Out")
    # Fin x Fin: only finitely many columns may be infinite
    assert membership(FubiniProduct(Fin(), Fin()), x).kind == ("In" if default.is_finite() else "Out")
    assert membership(frechet(2), x).kind == membership(FubiniProduct(Fin(), Fin()), x).kind


@given(cols, ups)
def test_fubini_identities(columns, default):
    x = Matrix.of(columns, default)
    assert membership(FubiniProduct(Fin(), Zero()), x).kind == membership(FinTimes0(), x).kind
    assert membership(FubiniProduct(Zero(), Fin()), x).kind == membership(ZeroTimesFin(), x).kind


def test_frechet_parsing():
    assert frechet("omega+2").to_json() == {"kind": "frechet", "xi": "omega+2"}
    with pytest.raises(ValueError):
        frechet("omega*2")
    with pytest.raises(ValueError):
        frechet(0)


def test_frechet_omega_on_settled_defaults():
    x = Matrix.of({0: D.EVERYTHING}, D.EMPTY)
    assert membership(frechet("omega"), x).kind == "In"
    assert membership(frechet("omega"), Matrix.of({}, D.EVERYTHING)).kind == "Out"


def test_ideal_json():
    I = ideal_from_json({"kind": "summable", "weights": {"family": "harmonic"}})
    assert membership(I, D.EVENS).kind == "Out"
    with pytest.raises(ValueError):
        ideal_from_json({"kind": "bogus"})
    with pytest.raises(ValueError):
        Summable(Geometric())


@given(st.lists(st.fractions(0, 2, max_denominator=8), min_size=1, max_size=4))
def test_rb_blocks_approximate_targets(ps):
    imax = len(ps) - 1
    W = rb_witness_summable(ps, Harmonic(), imax)
    assert check_rb_witness(W, Harmonic()).ok
    last = -1
    for i, (blk, p) in enumerate(zip(W.blocks, ps)):
        idx = blk.indices()
        assert idx[0] > last
        last = idx[-1]
        total = sum(Fraction(1, j + 1) for j in idx)
        assert abs(total - p) < Fraction(1, 1 << i)


def test_rb_witness_rejects_bad_targets():
    with pytest.raises(ValueError):
        rb_witness_summable([Fraction(3)], Harmonic(), 0)
    with pytest.raises(ValueError):
        rb_witness_summable([Fraction(1)], Geometric(), 0)


def test_delta_homomorphism_check():
    samples = [(finite_set([1]), D.EVENS), (D.ODDS, finite_set([2, 3]))]
    assert check_delta_homomorphism(lambda x: x, Fin(), Fin(), samples).ok
    rep = check_delta_homomorphism(lambda x: D.combine("complement", x), Fin(), Fin(), samples)
    assert any(f["condition"] == 2 for f in rep.failures)
