"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from borelkit.trees import FiniteTree, mk_tree

seqs = st.lists(st.integers(0, 3), max_size=4).map(tuple)
trees = st.one_of(st.just(FiniteTree(frozenset())), st.lists(seqs, min_size=1, max_size=8).map(mk_tree))
words = lambda n: st.lists(st.integers(0, 1), min_size=n, max_size=n).map(tuple)
