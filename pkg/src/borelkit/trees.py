"""Finite sequences, trees of sequences, ordinal ranks and tree operations.

A sequence is a plain tuple. Symbols are naturals, or tuples of naturals for
the product alphabets 2 x N and 2 x 2 x N. A tree is a prefix-closed set of
sequences; the empty tree has no nodes at all.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

Seq = tuple


def pair_code(r: int, q: int) -> int:
    """The pairing bijection N x N -> N, (r, q) -> 2^r (2q+1) - 1."""
    return (1 << r) * (2 * q + 1) - 1


def pair_decode(n: int) -> tuple[int, int]:
    m = n + 1
    r = (m & -m).bit_length() - 1
    return r, ((m >> r) - 1) // 2


def _symbol_kind(sym) -> tuple:
    if isinstance(sym, tuple):
        return ("tuple", len(sym))
    if isinstance(sym, bool) or not isinstance(sym, int):
        raise TypeError(f"unsupported symbol {sym!r}")
    return ("nat",)


def is_prefix(s: Seq, t: Seq) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def seq_add(s: Seq, t: Seq) -> Seq:
    """Componentwise sum of two sequences of equal length."""
    if len(s) != len(t):
        raise ValueError("componentwise addition needs equal lengths")
    return tuple(a + b for a, b in zip(s, t))


def seq_leq(s: Seq, t: Seq) -> bool:
    """Componentwise order on equal-length sequences of naturals."""
    return len(s) == len(t) and all(a <= b for a, b in zip(s, t))


@dataclass(frozen=True)
class FiniteTree:
    nodes: frozenset = frozenset()

    def __post_init__(self):
        for t in self.nodes:
            if t and t[:-1] not in self.nodes:
                raise ValueError(f"not prefix-closed at {t!r}")

    def __contains__(self, s) -> bool:
        return tuple(s) in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Seq]:
        return iter(sorted(self.nodes, key=_seq_sort_key))

    def is_empty(self) -> bool:
        return not self.nodes

    def height(self) -> int:
        """Length of the longest node, -1 for the empty tree."""
        return max((len(t) for t in self.nodes), default=-1)

    def level(self, n: int) -> list[Seq]:
        return sorted((t for t in self.nodes if len(t) == n), key=_seq_sort_key)

    def children(self, s: Seq) -> list[Seq]:
        n = len(s) + 1
        return sorted((t for t in self.nodes if len(t) == n and t[:-1] == s), key=_seq_sort_key)

    def is_maximal(self, s: Seq) -> bool:
        return s in self.nodes and not self.children(s)

    def to_json(self) -> list:
        return [_sym_to_json(t) for t in self]

    @classmethod
    def from_json(cls, data: list) -> "FiniteTree":
        return mk_tree([_sym_from_json(t) for t in data])


def _seq_sort_key(t: Seq):
    return (len(t), repr(t))


def _sym_to_json(x):
    if isinstance(x, tuple):
        return [_sym_to_json(y) for y in x]
    return x


def _sym_from_json(x):
    if isinstance(x, list):
        return tuple(_sym_from_json(y) for y in x)
    return x


def mk_tree(seqs: Iterable[Sequence]) -> FiniteTree:
    """Prefix closure of a collection of sequences over one alphabet."""
    nodes: set = set()
    kind = None
    for s in seqs:
        s = tuple(s)
        for sym in s:
            k = _symbol_kind(sym)
            if kind is None:
                kind = k
            elif k != kind:
                raise ValueError("sequences mix symbols from different alphabets")
        for i in range(len(s) + 1):
            nodes.add(s[:i])
    return FiniteTree(frozenset(nodes))


EMPTY = FiniteTree(frozenset())
ROOT_ONLY = FiniteTree(frozenset({()}))


@dataclass(frozen=True)
class Exact:
    n: int

    def to_json(self) -> dict:
        return {"exact": self.n}


@dataclass(frozen=True)
class AtLeastAtCap:
    n: int
    depth: int
    cap: int

    def to_json(self) -> dict:
        return {"atLeast": self.n, "depth": self.depth, "cap": self.cap}


RankVerdict = Union[Exact, AtLeastAtCap]


def verdict_from_json(d: dict) -> RankVerdict:
    if "exact" in d:
        return Exact(d["exact"])
    return AtLeastAtCap(d["atLeast"], d["depth"], d["cap"])


def node_ranks(T: FiniteTree) -> dict:
    """rk(r) for every node: 0 on maximal nodes, else 1 + max over children."""
    ranks: dict = {}
    for t in sorted(T.nodes, key=len, reverse=True):
        ranks.setdefault(t, 0)
        if t:
            p = t[:-1]
            ranks[p] = max(ranks.get(p, 0), ranks[t] + 1)
    return ranks


def rank(T: FiniteTree) -> Exact:
    if T.is_empty():
        return Exact(-1)
    return Exact(node_ranks(T)[()])


def rank_at(T: FiniteTree, r: Seq) -> int:
    r = tuple(r)
    if r not in T.nodes:
        raise KeyError(f"{r!r} is not a node")
    return node_ranks(T)[r]


@dataclass
class LazyTree:
    """A window onto a possibly infinite tree: predicate plus depth and value caps.

    The predicate must be prefix-monotone. ``branching`` lists candidate
    child symbols of a node; by default the naturals 0..cap.
    """

    member: Callable[[Seq], bool]
    depth: int
    cap: int
    branching: Optional[Callable[[Seq, int], Iterable]] = None

    def child_symbols(self, s: Seq) -> Iterable:
        if self.branching is not None:
            return self.branching(s, self.cap)
        return range(self.cap + 1)

    def materialize(self) -> FiniteTree:
        if not self.member(()):
            return EMPTY
        nodes = {()}
        frontier = [()]
        for _ in range(self.depth):
            nxt = []
            for s in frontier:
                for a in self.child_symbols(s):
                    t = s + (a,)
                    if self.member(t):
                        nxt.append(t)
            nodes.update(nxt)
            frontier = nxt
            if not frontier:
                break
        return FiniteTree(frozenset(nodes))


def rank_capped(T: Union[LazyTree, FiniteTree], depth: Optional[int] = None,
                cap: Optional[int] = None) -> RankVerdict:
    """Rank of the capped restriction; AtLeastAtCap when it reaches the depth cap."""
    if isinstance(T, LazyTree):
        tree, depth, cap = T.materialize(), T.depth, T.cap
    else:
        if depth is None or cap is None:
            raise ValueError("depth and cap are required for an explicit tree")
        tree = T
    r = rank(tree).n
    if tree.height() >= depth:
        return AtLeastAtCap(r, depth, cap)
    return Exact(r)


def contract(S: FiniteTree) -> FiniteTree:
    """Merge the first two entries of every node of length >= 2 by the pairing."""
    nodes = {()} if not S.is_empty() else set()
    for t in S.nodes:
        if len(t) >= 2:
            nodes.add((pair_code(t[0], t[1]),) + t[2:])
    return FiniteTree(frozenset(nodes))


def star_sum(Ts: Sequence[FiniteTree]) -> FiniteTree:
    nodes = {()}
    for n, T in enumerate(Ts):
        nodes.update((n,) + t for t in T.nodes)
    return FiniteTree(frozenset(nodes))


def star_product(Ts: Sequence[FiniteTree], depth: int) -> FiniteTree:
    """Product tree: a node of length n+1 encodes components t_0..t_n, each of length n.

    The j-th symbol of the encoding is (t_0|j, ..., t_j|j), so extension in the
    encoding is componentwise extension of the tuple.
    """
    nodes = {()}
    top = min(depth, len(Ts))
    frontier = [()]
    for n in range(top):
        # extend each encoded node of length n (components of length n-1) by one symbol
        nxt = []
        levels = [Ts[k].level(n) for k in range(n + 1)]
        for code in frontier:
            prev = code[-1] if code else ()
            pools = []
            for k in range(n + 1):
                if k < n:
                    pools.append([t for t in levels[k] if t[:-1] == prev[k]])
                else:
                    pools.append(levels[k])
            for combo in itertools.product(*pools):
                nxt.append(code + (tuple(combo),))
        nodes.update(nxt)
        frontier = nxt
        if not frontier:
            break
    return FiniteTree(frozenset(nodes))


def product_components(code: Seq) -> tuple:
    """Decode a star_product node into its component sequences."""
    return code[-1] if code else ()


def cw_add(S: FiniteTree, T: FiniteTree) -> FiniteTree:
    nodes = set()
    by_len: dict = {}
    for t in T.nodes:
        by_len.setdefault(len(t), []).append(t)
    for s in S.nodes:
        for t in by_len.get(len(s), ()):
            nodes.add(seq_add(s, t))
    return FiniteTree(frozenset(nodes))


def full_tree(depth: int, cap: int) -> FiniteTree:
    """All sequences of length <= depth with entries <= cap."""
    nodes = set()
    for n in range(depth + 1):
        nodes.update(itertools.product(range(cap + 1), repeat=n))
    return FiniteTree(frozenset(nodes))


def tree_from_levels(levels: dict) -> FiniteTree:
    nodes = set()
    for seqs in levels.values():
        nodes.update(tuple(s) for s in seqs)
    return mk_tree(nodes)
