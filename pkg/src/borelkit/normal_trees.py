"""Normal trees on 2 x N, Lip trees, the Louveau-Rosendal transform and the slice map.

A normal tree is upward closed in its N-coordinate, so it is stored by the
minimal elements above each binary word u. Trees on 2 x 2 x N are kept either
explicitly (``TriTree``) or, once normal, by minimal elements per pair of
words (``NormalTriTree``).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .trees import FiniteTree, RankVerdict, rank_capped, seq_add, seq_leq

Word = tuple


def binary_words(n: int) -> list[Word]:
    return list(itertools.product((0, 1), repeat=n))


def minimal_antichain(vectors: Iterable[tuple]) -> frozenset:
    """The componentwise-minimal elements of a finite set of equal-length vectors."""
    vs = sorted(set(vectors), key=lambda v: (sum(v), v))
    kept: list = []
    for v in vs:
        if not any(seq_leq(k, v) for k in kept):
            kept.append(v)
    return frozenset(kept)


def dominated(gens: Iterable[tuple], s: tuple) -> bool:
    return any(seq_leq(g, s) for g in gens)


def _sorted_gens(gens) -> list:
    return sorted(gens)


@dataclass(frozen=True)
class NormalTree:
    """gen[u] is the antichain of minimal s with (u, s) in the tree."""

    depth: int
    gen: dict = field(default_factory=dict)

    def gens(self, u: Word) -> frozenset:
        return self.gen.get(tuple(u), frozenset())

    def member(self, u: Word, s: tuple) -> bool:
        return nt_member(self, u, s)

    def is_empty(self) -> bool:
        return not self.gens(())

    def to_json(self) -> dict:
        out = {}
        for u in sorted(self.gen, key=lambda w: (len(w), w)):
            if self.gen[u]:
                out["".join(map(str, u))] = [list(g) for g in _sorted_gens(self.gen[u])]
        return {"depth": self.depth, "gen": out}

    @classmethod
    def from_json(cls, data: dict) -> "NormalTree":
        gen = {}
        for key, gs in data["gen"].items():
            u = tuple(int(c) for c in key)
            gen[u] = minimal_antichain(tuple(g) for g in gs)
        depth = data.get("depth", max((len(u) for u in gen), default=0))
        return cls(depth, gen)

    def pairs(self, cap: int) -> set:
        """All member pairs (u, s) with entries <= cap, as explicit tuples."""
        out = set()
        for u, gs in self.gen.items():
            for s in itertools.product(range(cap + 1), repeat=len(u)):
                if dominated(gs, s):
                    out.add((u, s))
        return out


def nt_member(T: NormalTree, u: Word, s: tuple) -> bool:
    u, s = tuple(u), tuple(s)
    if len(u) != len(s):
        raise ValueError("word and sequence lengths differ")
    if len(u) > T.depth:
        raise ValueError(f"length {len(u)} exceeds the depth cap {T.depth}")
    return dominated(T.gens(u), s)


def check_normal_tree(T: NormalTree) -> list[str]:
    """Antichain and prefix-closure checks on the generator form."""
    problems = []
    for u, gs in T.gen.items():
        if minimal_antichain(gs) != frozenset(gs):
            problems.append(f"gen{u} is not an antichain")
        for g in gs:
            if len(g) != len(u):
                problems.append(f"gen{u} has a generator of wrong length")
            elif u and not dominated(T.gens(u[:-1]), g[:-1]):
                problems.append(f"({u},{g}) has no parent in the tree")
    return problems


def random_normal_tree(rng: random.Random, depth: int, cap: int,
                       p_die: float = 0.15, max_gens: int = 3) -> NormalTree:
    """Random normal tree whose generators have entries <= cap."""
    gen = {(): frozenset({()})}
    for n in range(depth):
        for v in binary_words(n):
            parents = sorted(gen.get(v, ()))
            for i in (0, 1):
                u = v + (i,)
                if not parents or rng.random() < p_die:
                    gen[u] = frozenset()
                    continue
                cands = []
                for _ in range(rng.randint(1, max_gens)):
                    g = rng.choice(parents)
                    bumped = tuple(min(cap, a + (rng.random() < 0.3) * rng.randint(0, cap)) for a in g)
                    cands.append(bumped + (rng.randint(0, cap),))
                gen[u] = minimal_antichain(cands)
    return NormalTree(depth, gen)


def lip_generators(S: NormalTree, T: NormalTree, depth: Optional[int] = None) -> dict:
    """Minimal f of each length n <= depth with f in Lip(S, T).

    f qualifies at length n iff for every m <= n, u in 2^m and g in genS(u)
    some t in genT(u) has f|m >= max(t - g, 0). The sets are computed exactly,
    without a value cap.
    """
    if depth is None:
        depth = min(S.depth, T.depth)
    out = {}
    current = frozenset({()})
    for n in range(depth + 1):
        if n > 0:
            current = minimal_antichain(f + (0,) for f in current)
        for u in binary_words(n):
            for g in _sorted_gens(S.gens(u)):
                options = [tuple(max(a - b, 0) for a, b in zip(t, g)) for t in _sorted_gens(T.gens(u))]
                current = minimal_antichain(
                    tuple(max(a, c) for a, c in zip(f, opt)) for f in current for opt in options)
                if not current:
                    break
            if not current:
                break
        out[n] = current
        if not current:
            for m in range(n + 1, depth + 1):
                out[m] = frozenset()
            break
    return out


def _capped_tree_from_levels(levels: dict, depth: int, cap: int) -> FiniteTree:
    nodes = set()
    for n in range(depth + 1):
        gens = levels.get(n, frozenset())
        if not gens:
            break
        for f in itertools.product(range(cap + 1), repeat=n):
            if dominated(gens, f):
                nodes.add(f)
    return FiniteTree(frozenset(nodes))


def lip(S: NormalTree, T: NormalTree, depth: int, cap: int) -> FiniteTree:
    return _capped_tree_from_levels(lip_generators(S, T, depth), depth, cap)


def leq_nt_verdict(S: NormalTree, T: NormalTree, depth: int, cap: int) -> RankVerdict:
    return rank_capped(lip(S, T, depth, cap), depth, cap)


def equiv_nt_verdict(S: NormalTree, T: NormalTree, depth: int, cap: int) -> RankVerdict:
    a, b = lip(S, T, depth, cap), lip(T, S, depth, cap)
    return rank_capped(FiniteTree(a.nodes & b.nodes), depth, cap)


# ---------------------------------------------------------------- trees on 2 x 2 x N

@dataclass(frozen=True)
class TriTree:
    """Explicit tree on 2 x 2 x N; a node of length n is a triple (u, v, s) of length-n tuples."""

    triples: frozenset
    depth: int
    cap: int

    def __post_init__(self):
        for (u, v, s) in self.triples:
            if not len(u) == len(v) == len(s):
                raise ValueError("triple components must have equal length")
            if u and (u[:-1], v[:-1], s[:-1]) not in self.triples:
                raise ValueError(f"not prefix-closed at {(u, v, s)!r}")

    def member(self, u, v, s) -> bool:
        return (tuple(u), tuple(v), tuple(s)) in self.triples

    def level(self, n: int) -> list:
        return sorted(t for t in self.triples if len(t[0]) == n)

    def to_json(self) -> list:
        return [[list(u), list(v), list(s)] for (u, v, s) in sorted(self.triples, key=lambda t: (len(t[0]), t))]

    @classmethod
    def from_json(cls, data: list, depth: Optional[int] = None, cap: Optional[int] = None) -> "TriTree":
        triples = frozenset((tuple(u), tuple(v), tuple(s)) for u, v, s in data)
        if depth is None:
            depth = max((len(t[0]) for t in triples), default=0)
        if cap is None:
            cap = max((max(t[2]) for t in triples if t[2]), default=0)
        return cls(triples, depth, cap)


def random_tritree(rng: random.Random, depth: int, cap: int, p: float = 0.12) -> TriTree:
    triples = {((), (), ())}
    frontier = [((), (), ())]
    for _ in range(depth):
        nxt = []
        for (u, v, s) in frontier:
            for i, j, k in itertools.product((0, 1), (0, 1), range(cap + 1)):
                if rng.random() < p:
                    nxt.append((u + (i,), v + (j,), s + (k,)))
        triples.update(nxt)
        frontier = nxt
    return TriTree(frozenset(triples), depth, cap)


@dataclass(frozen=True)
class NormalTriTree:
    """Normal tree on 2 x 2 x N: gen[(u, v)] is the antichain of minimal s."""

    depth: int
    gen: dict = field(default_factory=dict)

    def gens(self, u, v) -> frozenset:
        return self.gen.get((tuple(u), tuple(v)), frozenset())

    def member(self, u, v, s) -> bool:
        return dominated(self.gens(u, v), tuple(s))

    def to_json(self) -> list:
        out = []
        for (u, v) in sorted(self.gen, key=lambda p: (len(p[0]), p)):
            for g in _sorted_gens(self.gen[(u, v)]):
                out.append([list(u), list(v), list(g)])
        return out

    def explicit(self, cap: int, counter_cap: Optional[int] = None) -> TriTree:
        """Capped explicit node set; the first coordinate may use its own cap."""
        counter_cap = cap if counter_cap is None else counter_cap
        triples = set()
        for (u, v), gs in self.gen.items():
            n = len(u)
            ranges = [range(counter_cap + 1)] + [range(cap + 1)] * (n - 1) if n else []
            for s in itertools.product(*ranges):
                if dominated(gs, s):
                    triples.add((u, v, s))
        return TriTree(frozenset(triples), self.depth, max(cap, counter_cap))


def normalize_tritree(Q: TriTree) -> NormalTriTree:
    """Parts 1 and 2: symmetrize, add the diagonal, close upward in s."""
    raw: dict = {}
    for (u, v, s) in Q.triples:
        raw.setdefault((u, v), set()).add(s)
        raw.setdefault((v, u), set()).add(s)
    for n in range(Q.depth + 1):
        for u in binary_words(n):
            raw.setdefault((u, u), set()).add((0,) * n)
    return NormalTriTree(Q.depth, {k: minimal_antichain(v) for k, v in raw.items()})


def _bool_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def shortest_path_lengths(adj: np.ndarray) -> np.ndarray:
    """Least k with a k-step path, from powers of a reflexive adjacency matrix; -1 if none."""
    n = adj.shape[0]
    dist = np.full((n, n), -1, dtype=np.int64)
    reach = np.eye(n, dtype=bool)
    k = 0
    while True:
        newly = reach & (dist < 0)
        dist[newly] = k
        if k >= n:
            break
        nxt = _bool_matmul(reach, adj)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
        k += 1
    return dist


def lr_transform(Q: TriTree, depth: Optional[int] = None) -> NormalTriTree:
    """Symmetric, diagonal, normal and transitive tree R built from Q.

    (u^i, v^j, k^s) is in R iff a path of exactly k steps joins u to v in the
    graph on 2^n whose edges are the pairs (a, b) with (a, b, s) in the normal
    closure of Q. Since the graph is reflexive, the minimal k is the graph
    distance, and every larger k works as well. The counter coordinate is kept
    exact rather than capped.
    """
    depth = Q.depth if depth is None else depth
    base = normalize_tritree(Q)
    gen = {((), ()): frozenset({()})}
    for n in range(0, depth):
        words = binary_words(n)
        index = {u: i for i, u in enumerate(words)}
        # candidate s: joins of generators are dominated by some s within the cap
        cap = max((max(g) for gs in base.gen.values() for g in gs if g), default=0)
        cands = list(itertools.product(range(cap + 1), repeat=n))
        minimal: dict = {}
        for s in cands:
            adj = np.zeros((len(words), len(words)), dtype=bool)
            for a in words:
                for b in words:
                    if base.member(a, b, s):
                        adj[index[a], index[b]] = True
            dist = shortest_path_lengths(adj)
            for a in words:
                for b in words:
                    k = int(dist[index[a], index[b]])
                    if k >= 0:
                        minimal.setdefault((a, b), []).append((k,) + s)
        for (a, b), vecs in minimal.items():
            mins = minimal_antichain(vecs)
            for i, j in itertools.product((0, 1), repeat=2):
                gen[(a + (i,), b + (j,))] = mins
    return NormalTriTree(depth, gen)


@dataclass
class PropertyReport:
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "violations": self.violations}


def lr_check_properties(R, depth: Optional[int] = None, cap: Optional[int] = None) -> PropertyReport:
    """Check symmetry (i), diagonal (ii), normality (iii) and transitivity (iv).

    A NormalTriTree is checked through its generators, which covers every
    node. An explicit TriTree is checked node by node within its value cap.
    """
    if isinstance(R, NormalTriTree):
        return _check_normal_tritree(R, R.depth if depth is None else depth)
    return _check_explicit_tritree(R, R.depth if depth is None else depth, R.cap if cap is None else cap)


def _check_normal_tritree(R: NormalTriTree, depth: int) -> PropertyReport:
    rep = PropertyReport()
    for n in range(depth + 1):
        words = binary_words(n)
        for u in words:
            rep.checked += 1
            if not R.member(u, u, (0,) * n):
                rep.violations.append({"property": "ii", "u": list(u)})
            for v in words:
                g_uv = R.gens(u, v)
                if g_uv != R.gens(v, u):
                    rep.violations.append({"property": "i", "u": list(u), "v": list(v)})
                if minimal_antichain(g_uv) != g_uv:
                    rep.violations.append({"property": "iii", "u": list(u), "v": list(v)})
                for g in g_uv:
                    if n and not R.member(u[:-1], v[:-1], g[:-1]):
                        rep.violations.append({"property": "tree", "u": list(u), "v": list(v), "s": list(g)})
                for w in words:
                    for g in g_uv:
                        for h in R.gens(v, w):
                            rep.checked += 1
                            if not R.member(u, w, seq_add(g, h)):
                                rep.violations.append({"property": "iv", "u": list(u), "v": list(v),
                                                       "w": list(w), "s": list(g), "t": list(h)})
    return rep


def _check_explicit_tritree(R: TriTree, depth: int, cap: int) -> PropertyReport:
    rep = PropertyReport()
    by_pair: dict = {}
    for (u, v, s) in R.triples:
        by_pair.setdefault((u, v), set()).add(s)
    for n in range(depth + 1):
        words = binary_words(n)
        present = any(len(t[0]) == n for t in R.triples)
        for u in words:
            if present and not R.member(u, u, (0,) * n):
                rep.violations.append({"property": "ii", "u": list(u)})
        for (u, v), ss in sorted(by_pair.items()):
            if len(u) != n:
                continue
            for s in sorted(ss):
                rep.checked += 1
                if not R.member(v, u, s):
                    rep.violations.append({"property": "i", "u": list(u), "v": list(v), "s": list(s)})
                for i in range(n):
                    if s[i] < cap:
                        t = s[:i] + (s[i] + 1,) + s[i + 1:]
                        if not R.member(u, v, t):
                            rep.violations.append({"property": "iii", "u": list(u), "v": list(v), "s": list(s)})
                            break
                for w in words:
                    for t in sorted(by_pair.get((v, w), ())):
                        st = seq_add(s, t)
                        if max(st, default=0) <= cap and not R.member(u, w, st):
                            rep.violations.append({"property": "iv", "u": list(u), "v": list(v), "w": list(w),
                                                   "s": list(s), "t": list(t)})
    return rep


def theta(Q: NormalTriTree, x: Word, check: bool = True) -> NormalTree:
    """The slice tree {(u, s) : Q(u, x|lh u, s)} for a word x."""
    x = tuple(x)
    if check:
        rep = lr_check_properties(Q, min(Q.depth, len(x)))
        if not rep.ok:
            raise ValueError(f"tree fails properties (i)-(iv): {rep.violations[:3]}")
    depth = min(Q.depth, len(x))
    gen = {}
    for n in range(depth + 1):
        for u in binary_words(n):
            gs = Q.gens(u, x[:n])
            if gs:
                gen[u] = gs
    return NormalTree(depth, gen)


def lip_vs_slice(Q: NormalTriTree, x: Word, y: Word, depth: Optional[int] = None) -> tuple[bool, Optional[int]]:
    """Compare Lip(theta x, theta y) with the slice {s : Q(x|n, y|n, s)} level by level.

    Returns (True, None) on agreement, else (False, first differing level).
    """
    depth = min(len(x), len(y), Q.depth) if depth is None else depth
    tx, ty = theta(Q, x[:depth], check=False), theta(Q, y[:depth], check=False)
    levels = lip_generators(tx, ty, depth)
    for n in range(depth + 1):
        if levels.get(n, frozenset()) != Q.gens(tuple(x[:n]), tuple(y[:n])):
            return False, n
    return True, None
