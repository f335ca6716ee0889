"""The budgeted exit game, the tree vid(X), and the Lip sandwich around it.

In the game for (f, u, X) with n = lh u, player I moves first and adds s_k to
a running sum, player II adds t_k with t_1 + ... + t_k <= f|n. Player I must
keep the pair (u, running sum) inside X after each of its moves, forever.

Two routes compute the winner. ``solve_game`` builds the explicit position
graph and runs an attractor computation. ``vid`` uses a backward induction on
the remaining budget, vectorized over positions; it relies on the fact that
I's chances depend only on the current sum and the budget still available
to II, not on f itself.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .normal_trees import NormalTree, binary_words, dominated, lip
from .trees import AtLeastAtCap, Exact, FiniteTree, rank_capped, seq_add, seq_leq

I, II = "I", "II"


@dataclass(frozen=True)
class CappedPointset:
    """A finite set of pairs (u, s) with lh u = lh s <= depth and entries <= cap."""

    pairs: frozenset
    depth: int
    cap: int

    def __post_init__(self):
        for (u, s) in self.pairs:
            if len(u) != len(s) or len(u) > self.depth:
                raise ValueError(f"pair {(u, s)!r} violates the depth cap")
            if any(x > self.cap for x in s):
                raise ValueError(f"pair {(u, s)!r} violates the value cap")

    def slice(self, u) -> list:
        u = tuple(u)
        return sorted(s for (w, s) in self.pairs if w == u)

    def __contains__(self, pair) -> bool:
        return (tuple(pair[0]), tuple(pair[1])) in self.pairs

    def union(self, other: "CappedPointset") -> "CappedPointset":
        return CappedPointset(self.pairs | other.pairs, max(self.depth, other.depth), max(self.cap, other.cap))

    def to_json(self) -> list:
        return [{"u": list(u), "s": list(s)} for (u, s) in sorted(self.pairs, key=lambda p: (len(p[0]), p))]

    @classmethod
    def from_json(cls, data: list, depth: Optional[int] = None, cap: Optional[int] = None) -> "CappedPointset":
        pairs = frozenset((tuple(d["u"]), tuple(d["s"])) for d in data)
        if depth is None:
            depth = max((len(u) for u, _ in pairs), default=0)
        if cap is None:
            cap = max((max(s) for _, s in pairs if s), default=0)
        return cls(pairs, depth, cap)

    @classmethod
    def full(cls, depth: int, cap: int) -> "CappedPointset":
        pairs = set()
        for n in range(depth + 1):
            for u in binary_words(n):
                for s in itertools.product(range(cap + 1), repeat=n):
                    pairs.add((u, s))
        return cls(frozenset(pairs), depth, cap)


def symmetric_difference(S: NormalTree, T: NormalTree, depth: int, cap: int) -> CappedPointset:
    """The pairs within caps that lie in exactly one of S, T."""
    pairs = set()
    for n in range(depth + 1):
        for u in binary_words(n):
            gs, gt = S.gens(u), T.gens(u)
            if not gs and not gt:
                continue
            for s in itertools.product(range(cap + 1), repeat=n):
                if dominated(gs, s) != dominated(gt, s):
                    pairs.add((u, s))
    return CappedPointset(frozenset(pairs), depth, cap)


# ------------------------------------------------------------------ attractor route

def attractor(nodes: list, owner: dict, succ: dict, target: set, player: str) -> set:
    """Nodes from which ``player`` can force a visit to ``target``.

    A node owned by the opponent with no successors counts as won for ``player``.
    """
    preds: dict = {v: [] for v in nodes}
    count = {}
    for v in nodes:
        count[v] = len(succ[v])
        for w in succ[v]:
            preds[w].append(v)
    attr = set(target)
    queue = deque(attr)
    for v in nodes:
        if v not in attr and owner[v] != player and count[v] == 0:
            attr.add(v)
            queue.append(v)
    while queue:
        w = queue.popleft()
        for v in preds[w]:
            if v in attr:
                continue
            if owner[v] == player:
                attr.add(v)
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr


def _box(bound: tuple):
    return itertools.product(*(range(b + 1) for b in bound))


def game_graph(f: tuple, u: tuple, X: CappedPointset):
    """Explicit positions of the game; I's moves are restricted to sums inside X."""
    n = len(u)
    budget = tuple(f[:n])
    xs = X.slice(u)
    start = ("start",)
    nodes, owner, succ = [start], {start: I}, {start: [("II", q, budget) for q in xs]}
    seen = {start}
    stack = list(succ[start])
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        nodes.append(v)
        if v[0] == "II":
            _, p, r = v
            owner[v] = II
            succ[v] = [("I", seq_add(p, t), tuple(a - b for a, b in zip(r, t))) for t in _box(r)]
        else:
            _, p, r = v
            owner[v] = I
            succ[v] = [("II", q, r) for q in xs if seq_leq(p, q)]
        stack.extend(w for w in succ[v] if w not in seen)
    return nodes, owner, succ, start


def solve_game(f, u, X: CappedPointset) -> str:
    """Winner of the game for (f, u, X): 'II' iff II can force I out of X."""
    f, u = tuple(f), tuple(u)
    if len(u) > len(f):
        raise ValueError("lh u must not exceed lh f")
    nodes, owner, succ, start = game_graph(f, u, X)
    won = attractor(nodes, owner, succ, set(), II)
    return II if start in won else I


# ------------------------------------------------------------------ vectorized route

@lru_cache(maxsize=None)
def _budget_tables(n: int, budget_cap: int, value_cap: int):
    """Index tables for the backward induction in dimension n.

    ``shift[p, t]`` is the box index of p + t, or the sentinel ``P**n`` when
    the sum leaves the value box.
    """
    B, P = budget_cap + 1, value_cap + 1
    rs = list(itertools.product(range(B), repeat=n))
    r_index = {r: i for i, r in enumerate(rs)}
    levels: dict = {}
    for r in rs:
        levels.setdefault(sum(r), []).append(r)
    plan = []
    for L in sorted(levels):
        t_ids, rt_cols, seg_starts = [], [], []
        for r in levels[L]:
            seg_starts.append(len(t_ids))
            for t in _box(r):
                if not any(t):
                    continue
                t_ids.append(r_index[t])
                rt_cols.append(r_index[tuple(a - b for a, b in zip(r, t))])
        plan.append((np.array([r_index[r] for r in levels[L]], dtype=np.int64), np.array(t_ids, dtype=np.int64),
                     np.array(rt_cols, dtype=np.int64), np.array(seg_starts, dtype=np.int64)))
    strides = np.array([P ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    box = np.array(list(itertools.product(range(P), repeat=n)), dtype=np.int64).reshape(P ** n, n)
    tv = np.array(rs, dtype=np.int64).reshape(len(rs), n)
    sums = box[:, None, :] + tv[None, :, :]
    shift = np.where((sums <= value_cap).all(axis=2), sums @ strides, P ** n)
    return rs, r_index, plan, strides, shift


def i_wins_table(xs: list, n: int, budget_cap: int, value_cap: int) -> np.ndarray:
    """For every budget r in [0, budget_cap]^n: does I win from the start?

    W[q, r] (I wins when II is to move, sum q in X, budget r) holds iff for
    every nonzero t <= r some q' >= q + t in X has W[q', r - t]. A pass by II
    changes nothing, since I may answer it with a zero move.
    """
    rs, r_index, plan, strides, shift = _budget_tables(n, budget_cap, value_cap)
    nr = len(rs)
    if not xs:
        return np.zeros(nr, dtype=bool)
    if n == 0:
        return np.ones(nr, dtype=bool)
    P = value_cap + 1
    xarr = np.array(xs, dtype=np.int64)
    nq = len(xs)
    box_size = P ** n
    q_box = xarr @ strides
    shift_q = shift[q_box]
    W = np.zeros((nq, nr), dtype=bool)
    # E[p, r]: some q >= p in X has W[q, r]; an extra all-false row stands for sums off the box
    E = np.zeros((box_size + 1, nr), dtype=bool)
    for r_cols, t_ids, rt_cols, seg_starts in plan:
        if len(t_ids):
            vals = E[shift_q[:, t_ids], rt_cols[None, :]]
            # AND over each r's block of t's; an empty block (only r = 0) is vacuously true
            res = np.ones((nq, len(r_cols)), dtype=bool)
            nonempty = np.append(seg_starts[1:], len(rt_cols)) > seg_starts
            if nonempty.any():
                res[:, nonempty] = np.logical_and.reduceat(vals, seg_starts[nonempty], axis=1)
            W[:, r_cols] = res
        else:
            W[:, r_cols] = True
        A = np.zeros((box_size, len(r_cols)), dtype=bool)
        A[q_box] = W[:, r_cols]
        A = A.reshape((P,) * n + (len(r_cols),))
        for ax in range(n):
            A = np.flip(np.logical_or.accumulate(np.flip(A, axis=ax), axis=ax), axis=ax)
        E[:box_size, r_cols] = A.reshape(box_size, len(r_cols))
    return W.any(axis=0)


def vid_membership(X: CappedPointset, depth: int, budget_cap: int) -> dict:
    """Map each f with entries <= budget_cap and length <= depth to whether f is in vid X."""
    value_cap = X.cap
    tables = {}
    for n in range(depth + 1):
        rs, r_index = _budget_tables(n, budget_cap, value_cap)[:2]
        for u in binary_words(n):
            tables[u] = (r_index, i_wins_table(X.slice(u), n, budget_cap, value_cap))
    ok_level = {(): not tables[()][1][0]}
    for n in range(1, depth + 1):
        for f in itertools.product(range(budget_cap + 1), repeat=n):
            if not ok_level.get(f[:-1], False):
                continue
            good = True
            for u in binary_words(n):
                r_index, iw = tables[u]
                if iw[r_index[f]]:
                    good = False
                    break
            ok_level[f] = good
    return ok_level


def vid(X: CappedPointset, depth: int, cap: int, method: str = "dp") -> FiniteTree:
    """Capped tree of budgets f for which II wins every game (f, u, X) with lh u <= lh f."""
    if method == "dp":
        ok = vid_membership(X, depth, cap)
        return FiniteTree(frozenset(f for f, good in ok.items() if good))
    if method != "attractor":
        raise ValueError(f"unknown method {method!r}")
    nodes = set()
    if solve_game((), (), X) != II:
        return FiniteTree(frozenset())
    nodes.add(())
    frontier = [()]
    for n in range(1, depth + 1):
        nxt = []
        for g in frontier:
            for a in range(cap + 1):
                f = g + (a,)
                if all(solve_game(f, u, X) == II for u in binary_words(n)):
                    nxt.append(f)
        nodes.update(nxt)
        frontier = nxt
    return FiniteTree(frozenset(nodes))


@dataclass(frozen=True)
class IdealVerdict:
    verdict: str
    rank: dict

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "rank": self.rank}


def ideal_rank_verdict(X: CappedPointset, xi: int, depth: int, cap: int) -> dict:
    """Three-valued membership in the rank-stratified ideal, plus the ill-foundedness proxy.

    The capped vid tree is a subtree of the true one, so a capped rank >= xi
    certifies membership. An empty vid certifies non-membership at every xi.
    """
    if xi > depth:
        raise ValueError("xi must not exceed the depth cap")
    rv = rank_capped(vid(X, depth, cap), depth, cap)
    if rv.n >= xi:
        level = "In"
    elif isinstance(rv, Exact) and rv.n == -1:
        level = "Out"
    else:
        level = "Unknown"
    if isinstance(rv, AtLeastAtCap):
        proxy = "ApparentIn"
    elif rv.n == -1:
        proxy = "Out"
    else:
        proxy = "ApparentOut"
    return {"rank_level": level, "ill_founded_proxy": proxy, "rank": rv.to_json()}


@dataclass
class SandwichReport:
    lower_violations: list = field(default_factory=list)
    upper_violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.lower_violations and not self.upper_violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "lower_violations": self.lower_violations,
                "upper_violations": self.upper_violations}


def check_ideal_sandwich(S: NormalTree, T: NormalTree, depth: int, cap: int,
                         vid_tree: Optional[FiniteTree] = None) -> SandwichReport:
    """Check Lip(S,T) + Lip(T,S) <= vid(S^T) <= Lip(S,T) & Lip(T,S) node by node.

    Budgets f, g range over entries <= cap; sums f + g reach 2*cap, so the
    vid tree and the pointset S^T are computed with value cap 2*cap. That
    cap is what lets player I reproduce the sums s + g used in the
    upper inclusion.
    """
    big = 2 * cap
    X = symmetric_difference(S, T, depth, big)
    V = vid(X, depth, big) if vid_tree is None else vid_tree
    F = lip(S, T, depth, cap)
    G = lip(T, S, depth, cap)
    rep = SandwichReport()
    by_len: dict = {}
    for g in G.nodes:
        by_len.setdefault(len(g), []).append(g)
    for f in sorted(F.nodes):
        for g in by_len.get(len(f), ()):
            rep.checked += 1
            h = seq_add(f, g)
            if h not in V:
                rep.lower_violations.append({"f": list(f), "g": list(g)})
    both = F.nodes & G.nodes
    for f in sorted(n for n in V.nodes if max(n, default=0) <= cap):
        rep.checked += 1
        if f not in both:
            rep.upper_violations.append({"f": list(f)})
    return rep
