"""The acceptance checks as seeded, self-timed functions shared by the CLI and the tests."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import descriptors as D
from . import reductions as R
from .actions import build_lipschitz_pair, find_cycle, is_cycle, verify_pair
from .c0eq import E0Family, E3Family, LVFamily, check_lv, classify_c0
from .games import CappedPointset, check_ideal_sandwich, vid
from .ideals import (Fin, FinTimes0, FubiniProduct, Harmonic, Zero, ZeroTimesFin, check_rb_witness,
                     membership, rb_witness_summable)
from .normal_trees import binary_words, lip_vs_slice, lr_check_properties, lr_transform, random_normal_tree, random_tritree
from .trees import FiniteTree, cw_add, rank, seq_add, star_product, star_sum


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name} ({self.seconds:.2f} s, budget {self.budget:g} s)"

    def to_json(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "seconds": round(self.seconds, 3), "budget": self.budget, "details": self.details}


def _rngs(seed: int, number: int):
    ss = np.random.SeedSequence(seed, spawn_key=(number,))
    return np.random.default_rng(ss), random.Random(int(ss.generate_state(1)[0]))


def random_tree(rng: random.Random, branching: int = 3, depth: int = 5, p_stop: float = 0.3) -> FiniteTree:
    """A random finite tree over N; the empty tree with small probability."""
    if rng.random() < 0.05:
        return FiniteTree(frozenset())
    nodes = {()}
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            if rng.random() < p_stop:
                continue
            for a in rng.sample(range(5), rng.randint(0, branching)):
                nxt.append(s + (a,))
        nodes.update(nxt)
        frontier = nxt
    return FiniteTree(frozenset(nodes))


def _height(T: FiniteTree) -> int:
    return T.height()


# ---------------------------------------------------------------- criteria

def rank_min_law(seed: int, pairs: int = 500) -> dict:
    _, rng = _rngs(seed, 1)
    bad = []
    for i in range(pairs):
        S, T = random_tree(rng), random_tree(rng)
        lhs = rank(cw_add(S, T)).n
        rhs = min(rank(S).n, rank(T).n)
        if lhs != rhs:
            bad.append({"pair": i, "lhs": lhs, "rhs": rhs})
    return {"ok": not bad, "checked": pairs, "violations": bad[:5]}


def sum_product_laws(seed: int, lists: int = 200) -> dict:
    _, rng = _rngs(seed, 2)
    bad = []
    for i in range(lists):
        Ts = [random_tree(rng, 3, 4) for _ in range(rng.randint(1, 4))]
        ranks = [rank(T).n for T in Ts]
        want = max(ranks) + 1 if max(ranks) >= 0 else 0
        got = rank(star_sum(Ts)).n
        if got != want:
            bad.append({"list": i, "law": "sum", "got": got, "want": want})
        depth = len(Ts)
        P = star_product(Ts, depth)
        for m in range(depth):
            has_level = any(len(t) == m + 1 for t in P.nodes)
            need = all(_height(Ts[k]) >= m for k in range(m + 1))
            if has_level != need:
                bad.append({"list": i, "law": "product", "level": m + 1, "got": has_level, "want": need})
    return {"ok": not bad, "checked": lists, "violations": bad[:5]}


def lr_transform_check(seed: int, trees: int = 50) -> dict:
    _, rng = _rngs(seed, 3)
    viol, slice_bad = 0, []
    words = binary_words(4)
    for i in range(trees):
        Q = random_tritree(rng, 4, 2)
        Rt = lr_transform(Q)
        rep = lr_check_properties(Rt)
        viol += len(rep.violations)
        for x in words:
            for y in words:
                ok, lvl = lip_vs_slice(Rt, x, y)
                if not ok:
                    slice_bad.append({"tree": i, "x": list(x), "y": list(y), "level": lvl})
    return {"ok": viol == 0 and not slice_bad, "checked": trees, "property_violations": viol,
            "slice_violations": slice_bad[:5]}


def game_sandwich(seed: int, pairs: int = 20, depth: int = 3, cap: int = 3) -> dict:
    _, rng = _rngs(seed, 4)
    bad = []
    for i in range(pairs):
        S = random_normal_tree(rng, depth, cap)
        T = random_normal_tree(rng, depth, cap)
        rep = check_ideal_sandwich(S, T, depth, cap)
        if not rep.ok:
            bad.append({"pair": i, **rep.to_json()})
    return {"ok": not bad, "checked": pairs, "violations": bad[:3]}


def _random_pointset(rng: random.Random, depth: int, cap: int, p: float) -> CappedPointset:
    full = sorted(CappedPointset.full(depth, cap).pairs)
    return CappedPointset(frozenset(q for q in full if rng.random() < p), depth, cap)


def vid_laws(seed: int, sets: int = 50, depth: int = 2, cap: int = 2) -> dict:
    """Antitonicity and the merge law f + g in vid(X u Y) for disjoint X, Y."""
    _, rng = _rngs(seed, 5)
    bad = []
    for i in range(sets):
        Y = _random_pointset(rng, depth, cap, 0.35)
        X = CappedPointset(frozenset(q for q in Y.pairs if rng.random() < 0.5), depth, cap)
        vx, vy = vid(X, depth, cap), vid(Y, depth, cap)
        if not vy.nodes <= vx.nodes:
            bad.append({"set": i, "law": "antitone"})
        A = X
        B = CappedPointset(frozenset(q for q in _random_pointset(rng, depth, cap, 0.3).pairs
                                     if q not in A.pairs), depth, cap)
        va, vb = vid(A, depth, cap), vid(B, depth, cap)
        vab = vid(A.union(B), depth, 2 * cap)
        for f in va.nodes:
            for g in vb.nodes:
                if len(f) == len(g) and seq_add(f, g) not in vab:
                    bad.append({"set": i, "law": "merge", "f": list(f), "g": list(g)})
    return {"ok": not bad, "checked": sets, "violations": bad[:5]}


def co_d_identity(seed: int, pairs: int = 200, depth: int = 10) -> dict:
    rng, _ = _rngs(seed, 6)
    bad = []
    for i in range(pairs):
        xs = [Fraction(int(rng.integers(0, 2 ** n + 1)), 2 ** n) for n in range(depth + 1)]
        ys = [x if rng.random() < 0.3 else Fraction(int(rng.integers(0, 2 ** n + 1)), 2 ** n)
              for n, x in enumerate(xs)]
        tx = R.map_grid_z0(R.grid_from_values(xs))
        ty = R.map_grid_z0(R.grid_from_values(ys))
        for n in range(depth + 1):
            lhs = abs(ys[n] - xs[n])
            rhs = Fraction(len(tx.block(n) ^ ty.block(n)), 2 ** n)
            if lhs != rhs:
                bad.append({"pair": i, "n": n, "lhs": str(lhs), "rhs": str(rhs)})
    return {"ok": not bad, "checked": pairs, "violations": bad[:5]}


def reduction_suites(seed: int, n: int = 150) -> dict:
    reports = [R.run_reduction_suite(c, n, seed) for c in R.ACCEPTANCE_CASES]
    ok = all(not r["counterexamples"] and r["agreements"] >= 100 for r in reports)
    return {"ok": ok, "cases": {r["case"]: {k: r[k] for k in ("agreements", "unknowns", "matrix")}
                                | {"counterexamples": len(r["counterexamples"])} for r in reports}}


def koch_bounds(seed: int, level: int = 8, grid: int = 10 ** 4, pairs: int = 100) -> dict:
    rng, _ = _rngs(seed, 8)
    out, ok = {}, True
    for alpha in (0.6, 0.8):
        m, M = R.koch_ratio_bounds(alpha, level, grid, seed)
        r = 4.0 ** (-alpha)
        bounds_ok = 0 < m <= M <= 2 / r + 1e-6 and M / m < 25
        q = 2.0
        p = alpha * q
        curve = R.koch_curve(alpha, level)
        fails = 0
        for _ in range(pairs):
            k = int(rng.integers(1, 6))
            x = rng.integers(0, 4 ** level + 1, k) / 4 ** level
            y = rng.integers(0, 4 ** level + 1, k) / 4 ** level
            fails += not R.lp_lq_sandwich(x, y, p, q, (m, M), level, curve)["ok"]
        ok &= bounds_ok and fails == 0
        out[str(alpha)] = {"m": m, "M": M, "2/r": 2 / r, "ratio": M / m, "p": p, "q": q,
                           "sandwich_failures": fails}
    return {"ok": ok, **out}


def metric_embedding(seed: int, spaces: int = 200) -> dict:
    rng, _ = _rngs(seed, 9)
    bad, fallbacks = [], 0
    for i in range(spaces):
        M = R.random_metric_space(rng, int(rng.integers(1, 7)))
        for method in ("stepwise", "oracle"):
            E = R.frechet_embed(M, method)
            fallbacks += E.fallback
            if not R.is_isometric(M, E):
                bad.append({"space": i, "method": method})
    return {"ok": not bad, "checked": spaces, "fallbacks": fallbacks, "violations": bad[:5]}


def rb_witness(seed: int, imax: int = 16) -> dict:
    rng, _ = _rngs(seed, 10)
    p = [Fraction(int(rng.integers(1, 2 ** 12 + 1)), 2 ** 11) for _ in range(imax + 1)]
    W = rb_witness_summable(p, Harmonic(), imax)
    rep = check_rb_witness(W, Harmonic())
    certified = all(e < Fraction(1, 2 ** i) for i, e in enumerate(W.errors))
    return {"ok": rep.ok and certified, "ordered": rep.ordered, "certified": certified,
            "recheck_failures": rep.bound_failures, "blocks": len(W.blocks)}


def c0_fixtures(seed: int) -> dict:
    got = {"E0family": classify_c0(E0Family()).label(), "E3family": classify_c0(E3Family()).label(),
           "LVexample": classify_c0(LVFamily()).label()}
    want = {"E0family": "E0like", "E3family": "E3like", "LVexample": "HasTurbulentSub"}
    lv = check_lv(LVFamily(), 12, seed=seed)
    return {"ok": got == want and lv.passed, "verdicts": got, "lv_passed": lv.passed,
            "lv_checked": lv.checked}


def eyl_builder(seed: int, N: int = 10) -> dict:
    maps = build_lipschitz_pair(N)
    rep = verify_pair(maps, N)
    return {"ok": rep.ok, "violations": rep.violations[:5], "processed": len(rep.processed)}


def eyu_graphs(seed: int, max_nodes: int = 7) -> dict:
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    checked, bad = 0, []
    for G in graph_atlas_g():
        if G.number_of_nodes() > max_nodes or G.number_of_edges() < max(G.number_of_nodes(), 1):
            continue
        checked += 1
        cyc = find_cycle(list(G.nodes), list(G.edges))
        good = (cyc is not None and len(cyc) >= 3 and len(set(cyc)) == len(cyc)
                and is_cycle(cyc, list(G.edges))
                and all(G.has_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))))
        try:
            nx.find_cycle(G)
            oracle = True
        except nx.NetworkXNoCycle:
            oracle = False
        if not (good and oracle):
            bad.append({"edges": [list(e) for e in G.edges], "cycle": cyc})
    return {"ok": not bad and checked > 0, "checked": checked, "violations": bad[:3]}


def _direct_i1(M) -> str:
    """Finitely many nonempty columns: only the default column can be repeated."""
    v = D.is_empty(M.default)
    return {True: "In", False: "Out"}.get(v, "Unknown")


def _direct_e3(M) -> str:
    """Every column finite."""
    vals = [D.is_finite(c) for _, c in M.columns] + [D.is_finite(M.default)]
    if False in vals:
        return "Out"
    return "Unknown" if None in vals else "In"


def fubini_identities(seed: int, samples: int = 200) -> dict:
    rng, _ = _rngs(seed, 14)
    bad, unknown = [], 0
    for i in range(samples):
        x, y = R.sample_matrices(rng)
        M = D.matrix_combine("symdiff", x, y)
        rows = (
            ("I1", membership(FubiniProduct(Fin(), Zero()), M).kind, membership(FinTimes0(), M).kind,
             _direct_i1(M)),
            ("E3", membership(FubiniProduct(Zero(), Fin()), M).kind, membership(ZeroTimesFin(), M).kind,
             _direct_e3(M)),
        )
        for name, a, b, c in rows:
            if "Unknown" in (a, b, c):
                unknown += 1
            elif not a == b == c:
                bad.append({"sample": i, "ideal": name, "product": a, "named": b, "direct": c})
    return {"ok": not bad, "checked": samples, "unknown": unknown, "violations": bad[:5]}


CRITERIA: list = [
    (1, "rank min-law", rank_min_law, 5),
    (2, "sum/product rank laws", sum_product_laws, 5),
    (3, "LR transform", lr_transform_check, 60),
    (4, "game sandwich", game_sandwich, 120),
    (5, "vid laws", vid_laws, 60),
    (6, "co=d identity", co_d_identity, 5),
    (7, "reduction suites", reduction_suites, 60),
    (8, "Koch bounds", koch_bounds, 30),
    (9, "metric embedding", metric_embedding, 10),
    (10, "RB witness", rb_witness, 5),
    (11, "c0 classifier fixtures", c0_fixtures, 60),
    (12, "eyl builder", eyl_builder, 10),
    (13, "eyu cycles", eyu_graphs, 60),
    (14, "Fubini identities", fubini_identities, 60),
]


def run_criterion(number: int, seed: int = 7) -> CriterionResult:
    num, name, fn, budget = CRITERIA[number - 1]
    t = time.perf_counter()
    details = fn(seed)
    dt = time.perf_counter() - t
    return CriterionResult(num, name, bool(details["ok"]) and dt < budget, dt, budget, details)


def run_all(seed: int = 7, only=None) -> list:
    return [run_criterion(num, seed) for num, *_ in CRITERIA if only is None or num in only]
