"""Command-line front end: every subcommand writes one JSON report.

Report schema: {tool, version, config, results[], violations[]}. Exit code 0
on success, 1 when a checked property is violated, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import c0eq, descriptors as D, games, ideals, normal_trees as NT, reductions as R, suites, trees
from .actions import LevelMap, build_lipschitz_pair, verify_pair

TOOL = "borelkit"
VERSION = "0.1.0"

C0_FIXTURES = {
    "e0": c0eq.E0Family,
    "e3": c0eq.E3Family,
    "lv": c0eq.LVFamily,
    "dmax": c0eq.DMaxFamily,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"command": self.command, "seed": self.seed, "rng": "numpy SeedSequence/PCG64",
                **self.params}


def _default_seed() -> int:
    raw = os.environ.get("BORELKIT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BORELKIT_SEED must be an integer, got {raw!r}")


def _load(arg: str):
    """Inline JSON, or @path to a JSON file."""
    try:
        if arg.startswith("@"):
            with open(arg[1:]) as fh:
                return json.load(fh)
        return json.loads(arg)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read JSON from {arg!r}: {e}")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=json.dumps) if isinstance(x, (set, frozenset)) else items
    if hasattr(x, "to_json"):
        return _jsonable(x.to_json())
    if hasattr(x, "item"):  # numpy scalars
        return x.item()
    return x


def _word(s: str) -> tuple:
    if any(c not in "01" for c in s):
        raise UsageError(f"binary word expected, got {s!r}")
    return tuple(int(c) for c in s)


def _seq(s: str) -> tuple:
    return tuple(int(v) for v in s.split(",")) if s else ()


# ---------------------------------------------------------------- handlers
# each returns (results, violations)

def cmd_tree(a):
    if a.action == "rank":
        T = trees.FiniteTree.from_json(_load(a.tree))
        v = trees.rank(T) if a.depth is None else trees.rank_capped(T, a.depth, a.cap or 0)
        return [{"rank": v.to_json()}], []
    if a.action == "cw-add":
        S, T = (trees.FiniteTree.from_json(_load(x)) for x in (a.S, a.T))
        U = trees.cw_add(S, T)
        return [{"tree": U.to_json(), "rank": trees.rank(U).to_json()}], []
    if a.action == "star-sum":
        Ts = [trees.FiniteTree.from_json(t) for t in _load(a.trees)]
        U = trees.star_sum(Ts)
        return [{"tree": U.to_json(), "rank": trees.rank(U).to_json()}], []
    if a.action == "contract":
        U = trees.contract(trees.FiniteTree.from_json(_load(a.tree)))
        return [{"tree": U.to_json()}], []
    raise UsageError(a.action)


def cmd_nt(a):
    if a.action == "lip":
        S, T = (NT.NormalTree.from_json(_load(x)) for x in (a.S, a.T))
        L = NT.lip(S, T, a.depth, a.cap)
        return [{"lip": L.to_json(), "leq": NT.leq_nt_verdict(S, T, a.depth, a.cap).to_json()}], []
    if a.action == "lr":
        Q = NT.TriTree.from_json(_load(a.Q))
        Rt = NT.lr_transform(Q)
        rep = NT.lr_check_properties(Rt)
        return [{"transform": Rt.to_json(), "properties": rep.to_json()}], rep.violations
    if a.action == "theta-check":
        Q = NT.TriTree.from_json(_load(a.Q))
        Rt = NT.lr_transform(Q)
        ok, level = NT.lip_vs_slice(Rt, _word(a.x), _word(a.y))
        viol = [] if ok else [{"first_differing_level": level}]
        return [{"agree": ok, "level": level}], viol
    raise UsageError(a.action)


def _pointset(a):
    return games.CappedPointset.from_json(_load(a.X), a.depth, a.cap)


def cmd_game(a):
    if a.action == "solve":
        return [{"winner": games.solve_game(_seq(a.f), _word(a.u), _pointset(a))}], []
    if a.action == "vid":
        V = games.vid(_pointset(a), a.depth, a.cap, a.method)
        return [{"vid": V.to_json(), "rank": trees.rank_capped(V, a.depth, a.cap).to_json()}], []
    if a.action == "sandwich":
        S, T = (NT.NormalTree.from_json(_load(x)) for x in (a.S, a.T))
        rep = games.check_ideal_sandwich(S, T, a.depth, a.cap)
        return [rep.to_json()], rep.lower_violations + rep.upper_violations
    raise UsageError(a.action)


def _theta(text: str):
    if text == "identity":
        return lambda x: x
    if text.startswith("inter:"):
        B = D.set_from_json(_load(text[len("inter:"):]))
        return lambda x: D.combine("inter", x, B)
    raise UsageError("map must be 'identity' or 'inter:<set json>'")


def cmd_ideal(a):
    if a.action == "member":
        I = ideals.ideal_from_json(_load(a.ideal))
        X = D.point_from_json(_load(a.set))
        return [ideals.membership(I, X, a.depth).to_json()], []
    if a.action == "classify":
        return [{"class": ideals.classify_summable(ideals.weights_from_json(_load(a.weights)))}], []
    if a.action == "rb-witness":
        p = [Fraction(v) for v in a.p.split(",")]
        p += [p[-1]] * (a.imax + 1 - len(p))
        W = ideals.rb_witness_summable(p, ideals.Harmonic(), a.imax)
        rep = ideals.check_rb_witness(W, ideals.Harmonic())
        viol = [] if rep.ok else [{"bound_failures": rep.bound_failures, "ordered": rep.ordered}]
        return [{"witness": W.to_json(), "check": rep.to_json()}], viol
    if a.action == "check-hom":
        I = ideals.ideal_from_json(_load(a.ideal))
        J = ideals.ideal_from_json(_load(a.target)) if a.target else I
        import numpy as np
        rng = np.random.default_rng(np.random.SeedSequence(a.seed))
        samples = [R.sample_sets(rng) for _ in range(a.n)]
        rep = ideals.check_delta_homomorphism(_theta(a.map), I, J, samples)
        return [rep.to_json()], rep.failures
    raise UsageError(a.action)


def _family(a):
    if a.fixture:
        return C0_FIXTURES[a.fixture]()
    if a.family:
        return c0eq.family_from_json(_load(a.family))
    raise UsageError("give --fixture or --family")


def cmd_c0(a):
    if a.action == "classify":
        return [c0eq.classify_c0(_family(a), a.K).to_json()], []
    if a.action == "lv-check":
        rep = c0eq.check_lv(_family(a), a.K, seed=a.seed)
        return [rep.to_json()], rep.failures
    if a.action == "net":
        X = c0eq.FiniteMetricSpace.from_json(_load(a.space))
        r = c0eq.parse_rational(a.r)
        return [{"net": c0eq.extract_net(X, r), "r": str(r)}], []
    if a.action == "grainy":
        words = a.words.split(",")
        q = c0eq.parse_rational(a.q)
        return [{"grainy": c0eq.grainy_check(words, q)}], []
    raise UsageError(a.action)


def cmd_reduce(a):
    if a.action == "run":
        if a.case not in R.CASES:
            raise UsageError(f"unknown case {a.case!r}; choose from {sorted(R.CASES)}")
        rep = R.run_reduction_suite(a.case, a.n, a.seed, a.depth)
        return [rep], rep["counterexamples"]
    if a.action == "koch":
        curve = R.koch_curve(a.alpha, a.level)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        m = len(curve) - 1
        for j, (x, y) in enumerate(curve):
            w.writerow([f"{j / m:.12g}", f"{x:.12g}", f"{y:.12g}"])
        return buf.getvalue(), []
    raise UsageError(a.action)


def cmd_f2(a):
    if a.action == "build":
        maps = build_lipschitz_pair(a.depth)
        if a.out:
            with open(a.out, "w") as fh:
                json.dump(maps.to_json(), fh)
        rep = verify_pair(maps, a.depth)
        return [{"N": a.depth, "processed": len(maps.processed), "flags": maps.flags,
                 "out": a.out, "verify": {"ok": rep.ok}}], rep.violations
    if a.action == "verify":
        maps = LevelMap.from_json(_load("@" + a.maps))
        rep = verify_pair(maps)
        return [rep.to_json()], rep.violations
    raise UsageError(a.action)


def cmd_suite(a):
    if a.which == "all":
        only = None
    else:
        try:
            only = {int(v) for v in a.which.split(",")}
        except ValueError:
            raise UsageError("suite takes 'all' or criterion numbers like 1,7")
        if not only <= set(range(1, len(suites.CRITERIA) + 1)):
            raise UsageError("criterion numbers run from 1 to 14")
    results = suites.run_all(a.seed, only)
    for r in results:
        print(r.line(), file=sys.stderr)
    out = []
    for r in results:
        d = r.to_json()
        d.pop("seconds")  # keep reports byte-identical across runs
        out.append(d)
    return out, [{"criterion": r.number, "name": r.name} for r in results if not r.passed]


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description="Executable constructions on Borel equivalence relations.")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=None, help="seed (default: BORELKIT_SEED or 0)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(parent, name, **kw):
        sp = parent.add_parser(name, **kw)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        return sp

    t = sub.add_parser("tree").add_subparsers(dest="action", required=True)
    sp = add(t, "rank"); sp.add_argument("--tree", required=True)
    sp.add_argument("--depth", type=int); sp.add_argument("--cap", type=int)
    sp = add(t, "cw-add"); sp.add_argument("--S", required=True); sp.add_argument("--T", required=True)
    sp = add(t, "star-sum"); sp.add_argument("--trees", required=True)
    sp = add(t, "contract"); sp.add_argument("--tree", required=True)

    n = sub.add_parser("nt").add_subparsers(dest="action", required=True)
    sp = add(n, "lip"); sp.add_argument("--S", required=True); sp.add_argument("--T", required=True)
    sp.add_argument("--depth", type=int, default=3); sp.add_argument("--cap", type=int, default=3)
    sp = add(n, "lr"); sp.add_argument("--Q", required=True)
    sp = add(n, "theta-check"); sp.add_argument("--Q", required=True)
    sp.add_argument("--x", required=True); sp.add_argument("--y", required=True)

    g = sub.add_parser("game").add_subparsers(dest="action", required=True)
    for name in ("solve", "vid"):
        sp = add(g, name); sp.add_argument("--X", required=True)
        sp.add_argument("--depth", type=int, default=None); sp.add_argument("--cap", type=int, default=None)
    g.choices["solve"].add_argument("--f", default="")
    g.choices["solve"].add_argument("--u", default="")
    g.choices["vid"].add_argument("--method", choices=("dp", "attractor"), default="dp")
    sp = add(g, "sandwich"); sp.add_argument("--S", required=True); sp.add_argument("--T", required=True)
    sp.add_argument("--depth", type=int, default=3); sp.add_argument("--cap", type=int, default=3)

    i = sub.add_parser("ideal").add_subparsers(dest="action", required=True)
    sp = add(i, "member"); sp.add_argument("--ideal", required=True); sp.add_argument("--set", required=True)
    sp.add_argument("--depth", type=int, default=10)
    sp = add(i, "classify"); sp.add_argument("--weights", required=True)
    sp = add(i, "rb-witness"); sp.add_argument("--p", required=True, help="comma-separated p_i; the last repeats")
    sp.add_argument("--imax", type=int, default=16)
    sp = add(i, "check-hom"); sp.add_argument("--ideal", required=True); sp.add_argument("--target")
    sp.add_argument("--map", default="identity"); sp.add_argument("--n", type=int, default=50)

    c = sub.add_parser("c0").add_subparsers(dest="action", required=True)
    for name in ("classify", "lv-check"):
        sp = add(c, name); sp.add_argument("--fixture", choices=sorted(C0_FIXTURES))
        sp.add_argument("--family"); sp.add_argument("--K", type=int, default=8 if name == "classify" else 12)
    sp = add(c, "net"); sp.add_argument("--space", required=True); sp.add_argument("--r", required=True)
    sp = add(c, "grainy"); sp.add_argument("--words", required=True); sp.add_argument("--q", required=True)

    r = sub.add_parser("reduce").add_subparsers(dest="action", required=True)
    sp = add(r, "run"); sp.add_argument("--case", required=True); sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--depth", type=int, default=10)
    sp = add(r, "koch"); sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--level", type=int, default=4)

    f = sub.add_parser("f2").add_subparsers(dest="action", required=True)
    sp = add(f, "build"); sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--out", dest="out", default=None)
    sp = add(f, "verify"); sp.add_argument("maps")

    s = add(sub, "suite"); s.add_argument("which", nargs="?", default="all")
    return p


HANDLERS = {"tree": cmd_tree, "nt": cmd_nt, "game": cmd_game, "ideal": cmd_ideal, "c0": cmd_c0,
            "reduce": cmd_reduce, "f2": cmd_f2, "suite": cmd_suite}


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if a.seed is None:
            a.seed = _default_seed()
        params = {k: v for k, v in sorted(vars(a).items()) if k not in ("command", "seed", "out")}
        config = RunConfig(a.command, a.seed, params)
        results, violations = HANDLERS[a.command](a)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except KeyError as e:
        print(f"usage error: missing or unknown key {e}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    if isinstance(results, str):  # CSV output
        text = results
    else:
        report = {"tool": TOOL, "version": VERSION, "config": config.to_json(),
                  "results": results, "violations": violations}
        text = json.dumps(_jsonable(report), sort_keys=True) + "\n"
    # f2 build uses --out for the maps file; the report then goes to stdout
    target = None if a.command == "f2" else getattr(a, "out", None)
    if target:
        with open(target, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if violations else 0


def main(argv: Optional[list] = None) -> None:
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
