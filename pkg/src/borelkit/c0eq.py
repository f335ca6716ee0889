"""Finite metric spaces, galaxies, threshold statistics and families of them.

Distances are exact Fractions, except for the logarithmic example family
whose distances are floats (compared with a 1e-12 tolerance).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import descriptors as D
from .trees import pair_decode

FLOAT_TOL = 1e-12


def parse_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


@dataclass(frozen=True)
class FiniteMetricSpace:
    d: tuple  # n x n tuple of tuples
    labels: Optional[tuple] = None

    def __post_init__(self):
        n = len(self.d)
        if any(len(row) != n for row in self.d):
            raise ValueError("distance matrix must be square")
        tol = 0 if self.exact else FLOAT_TOL
        for i in range(n):
            if self.d[i][i] != 0:
                raise ValueError("d(i,i) must be 0")
            for j in range(n):
                if i != j and not self.d[i][j] > 0:
                    raise ValueError("distinct points need positive distance")
                if self.d[i][j] != self.d[j][i]:
                    raise ValueError("distance matrix must be symmetric")
        if n <= 40:
            for i, j, k in itertools.product(range(n), repeat=3):
                if self.d[i][k] > self.d[i][j] + self.d[j][k] + tol:
                    raise ValueError(f"triangle inequality fails at {(i, j, k)}")

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for row in self.d for x in row)

    @property
    def n(self) -> int:
        return len(self.d)

    def dist(self, i: int, j: int):
        return self.d[i][j]

    def diameter(self):
        return max((x for row in self.d for x in row), default=0)

    def edges(self) -> list:
        return sorted((self.d[i][j], i, j) for i in range(self.n) for j in range(i + 1, self.n))

    def to_json(self) -> dict:
        out = {"d": [[str(x) if isinstance(x, Fraction) else x for x in row] for row in self.d]}
        if self.labels is not None:
            out["labels"] = [str(x) for x in self.labels]
        return out

    @classmethod
    def from_json(cls, data) -> "FiniteMetricSpace":
        rows = data["d"] if isinstance(data, dict) else data
        return cls(tuple(tuple(parse_rational(x) for x in row) for row in rows))


def line_space(points: Sequence) -> FiniteMetricSpace:
    pts = [parse_rational(p) for p in points]
    return FiniteMetricSpace(tuple(tuple(abs(a - b) for b in pts) for a in pts), tuple(pts))


def uniform_space(n: int, dist=Fraction(1)) -> FiniteMetricSpace:
    return FiniteMetricSpace(tuple(tuple(0 if i == j else dist for j in range(n)) for i in range(n)))


# ---------------------------------------------------------------- galaxies and statistics

def galaxy(A: FiniteMetricSpace, q, a: int) -> frozenset:
    """Points reachable from a by chains with steps < q."""
    seen = {a}
    stack = [a]
    while stack:
        i = stack.pop()
        for j in range(A.n):
            if j not in seen and A.d[i][j] < q:
                seen.add(j)
                stack.append(j)
    return frozenset(seen)


def dist_spectrum(A: FiniteMetricSpace) -> frozenset:
    return frozenset(A.d[i][j] for i in range(A.n) for j in range(i + 1, A.n))


def delta_r(A: FiniteMetricSpace, r):
    """Least threshold whose galaxies include one of diameter >= r; inf when none.

    Edges are merged in increasing order with union-find; the critical edge
    weight w is the infimum of the strict thresholds q > w.
    """
    if A.n and r <= 0:
        raise ValueError("r must be positive")
    parent = list(range(A.n))
    members = {i: [i] for i in range(A.n)}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    diam = {i: 0 for i in range(A.n)}
    for w, i, j in A.edges():
        a, b = find(i), find(j)
        if a == b:
            continue
        cross = max(A.d[x][y] for x in members[a] for y in members[b])
        parent[b] = a
        members[a].extend(members.pop(b))
        diam[a] = max(diam[a], diam.pop(b), cross)
        if diam[a] >= r:
            return w
    return math.inf


def delta_r_bruteforce(A: FiniteMetricSpace, r):
    """Try every edge weight w as a threshold just above w."""
    for w in sorted(dist_spectrum(A)):
        for a in range(A.n):
            comp = _closed_galaxy(A, w, a)
            if max((A.d[x][y] for x in comp for y in comp), default=0) >= r:
                return w
    return math.inf


def _closed_galaxy(A, w, a):
    seen = {a}
    stack = [a]
    while stack:
        i = stack.pop()
        for j in range(A.n):
            if j not in seen and A.d[i][j] <= w:
                seen.add(j)
                stack.append(j)
    return seen


def bottleneck(A: FiniteMetricSpace, steps: Optional[int] = None) -> list:
    """Least possible largest step over chains from i to j (with at most `steps` steps)."""
    n = A.n
    B = [[A.d[i][j] for j in range(n)] for i in range(n)]
    if steps is None:
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = max(B[i][k], B[k][j])
                    if v < B[i][j]:
                        B[i][j] = v
        return B
    cur = [row[:] for row in B]
    for _ in range(max(steps - 1, 0)):
        cur = [[min(max(cur[i][k], B[k][j]) for k in range(n)) for j in range(n)] for i in range(n)]
    return cur


# ---------------------------------------------------------------- families

class C0Family:
    """k -> finite metric space, k = 1, 2, 3, ..."""

    name = "family"

    def space(self, k: int) -> FiniteMetricSpace:
        raise NotImplementedError

    def spaces(self, K: int) -> list:
        return [self.space(k) for k in range(1, K + 1)]

    def indices(self, K: int) -> list:
        return list(range(1, K + 1))

    def closed_form(self) -> Optional[dict]:
        """(co1), (co2), nontriviality when known exactly."""
        return None

    def to_json(self) -> dict:
        return {"family": self.name}


@dataclass
class E0Family(C0Family):
    """X_k = {0, 1} with d = 1."""

    name = "E0family"

    def space(self, k):
        return uniform_space(2)

    def closed_form(self):
        # the only distance is 1, so no band [e', e) below 1 meets a spectrum
        return {"nontrivial": True, "co1": False, "co2": False}


@dataclass
class E3Family(C0Family):
    """Space k codes a pair (i, j) = pair_decode(k - 1); X_k = {0, 1} with d = 1/(i+1)."""

    name = "E3family"

    def space(self, k):
        i, _ = pair_decode(k - 1)
        return uniform_space(2, Fraction(1, i + 1))

    def closed_form(self):
        # each value 1/(i+1) recurs infinitely often: (co2) holds. For r > 0,
        # delta(r, X_k) is 1/(i+1) >= r or infinite, so liminf >= r: (co1) fails.
        return {"nontrivial": True, "co1": False, "co2": True}


@dataclass
class DMaxFamily(C0Family):
    """X_k = {0, 1/k, 2/k, ..., 1} on the line."""

    kmax: Optional[int] = None
    name = "DMax"

    def space(self, k):
        if self.kmax is not None and k > self.kmax:
            raise IndexError("beyond kmax")
        return line_space([Fraction(i, k) for i in range(k + 1)])

    def spaces(self, K):
        if self.kmax is not None:
            K = min(K, self.kmax)
        return super().spaces(K)

    def closed_form(self):
        # delta(r, X_k) = 1/k for r <= 1
        return {"nontrivial": True, "co1": True, "co2": True}

    def to_json(self):
        return {"family": self.name, "kmax": self.kmax}


@dataclass
class LVFamily(C0Family):
    """X_k = {1, ..., 2^k} with d_k(m, n) = log2(|m - n| + 1) / k."""

    name = "LVexample"

    def space(self, k):
        n = 1 << k
        row = [math.log2(g + 1) / k for g in range(n)]
        return _LazyLogSpace(k, n, row)

    def closed_form(self):
        # adjacent points are 1/k apart and the diameter is 1: delta(r, X_k) <= 1/k
        return {"nontrivial": True, "co1": True, "co2": True}


class _LazyLogSpace(FiniteMetricSpace):
    """Translation-invariant metric on 2^k points stored by gap; skips the cubic triangle check."""

    def __init__(self, k, n, row):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_row", row)
        object.__setattr__(self, "labels", tuple(range(1, n + 1)))

    @property
    def d(self):
        n, row = self._n, self._row
        return tuple(tuple(row[abs(i - j)] for j in range(n)) for i in range(n))

    @property
    def n(self):
        return self._n

    @property
    def exact(self):
        return False

    def dist(self, i, j):
        return self._row[abs(i - j)]

    def diameter(self):
        return self._row[-1]


@dataclass
class RestrictedFamily(C0Family):
    """The base family on the indices in A, renumbered 1, 2, ..."""

    base: C0Family
    A: object
    name = "DA"

    def _index(self, k: int) -> int:
        # k-th element (1-based) of A, listing base indices 1, 2, ...
        count, j = 0, 0
        while True:
            j += 1
            if self.A.contains(j):
                count += 1
                if count == k:
                    return j
            if j > 10 ** 6:
                raise ValueError("index set is too thin on the inspected window")

    def space(self, k):
        return self.base.space(self._index(k))

    def base_indices(self, K: int) -> list:
        return [self._index(k) for k in range(1, K + 1)]

    def closed_form(self):
        if D.is_finite(self.A) is not False:
            return None
        cf = self.base.closed_form()
        # these statistics hold on every infinite set of indices
        if isinstance(self.base, (E0Family, DMaxFamily, LVFamily)) and cf is not None:
            return cf
        return None

    def to_json(self):
        return {"family": self.name, "base": self.base.to_json(), "A": self.A.to_json()}


@dataclass
class TableFamily(C0Family):
    table: list = field(default_factory=list)
    name = "table"

    def space(self, k):
        return self.table[k - 1]

    def spaces(self, K):
        return self.table[:K]

    def to_json(self):
        return {"family": self.name, "spaces": [s.to_json() for s in self.table]}


def build_DA(F: C0Family, A) -> RestrictedFamily:
    return RestrictedFamily(F, A)


def dmax(kmax: int) -> DMaxFamily:
    return DMaxFamily(kmax)


def family_from_json(d: dict) -> C0Family:
    name = d["family"]
    if name == "E0family":
        return E0Family()
    if name == "E3family":
        return E3Family()
    if name in ("DMax", "dmax"):
        return DMaxFamily(d.get("kmax"))
    if name == "LVexample":
        return LVFamily()
    if name == "DA":
        return RestrictedFamily(family_from_json(d["base"]), D.set_from_json(d["A"]))
    if name == "table":
        return TableFamily([FiniteMetricSpace.from_json(s) for s in d["spaces"]])
    raise ValueError(f"unknown family {name!r}")


# ---------------------------------------------------------------- classification

@dataclass
class C0Verdict:
    kind: str  # E0like, E3like, HasTurbulentSub, Trivial
    exact: bool
    stats: dict = field(default_factory=dict)

    def label(self) -> str:
        return self.kind if self.exact else f"Apparent({self.kind})"

    def to_json(self) -> dict:
        return {"verdict": self.label(), "exact": self.exact, "stats": self.stats}


def _verdict_from_conditions(co1: bool, co2: bool) -> str:
    if co1:
        return "HasTurbulentSub"
    return "E3like" if co2 else "E0like"


def classify_c0(F: C0Family, K: int = 8) -> C0Verdict:
    if K < 1:
        raise ValueError("K must be at least 1")
    cf = F.closed_form()
    if cf is not None:
        if not cf["nontrivial"]:
            raise ValueError("trivial family: limsup of diameters is 0")
        return C0Verdict(_verdict_from_conditions(cf["co1"], cf["co2"]), True, dict(cf))
    return _apparent(F, K)


def _apparent(F: C0Family, K: int) -> C0Verdict:
    """Statistics of the truncation k <= K; labelled as apparent, never exact."""
    spaces = F.spaces(K)
    diams = [s.diameter() for s in spaces]
    tail = spaces[len(spaces) // 2:]
    tail_diams = diams[len(spaces) // 2:]
    if max(tail_diams, default=0) == 0:
        return C0Verdict("Trivial", False, {"diameters": [str(x) for x in diams]})
    r = max(tail_diams) / 2
    deltas = [delta_r(s, r) for s in tail]
    finite = [x for x in deltas if x != math.inf]
    small = [min(dist_spectrum(s)) for s in tail if s.n > 1]
    stats = {"r": str(r), "delta_tail": [str(x) for x in deltas],
             "min_distance_tail": [str(x) for x in small]}
    # (co1) looks true when the thresholds keep shrinking across the tail
    co1 = len(finite) >= 2 and finite[-1] < finite[0] and finite[-1] <= r / 2
    # (co2) looks true when the spectra keep producing new small distances
    co2 = co1 or len(set(small)) > 1 or (small and min(small) < min(tail_diams))
    stats.update({"co1": co1, "co2": bool(co2)})
    return C0Verdict(_verdict_from_conditions(co1, bool(co2)), False, stats)


# ---------------------------------------------------------------- LV condition

def log_schedule(m: int, k: int) -> float:
    return math.log2(m) / k if m > 1 else 0.0


@dataclass
class LVReport:
    passed: bool
    worst_slack: float
    failures: list
    checked: int

    def to_json(self) -> dict:
        return {"passed": self.passed, "worst_slack": self.worst_slack, "failures": self.failures,
                "checked": self.checked}


def check_lv(F: C0Family, K: int, schedule: Callable = log_schedule, max_steps: int = 4,
             samples: int = 200, seed: int = 0, exhaustive_limit: int = 8) -> LVReport:
    """Check d(x_0, x_m) <= eps(m, k) + max_j d(x_j, x_{j+1}) for k <= K and m <= max_steps.

    Spaces with at most exhaustive_limit points are checked over all chains
    through bounded-step bottleneck distances; larger ones on sampled chains.
    Slack is eps + max step - d(x_0, x_m); negative slack is a failure.
    """
    import random
    rng = random.Random(seed)
    worst = math.inf
    failures = []
    checked = 0
    for k, X in zip(F.indices(K), F.spaces(K)):
        tol = 0 if X.exact else FLOAT_TOL
        for m in range(1, max_steps + 1):
            eps = schedule(m, k)
            if X.n <= exhaustive_limit:
                B = bottleneck(X, m)
                pairs = [(i, j, B[i][j]) for i in range(X.n) for j in range(X.n)]
            else:
                pairs = []
                for _ in range(samples):
                    chain = _sample_chain(rng, X.n, m)
                    step = max(X.dist(chain[t], chain[t + 1]) for t in range(m))
                    pairs.append((chain[0], chain[-1], step))
            for i, j, step in pairs:
                checked += 1
                slack = float(eps + step - X.dist(i, j))
                worst = min(worst, slack)
                if slack < -tol:
                    failures.append({"k": k, "m": m, "ends": [i, j], "slack": slack})
    return LVReport(not failures, worst, failures[:20], checked)


def _sample_chain(rng, n: int, m: int) -> list:
    # half the chains are arithmetic progressions, the extremal shape on a line
    if rng.random() < 0.5:
        g = rng.randint(1, max(1, (n - 1) // m))
        start = rng.randrange(0, n - g * m)
        return [start + g * t for t in range(m + 1)]
    return [rng.randrange(n) for _ in range(m + 1)]


# ---------------------------------------------------------------- nets

def shortest_far_chain(X: FiniteMetricSpace, r) -> Optional[list]:
    """Fewest-step chain with steps < r whose endpoints are at distance >= 4r."""
    best = None
    for s in range(X.n):
        prev = {s: None}
        frontier = [s]
        found = None
        while frontier and found is None:
            nxt = []
            for i in frontier:
                for j in range(X.n):
                    if j not in prev and X.dist(i, j) < r:
                        prev[j] = i
                        nxt.append(j)
                        if X.dist(s, j) >= 4 * r:
                            found = j
                            break
                if found is not None:
                    break
            frontier = nxt
        if found is not None:
            path = [found]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            path.reverse()
            if best is None or len(path) < len(best):
                best = path
    return best


def extract_net(X: FiniteMetricSpace, r, chain: Optional[list] = None) -> list:
    """Walk a chain and keep each point at distance >= r from every point kept so far.

    The chain defaults to a fewest-step chain with steps < r spanning
    distance >= 4r; when the space has none, all points in index order.
    """
    if chain is None:
        chain = shortest_far_chain(X, r) or list(range(X.n))
    kept: list = []
    for x in chain:
        if all(X.dist(x, y) >= r for y in kept):
            kept.append(x)
    return kept


def farthest_point_net(X: FiniteMetricSpace, eps) -> list:
    """Greedy eps-net: every point is within eps of the returned set."""
    if X.n == 0:
        return []
    net = [0]
    dist = [X.dist(0, j) for j in range(X.n)]
    while True:
        j = max(range(X.n), key=lambda t: dist[t])
        if dist[j] <= eps:
            return net
        net.append(j)
        dist = [min(dist[t], X.dist(j, t)) for t in range(X.n)]


# ---------------------------------------------------------------- acting group

@dataclass
class ActingGroup:
    """Symmetric groups of X_k for k <= K with rho_k(s, t) = max_x d_k(s(x), t(x))."""

    family: C0Family
    K: int
    size_cap: int = 8
    spaces: list = field(init=False)

    def __post_init__(self):
        self.spaces = self.family.spaces(self.K)
        for X in self.spaces:
            if X.n > self.size_cap:
                raise ValueError("size cap exceeded: symmetric group too large")

    def elements(self, k: int):
        return itertools.permutations(range(self.spaces[k - 1].n))

    def identity(self, k: int) -> tuple:
        return tuple(range(self.spaces[k - 1].n))

    def rho(self, k: int, s: tuple, t: tuple):
        X = self.spaces[k - 1]
        return max((X.dist(s[x], t[x]) for x in range(X.n)), default=0)

    def act(self, g: dict, x: Sequence) -> tuple:
        """(g.x)_k = g_k(x_k); g maps k to a permutation, identity elsewhere."""
        return tuple(g[k][xk] if k in g else xk for k, xk in enumerate(x, start=1))


def acting_group_truncation(F: C0Family, K: int) -> ActingGroup:
    return ActingGroup(F, K)


# ---------------------------------------------------------------- grainy sets

def _bits(w) -> tuple:
    return tuple(int(c) for c in w) if isinstance(w, str) else tuple(w)


def sigma(a, b) -> Fraction:
    """sum of 1/n over positions n >= 1 where the words differ."""
    a, b = _bits(a), _bits(b)
    if len(a) != len(b):
        raise ValueError("words must have equal length")
    return sum((Fraction(1, n) for n in range(1, len(a)) if a[n] != b[n]), Fraction(0))


def sigma_galaxy(A: Sequence, q, a) -> list:
    words = [_bits(w) for w in A]
    start = words.index(_bits(a))
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for j in range(len(words)):
            if j not in seen and sigma(words[i], words[j]) < q:
                seen.add(j)
                stack.append(j)
    return [words[j] for j in sorted(seen)]


def grainy_check(A: Sequence, q) -> bool:
    """sigma(a, b) < 1 whenever b lies in the sigma-galaxy of a with threshold q."""
    words = [_bits(w) for w in A]
    if len({len(w) for w in words}) > 1:
        raise ValueError("words must have equal length")
    return all(sigma(a, b) < 1 for a in words for b in sigma_galaxy(words, q, a))
