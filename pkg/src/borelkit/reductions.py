"""Explicit reduction maps on finite descriptions, closed-form equivalence
estimators for the source and target relations, and a seeded suite runner
that checks x E y <=> theta(x) F theta(y) on sampled pairs."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import descriptors as D
from .c0eq import FiniteMetricSpace, E0Family
from .descriptors import Matrix, UltimatelyPeriodic
from .ideals import Density0, Harmonic, Summable, membership
from .trees import pair_code, pair_decode

PAIRING = "zigzag: eta -> 2*eta (eta >= 0) or -2*eta-1 (eta < 0), then Cantor pairing"


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class EqVerdict:
    kind: str  # Equivalent, Inequivalent, Unknown
    depth: Optional[int] = None

    @property
    def definite(self) -> bool:
        return self.kind != "Unknown"

    def __bool__(self):
        raise TypeError("compare verdict.kind instead of truth-testing a verdict")

    def to_json(self) -> dict:
        d = {"verdict": self.kind}
        if self.depth is not None:
            d["depth"] = self.depth
        return d


EQUIV = EqVerdict("Equivalent")
INEQUIV = EqVerdict("Inequivalent")


def _from_bool(b: Optional[bool], depth: Optional[int] = None) -> EqVerdict:
    if b is None:
        return EqVerdict("Unknown", depth)
    return EQUIV if b else INEQUIV


def _from_ideal(v) -> EqVerdict:
    return {"In": EQUIV, "Out": INEQUIV}.get(v.kind, EqVerdict("Unknown", v.window))


# ---------------------------------------------------------------- pairing N x Z -> N

def zigzag(eta: int) -> int:
    return 2 * eta if eta >= 0 else -2 * eta - 1


def unzigzag(m: int) -> int:
    return m // 2 if m % 2 == 0 else -(m + 1) // 2


def pi_code(n: int, eta: int) -> int:
    a, b = n, zigzag(eta)
    return (a + b) * (a + b + 1) // 2 + b


def pi_decode(k: int) -> tuple[int, int]:
    w = (math.isqrt(8 * k + 1) - 1) // 2
    b = k - w * (w + 1) // 2
    return w - b, unzigzag(b)


# ---------------------------------------------------------------- real sequences

DECAYS = ("none", "harmonic", "geometric")


def _decay(kind: str, n: int) -> Fraction:
    if kind == "none":
        return Fraction(1)
    if kind == "harmonic":
        return Fraction(1, n + 1)
    return Fraction(1, 2 ** n)


@dataclass(frozen=True)
class Term:
    """coef * w(n) on the support, w given by the decay kind."""

    support: object  # SetDescriptor
    coef: Fraction
    decay: str = "none"

    def __post_init__(self):
        if self.decay not in DECAYS:
            raise ValueError(f"decay must be one of {DECAYS}")


@dataclass(frozen=True)
class RealSeq:
    """head[n] for n < len(head), else the sum of the terms at n.

    With no terms this is a finitely supported sequence with a zero tail.
    """

    head: tuple = ()
    terms: tuple = ()

    def value(self, n: int) -> Fraction:
        if n < len(self.head):
            return Fraction(self.head[n])
        return sum((t.coef * _decay(t.decay, n) for t in self.terms if t.support.contains(n)),
                   Fraction(0))

    def window(self, N: int) -> list:
        return [self.value(n) for n in range(N)]

    def to_json(self) -> dict:
        return {"kind": "realseq", "head": [str(Fraction(v)) for v in self.head],
                "terms": [{"support": D.set_to_json(t.support), "coef": str(t.coef),
                           "decay": t.decay} for t in self.terms]}


def finite_seq(values) -> RealSeq:
    return RealSeq(tuple(Fraction(v) for v in values))


def _joint_cells(x: RealSeq, y: RealSeq, decay: str):
    """Cells of the Boolean algebra generated by the supports of one decay kind.

    Yields (finite?, a, b) where a and b are the coefficient sums of x and y on
    the cell beyond both heads; finite? is None when undecided.
    """
    L = max(len(x.head), len(y.head))
    tail = D.cofinite(range(L))
    tx = [t for t in x.terms if t.decay == decay]
    ty = [t for t in y.terms if t.decay == decay]
    supports = []
    for t in tx + ty:
        if t.support not in supports:
            supports.append(t.support)
    for signs in itertools.product((True, False), repeat=len(supports)):
        cell = tail
        for s, on in zip(supports, signs):
            cell = D.combine("inter", cell, s if on else D.combine("complement", s))
        a = sum((t.coef for t in tx if signs[supports.index(t.support)]), Fraction(0))
        b = sum((t.coef for t in ty if signs[supports.index(t.support)]), Fraction(0))
        yield cell, a, b


def _cells_vanish(x: RealSeq, y: RealSeq, decay: str, small) -> Optional[bool]:
    """True iff every cell where the coefficients differ is small (a predicate)."""
    unknown = False
    for cell, a, b in _joint_cells(x, y, decay):
        if a == b:
            continue
        v = small(cell)
        if v is False:
            return False
        if v is None:
            unknown = True
    return None if unknown else True


def c0_real(x: RealSeq, y: RealSeq) -> EqVerdict:
    """x - y -> 0: decaying terms vanish, so only non-decaying cells matter."""
    return _from_bool(_cells_vanish(x, y, "none", D.is_finite))


def _harmonic_small(cell) -> Optional[bool]:
    v = membership(Summable(Harmonic()), cell)
    return {"In": True, "Out": False}.get(v.kind)


def lp_real(x: RealSeq, y: RealSeq, p=1) -> EqVerdict:
    """sum |x - y|^p < infinity; harmonic terms matter only when p = 1."""
    v = _cells_vanish(x, y, "none", D.is_finite)
    if v is False or p > 1:
        return _from_bool(v)
    h = _cells_vanish(x, y, "harmonic", _harmonic_small)
    if h is False:
        return INEQUIV
    return _from_bool(None if v is None or h is None else True)


def limsup_gap(x: RealSeq, y: RealSeq) -> Optional[Fraction]:
    """limsup |x(n) - y(n)|, the largest coefficient gap on an infinite cell."""
    best = Fraction(0)
    for cell, a, b in _joint_cells(x, y, "none"):
        if a == b:
            continue
        f = D.is_finite(cell)
        if f is None:
            return None
        if not f:
            best = max(best, abs(a - b))
    return best


def _infinite_limit_pairs(x: RealSeq, y: RealSeq) -> Optional[list]:
    out = []
    for cell, a, b in _joint_cells(x, y, "none"):
        f = D.is_finite(cell)
        if f is None:
            return None
        if not f:
            out.append((a, b))
    return out


# ---------------------------------------------------------------- the grid

@dataclass(frozen=True)
class GridSeq:
    """x(n) = the largest multiple of 2^-n not above base(n); base stays in [0, 1]."""

    base: RealSeq

    def __post_init__(self):
        if any(not 0 <= Fraction(v) <= 1 for v in self.base.head):
            raise ValueError("grid base values must lie in [0, 1]")
        if any(t.coef < 0 for t in self.base.terms) or sum(t.coef for t in self.base.terms) > 1:
            raise ValueError("grid base terms must be nonnegative with total at most 1")

    def count(self, n: int) -> int:
        """k(n) with x(n) = k(n) / 2^n."""
        v = self.base.value(n)
        return math.floor(v * 2 ** n)

    def value(self, n: int) -> Fraction:
        return Fraction(self.count(n), 2 ** n)

    def window(self, N: int) -> list:
        return [self.value(n) for n in range(N)]

    def to_json(self) -> dict:
        return {"kind": "grid", "base": self.base.to_json()}


def grid_from_values(values) -> GridSeq:
    """A finite grid point: values[n] must be a multiple of 2^-n; zero tail."""
    vals = [Fraction(v) for v in values]
    for n, v in enumerate(vals):
        if (v * 2 ** n).denominator != 1 or not 0 <= v <= 1:
            raise ValueError(f"x({n}) = {v} is not in {{0, ..., 2^n}}/2^n")
    return GridSeq(RealSeq(tuple(vals)))


def c0_grid(x: GridSeq, y: GridSeq) -> EqVerdict:
    # rounding moves each coordinate by less than 2^-n
    return c0_real(x.base, y.base)


def l1_grid(x: GridSeq, y: GridSeq) -> EqVerdict:
    # rounding errors are below 2^-n, a summable perturbation
    return lp_real(x.base, y.base, 1)


def _clip(v: Fraction) -> Fraction:
    return min(max(v, Fraction(0)), Fraction(1))


def round_below(v: Fraction, k: int) -> Fraction:
    """Largest multiple of 2^-k strictly below v, and 0 when v = 0."""
    if v <= 0:
        return Fraction(0)
    i = math.ceil(v * 2 ** k) - 1
    return Fraction(i, 2 ** k)


@dataclass(frozen=True)
class ClipGrid:
    """Image of a real sequence in the grid: clip to each unit window, then round."""

    source: RealSeq

    def clipped(self, k: int) -> Fraction:
        n, eta = pi_decode(k)
        return _clip(self.source.value(n) - eta)

    def value(self, k: int) -> Fraction:
        return round_below(self.clipped(k), k)

    def window(self, N: int) -> list:
        return [self.value(k) for k in range(N)]

    def to_json(self) -> dict:
        return {"kind": "clip_grid", "source": self.source.to_json(), "pairing": PAIRING}


def map_c0_grid(x: RealSeq) -> ClipGrid:
    return ClipGrid(x)


def c0_clipgrid(x: ClipGrid, y: ClipGrid) -> EqVerdict:
    """limsup over windows eta of |clip(a - eta) - clip(b - eta)| on infinite limit cells."""
    pairs = _infinite_limit_pairs(x.source, y.source)
    if pairs is None:
        return EqVerdict("Unknown")
    worst = Fraction(0)
    for a, b in pairs:
        lo, hi = math.floor(min(a, b)) - 1, math.ceil(max(a, b)) + 1
        for eta in range(lo, hi + 1):
            worst = max(worst, abs(_clip(a - eta) - _clip(b - eta)))
    return _from_bool(worst == 0)


# ---------------------------------------------------------------- co = d

@dataclass(frozen=True)
class BlockCodedSet:
    """2^n + j belongs iff j < k(n), where x(n) = k(n) / 2^n."""

    grid: GridSeq

    def contains(self, m: int) -> bool:
        if m < 1:
            return False
        n = m.bit_length() - 1
        return m - (1 << n) < self.grid.count(n)

    def elements_below(self, N: int) -> list:
        return [m for m in range(N) if self.contains(m)]

    def block(self, n: int) -> set:
        return {(1 << n) + j for j in range(self.grid.count(n))}

    def to_json(self) -> dict:
        return {"kind": "block_coded", "grid": self.grid.to_json()}


def map_grid_z0(x: GridSeq) -> BlockCodedSet:
    return BlockCodedSet(x)


def z0_blockcoded(x: BlockCodedSet, y: BlockCodedSet) -> EqVerdict:
    """Density zero iff the relative size of the difference in dyadic blocks tends to 0.

    That relative size in block n is |x(n) - y(n)|, whose limsup is the
    largest coefficient gap on an infinite cell of the bases.
    """
    g = limsup_gap(x.grid.base, y.grid.base)
    return _from_bool(None if g is None else g == 0)


def z_set(j: int) -> frozenset:
    """z_{2^n + m} = {i < n : bit i of m is 1}; every subset of [0, n) once per block."""
    if j < 1:
        raise ValueError("z_j is defined for j >= 1")
    n = j.bit_length() - 1
    m = j - (1 << n)
    return frozenset(i for i in range(n) if m >> i & 1)


@dataclass(frozen=True)
class CountSeq:
    """theta(x)(j) = #(x cap z_j) / n for 2^n <= j < 2^(n+1), with 0 at n = 0."""

    x: object  # SetDescriptor

    def value(self, j: int) -> Fraction:
        if j < 2:
            return Fraction(0)
        n = j.bit_length() - 1
        return Fraction(sum(1 for i in z_set(j) if self.x.contains(i)), n)

    def window(self, N: int) -> list:
        return [self.value(j) for j in range(N)]

    def to_json(self) -> dict:
        return {"kind": "count_seq", "set": D.set_to_json(self.x)}


def map_z0_c0(x) -> CountSeq:
    return CountSeq(x)


def upper_density(x) -> Fraction:
    # sparse parts have density zero, so the periodic shadow has the same density
    return D.periodic_shadow(x).density()


def c0_countseq(x: CountSeq, y: CountSeq) -> EqVerdict:
    """The block-n sup of |theta x - theta y| is max(#(x minus y), #(y minus x)) below n, over n."""
    a = upper_density(D.combine("diff", x.x, y.x))
    b = upper_density(D.combine("diff", y.x, x.x))
    return _from_bool(a == 0 and b == 0)


# ---------------------------------------------------------------- l1 = summable

def map_e2_l1(x) -> RealSeq:
    """theta(x)(n) = 1/(n+1) for n in x, else 0."""
    return RealSeq((), (Term(x, Fraction(1), "harmonic"),))


class HarmonicBlocks:
    """Disjoint finite sets s_{nk} with |sum_{j in s} 1/(j+1) - 2^-n| < 2^-(n+K).

    Blocks are built greedily in the order (0,0), (1,0), (1,1), (2,0), ...:
    take unused indices upward, adding j whenever 1/(j+1) fits the remainder.
    """

    def __init__(self, K: int = 10, budget: int = 10 ** 7):
        self.K = K
        self.budget = budget
        self.blocks: dict = {}
        self.used: set = set()
        self.pointer = 0
        self.errors: dict = {}

    def block(self, n: int, k: int) -> frozenset:
        if not 0 <= k < 2 ** n:
            raise ValueError("block index k must satisfy k < 2^n")
        while (n, k) not in self.blocks:
            self._next()
        return self.blocks[(n, k)]

    def _next(self):
        key = self._order_next()
        target = Fraction(1, 2 ** key[0])
        tol = Fraction(1, 2 ** (key[0] + self.K))
        rem, out, j = target, [], self.pointer
        while rem >= tol:
            if j > self.budget:
                raise RuntimeError("block budget exhausted")
            if j in self.used:
                j += 1
                continue
            w = Fraction(1, j + 1)
            if w <= rem:
                out.append(j)
                self.used.add(j)
                rem -= w
                j += 1
            else:
                # skip straight to the first index that fits
                j = max(j + 1, math.ceil(1 / rem) - 1)
        while self.pointer in self.used:
            self.pointer += 1
        self.blocks[key] = frozenset(out)
        self.errors[key] = rem

    def _order_next(self) -> tuple:
        if not self.blocks:
            return (0, 0)
        n, k = max(self.blocks, key=lambda t: (t[0], t[1]))
        return (n, k + 1) if k + 1 < 2 ** n else (n + 1, 0)


@dataclass
class HarmonicBlockSet:
    """Union of the blocks s_{nk} for k < 2^n x(n)."""

    grid: GridSeq
    blocks: HarmonicBlocks

    def members_through(self, n_max: int) -> set:
        out = set()
        for n in range(n_max + 1):
            for k in range(self.grid.count(n)):
                out |= self.blocks.block(n, k)
        return out

    def to_json(self) -> dict:
        return {"kind": "harmonic_blocks", "grid": self.grid.to_json(), "K": self.blocks.K}


def map_l1grid_e2(x: GridSeq, K: int = 10, blocks: Optional[HarmonicBlocks] = None) -> HarmonicBlockSet:
    return HarmonicBlockSet(x, blocks or HarmonicBlocks(K))


def e2_blockset(x: HarmonicBlockSet, y: HarmonicBlockSet) -> EqVerdict:
    """The weight of the difference is sum_n |k_x(n) - k_y(n)| 2^-n (1 +- 2^-K),
    finite iff sum_n |x(n) - y(n)| is."""
    if x.blocks.K != y.blocks.K:
        raise ValueError("both images must use the same block tolerance")
    return l1_grid(x.grid, y.grid)


# ---------------------------------------------------------------- E0, E1, E3

@dataclass(frozen=True)
class RowMatrix:
    """A subset of N x N given by finitely many rows: (k, r) belongs iff k in rows[r].

    Column k is the finite set {r : k in rows[r]}.
    """

    rows: tuple = ()  # sorted (r, descriptor) pairs

    def row(self, r: int):
        return dict(self.rows).get(r, D.EMPTY)

    def column(self, k: int) -> frozenset:
        return frozenset(r for r, s in self.rows if s.contains(k))

    def contains(self, point) -> bool:
        return point[1] in self.column(point[0])

    def to_json(self) -> dict:
        return {"kind": "row_matrix", "rows": {str(r): D.set_to_json(s) for r, s in self.rows}}


def map_e0_e1(x) -> RowMatrix:
    """f(x) = {<0, n> : n in x}: column n holds the single row 0 when n is in x."""
    return RowMatrix(((0, x),))


def map_e0_e1_column0(x) -> Matrix:
    """A deliberately wrong variant: x lands inside column 0."""
    return Matrix.of({0: x}, D.EMPTY)


def e1_rows(x: RowMatrix, y: RowMatrix) -> EqVerdict:
    """Columns of the difference are nonempty exactly on the union of the row differences."""
    rows = sorted(set(dict(x.rows)) | set(dict(y.rows)))
    unknown = False
    for r in rows:
        f = D.is_finite(D.combine("symdiff", x.row(r), y.row(r)))
        if f is False:
            return INEQUIV
        unknown |= f is None
    return _from_bool(None if unknown else True)


@dataclass(frozen=True)
class InterleavedSeq:
    """theta(x)(2^n(2k+1) - 1) = x_n(k) / (n+1)."""

    matrix: Matrix

    def value(self, j: int) -> Fraction:
        n, k = pair_decode(j)
        return Fraction(1, n + 1) if self.matrix.column(n).contains(k) else Fraction(0)

    def window(self, N: int) -> list:
        return [self.value(j) for j in range(N)]

    def to_json(self) -> dict:
        return {"kind": "interleaved", "matrix": self.matrix.to_json()}


def map_e3_c0(x: Matrix) -> InterleavedSeq:
    return InterleavedSeq(x)


def map_e3_t2(x: Matrix, depth: int, window: Optional[int] = None) -> dict:
    """Code of the countable set {m^(s.x_m)} on a truncation.

    Keys are pair_code(code(s), m) with code(s) the binary-tree index of s;
    values are (m, bits of s.x_m below the window). s ranges over words of
    length <= depth and m over columns < depth.
    """
    window = window or 2 * depth
    out = {}
    for m in range(depth):
        col = [1 if x.column(m).contains(i) else 0 for i in range(window)]
        for ell in range(depth + 1):
            for s in itertools.product((0, 1), repeat=ell):
                code_s = (1 << ell) - 1 + sum(b << (ell - 1 - i) for i, b in enumerate(s))
                word = tuple(c ^ (s[i] if i < ell else 0) for i, c in enumerate(col))
                out[pair_code(code_s, m)] = (m, word)
    return out


def _columns(x: Matrix, y: Matrix):
    keys = sorted(set(x.explicit_keys()) | set(y.explicit_keys()))
    return keys, [(x.column(k), y.column(k)) for k in keys]


def e1_matrix(x: Matrix, y: Matrix) -> EqVerdict:
    """Columns agree from some index on: the defaults must be equal."""
    return _from_bool(D.exactly_equal(x.default, y.default))


def e3_matrix(x: Matrix, y: Matrix) -> EqVerdict:
    """Every column pair differs finitely."""
    _, pairs = _columns(x, y)
    pairs.append((x.default, y.default))
    unknown = False
    for a, b in pairs:
        v = D.eventually_equal(a, b)
        if v is False:
            return INEQUIV
        unknown |= v is None
    return _from_bool(None if unknown else True)


def c0_interleaved(x: InterleavedSeq, y: InterleavedSeq) -> EqVerdict:
    """limsup |theta x - theta y| = max 1/(n+1) over columns n with infinite difference."""
    keys, pairs = _columns(x.matrix, y.matrix)
    first_default = next(n for n in itertools.count() if n not in keys)
    cols = list(zip(keys, pairs)) + [(first_default, (x.matrix.default, y.matrix.default))]
    limsup, unknown = Fraction(0), False
    for n, (a, b) in cols:
        f = D.is_finite(D.combine("symdiff", a, b))
        if f is None:
            unknown = True
        elif not f:
            limsup = max(limsup, Fraction(1, n + 1))
    if limsup > 0:
        return INEQUIV
    return _from_bool(None if unknown else True)


# ---------------------------------------------------------------- sets

def e0_set(x, y) -> EqVerdict:
    return _from_bool(D.is_finite(D.combine("symdiff", x, y)))


def e2_set(x, y) -> EqVerdict:
    return _from_ideal(membership(Summable(Harmonic()), D.combine("symdiff", x, y)))


def z0_set(x, y) -> EqVerdict:
    return _from_ideal(membership(Density0(), D.combine("symdiff", x, y)))


# ---------------------------------------------------------------- metric embeddings

def _check_metric(M: FiniteMetricSpace):
    if not M.exact:
        raise ValueError("embedding needs exact rational distances")


def oracle_embed(M: FiniteMetricSpace) -> list:
    """x -> (d(x, x_1), ..., d(x, x_n))."""
    _check_metric(M)
    return [tuple(Fraction(M.d[i][j]) for j in range(M.n)) for i in range(M.n)]


def pair_coordinate(M: FiniteMetricSpace, k: int, l: int) -> Optional[list]:
    """1-Lipschitz reals r with r_l - r_k = d(k, l), raised stepwise.

    Start with r = 0 and the raised set {l}. Each step adds the largest h that
    keeps |r_i - r_j| <= d_ij, then absorbs the index that became tight; it
    stops once k is tight. Returns None if more than n steps are needed.
    """
    n = M.n
    r = [Fraction(0)] * n
    raised = {l}
    for _ in range(n):
        best, tight = None, []
        for i in range(n):
            if i in raised:
                continue
            for j in raised:
                slack = Fraction(M.d[i][j]) - (r[j] - r[i])
                if best is None or slack < best:
                    best, tight = slack, [i]
                elif slack == best and i not in tight:
                    tight.append(i)
        for j in raised:
            r[j] += best
        if k in tight:
            return r
        raised.add(min(tight))
    return None


@dataclass
class Embedding:
    points: list  # tuple of Fractions per point
    dim: int
    method: str
    fallback: bool = False


def frechet_embed(M: FiniteMetricSpace, method: str = "stepwise") -> Embedding:
    """Isometric embedding into (R^dim, sup metric).

    stepwise: one coordinate per pair (k, l), dim n(n-1)/2, falling back to
    the distance-vector oracle when a pair needs more than n steps.
    oracle: the distance vector, dim n.
    """
    _check_metric(M)
    n = M.n
    if method == "oracle" or n <= 1:
        pts = oracle_embed(M) if n > 1 else [()] * n
        return Embedding(pts, n if n > 1 else 0, "oracle" if n > 1 else "trivial")
    if method != "stepwise":
        raise ValueError("method must be stepwise or oracle")
    coords = []
    for k, l in itertools.combinations(range(n), 2):
        r = pair_coordinate(M, k, l)
        if r is None:
            emb = oracle_embed(M)
            return Embedding(emb, n, "oracle", fallback=True)
        coords.append(r)
    pts = [tuple(c[i] for c in coords) for i in range(n)]
    return Embedding(pts, len(coords), "stepwise")


def sup_dist(u, v) -> Fraction:
    return max((abs(a - b) for a, b in zip(u, v)), default=Fraction(0))


def is_isometric(M: FiniteMetricSpace, E: Embedding) -> bool:
    return all(sup_dist(E.points[i], E.points[j]) == Fraction(M.d[i][j])
               for i in range(M.n) for j in range(M.n))


# ---------------------------------------------------------------- c0 families to D_max

@dataclass(frozen=True)
class FamilyPoint:
    """x_k for k = 1, 2, ...: point indices, spaces repeating with period len(spaces).

    head and period lengths are multiples of len(spaces), so position k-1
    always falls in space class (k-1) mod len(spaces).
    """

    spaces: tuple
    head: tuple
    period: tuple

    def __post_init__(self):
        m = len(self.spaces)
        if len(self.head) % m or len(self.period) % m or not self.period:
            raise ValueError("head and period lengths must be multiples of the space period")
        for pos, c in enumerate(self.head + self.period):
            if not 0 <= c < self.spaces[pos % m].n:
                raise ValueError("choice outside its space")

    def choice(self, k: int) -> int:
        i = k - 1
        if i < len(self.head):
            return self.head[i]
        return self.period[(i - len(self.head)) % len(self.period)]


def _aligned_tail(x, y, m: int):
    """Positions covering one common period of both tails."""
    start = max(len(x.head), len(y.head))
    per = math.lcm(len(x.period), len(y.period))
    return range(start + 1, start + per + 1)


def d_family(x: FamilyPoint, y: FamilyPoint) -> EqVerdict:
    """d_k(x_k, y_k) -> 0; the tails are periodic so the limsup is a max over a period."""
    if x.spaces != y.spaces:
        raise ValueError("points of different families")
    m = len(x.spaces)
    worst = max(x.spaces[(k - 1) % m].d[x.choice(k)][y.choice(k)] for k in _aligned_tail(x, y, m))
    return _from_bool(worst == 0)


@dataclass(frozen=True)
class BlockSeq:
    """Concatenated coordinate blocks, eventually periodic in the block index."""

    head: tuple  # tuple of blocks
    period: tuple

    def block(self, k: int) -> tuple:
        i = k - 1
        if i < len(self.head):
            return self.head[i]
        return self.period[(i - len(self.head)) % len(self.period)]

    def flat(self, nblocks: int) -> list:
        return [c for k in range(1, nblocks + 1) for c in self.block(k)]


def map_c0family_dmax(x: FamilyPoint, method: str = "stepwise") -> BlockSeq:
    """eta_1(x_1) ^ eta_2(x_2) ^ ... with eta_k an isometric sup-metric embedding of X_k."""
    embs = [frechet_embed(S, method) for S in x.spaces]
    m = len(x.spaces)
    head = tuple(embs[i % m].points[c] for i, c in enumerate(x.head))
    period = tuple(embs[(len(x.head) + i) % m].points[c] for i, c in enumerate(x.period))
    return BlockSeq(head, period)


def c0_blockseq(x: BlockSeq, y: BlockSeq) -> EqVerdict:
    """limsup of coordinate differences, a max over one common period of blocks."""
    start = max(len(x.head), len(y.head))
    per = math.lcm(len(x.period), len(y.period))
    worst = Fraction(0)
    for k in range(start + 1, start + per + 1):
        bx, by = x.block(k), y.block(k)
        if len(bx) != len(by):
            raise ValueError("block layouts differ")
        worst = max(worst, sup_dist(bx, by))
    return _from_bool(worst == 0)


# ---------------------------------------------------------------- T2 and tuples

def map_t2(x: tuple) -> frozenset:
    """r(x) = {x0, x0+x1+1, x0+x1+x2+2, ...}."""
    out, s = set(), 0
    for i, v in enumerate(x):
        s += v
        out.add(s + i)
    return frozenset(out)


def map_t2_noshift(x: tuple) -> frozenset:
    """A deliberately wrong variant: partial sums without the index shift."""
    return frozenset(itertools.accumulate(x)) if x else frozenset()


@dataclass(frozen=True)
class DupSeq:
    """x'(2^n(2k+1) - 1) = x(k mod len x): every value recurs infinitely often."""

    x: tuple

    def value(self, j: int) -> int:
        _, k = pair_decode(j)
        return self.x[k % len(self.x)]

    def multiplicities(self) -> dict:
        return {v: math.inf for v in set(self.x)}


def t2_normalize(x: tuple, mode: str = "dup"):
    """dup: the duplication map; count: x'(k) = (n_x(k), x(k)) with n_x the multiplicity."""
    if mode == "dup":
        if not x:
            raise ValueError("duplication needs a nonempty tuple")
        return DupSeq(tuple(x))
    if mode == "count":
        c = Counter(x)
        return tuple((c[v], v) for v in x)
    raise ValueError("mode must be dup or count")


def eq_tuple(x, y) -> EqVerdict:
    return _from_bool(tuple(x) == tuple(y))


def eq_set(x, y) -> EqVerdict:
    return _from_bool(frozenset(x) == frozenset(y))


def t2_tuple(x, y) -> EqVerdict:
    return _from_bool(set(x) == set(y))


def orbit_tuple(x, y) -> EqVerdict:
    """Permutation orbits of finite tuples: equal multisets."""
    return _from_bool(Counter(x) == Counter(y))


def orbit_dup(x: DupSeq, y: DupSeq) -> EqVerdict:
    return _from_bool(x.multiplicities() == y.multiplicities())


# ---------------------------------------------------------------- equivalence hull

def equivalence_hull(points, R) -> list:
    """Least equivalence containing R, as sorted classes, by union-find."""
    pts = list(points)
    parent = {p: p for p in pts}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for a, b in R:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    classes: dict = {}
    for p in pts:
        classes.setdefault(find(p), []).append(p)
    return sorted(sorted(c) for c in classes.values())


def hull_pairs(classes) -> set:
    return {(a, b) for c in classes for a in c for b in c}


# ---------------------------------------------------------------- Koch curves

def _koch_check(alpha: float, level: int):
    if not 0.5 < alpha < 1:
        raise ValueError("alpha must lie in (1/2, 1)")
    if not 0 <= level <= 10:
        raise ValueError("level must lie in [0, 10]")


def koch_generator(alpha: float) -> np.ndarray:
    """The five points of the level-1 polygon, as complex numbers."""
    r = 4.0 ** (-alpha)
    h = math.sqrt(r * r - ((1 - 2 * r) / 2) ** 2)
    return np.array([0, r, 0.5 + 1j * h, 1 - r, 1], dtype=complex)


def koch_curve(alpha: float, level: int) -> np.ndarray:
    """Vertices K(j / 4^level), j = 0..4^level, as an (m, 2) float array."""
    _koch_check(alpha, level)
    g = koch_generator(alpha)
    pts = np.array([0, 1], dtype=complex)
    for _ in range(level):
        P, Q = pts[:-1], pts[1:]
        seg = P[:, None] + (Q - P)[:, None] * g[None, :4]
        pts = np.append(seg.ravel(), pts[-1])
    return np.column_stack([pts.real, pts.imag])


def koch_point(curve: np.ndarray, t: float) -> np.ndarray:
    """K(t) by linear interpolation; exact at multiples of 4^-level."""
    m = len(curve) - 1
    s = t * m
    i = min(int(math.floor(s)), m - 1)
    f = s - i
    return curve[i] * (1 - f) + curve[i + 1] * f


def koch_ratio_bounds(alpha: float, level: int, grid: int = 10 ** 4, seed: int = 0) -> tuple:
    """Extremes of |K(y) - K(x)| / (y - x)^alpha over sampled vertex pairs.

    Gaps are drawn log-uniformly so every scale is represented.
    """
    curve = koch_curve(alpha, level)
    m = len(curve) - 1
    rng = np.random.default_rng(seed)
    gaps = np.unique(np.floor(np.exp(rng.uniform(0, math.log(m + 1), grid))).astype(np.int64))
    gaps = np.clip(gaps, 1, m)
    g = rng.choice(gaps, size=grid)
    i = (rng.random(grid) * (m - g + 1)).astype(np.int64)
    j = i + g
    d = np.linalg.norm(curve[j] - curve[i], axis=1)
    ratio = d / ((g / m) ** alpha)
    return float(ratio.min()), float(ratio.max())


def map_lp_lq(x, p: float, q: float, level: int = 8, curve: Optional[np.ndarray] = None) -> np.ndarray:
    """Interleave the two coordinates of K_alpha(x_i), alpha = p/q."""
    if not (1 <= p < q < 2 * p):
        raise ValueError("need 1 <= p < q < 2p")
    alpha = p / q
    curve = koch_curve(alpha, level) if curve is None else curve
    vals = [float(v) for v in x]
    if any(not 0 <= v <= 1 for v in vals):
        raise ValueError("coordinates must lie in [0, 1]")
    return np.array([koch_point(curve, v) for v in vals]).reshape(-1)


def lp_lq_sandwich(x, y, p: float, q: float, bounds: tuple, level: int = 8,
                   curve: Optional[np.ndarray] = None, rtol: float = 1e-9) -> dict:
    """m^q sum |dx|^p <= sum |dK|_2^q <= M^q sum |dx|^p, checked within rtol."""
    n = max(len(x), len(y))
    xs = list(x) + [0] * (n - len(x))
    ys = list(y) + [0] * (n - len(y))
    curve = koch_curve(p / q, level) if curve is None else curve
    ix = map_lp_lq(xs, p, q, level, curve).reshape(-1, 2)
    iy = map_lp_lq(ys, p, q, level, curve).reshape(-1, 2)
    mid = float(np.sum(np.linalg.norm(ix - iy, axis=1) ** q))
    base = float(sum(abs(float(a) - float(b)) ** p for a, b in zip(xs, ys)))
    lo, hi = bounds[0] ** q * base, bounds[1] ** q * base
    ok = lo * (1 - rtol) <= mid <= hi * (1 + rtol) + 1e-300
    return {"lower": lo, "value": mid, "upper": hi, "ok": bool(ok)}


# ---------------------------------------------------------------- samplers

def _rand_up(rng, max_prefix=4, max_period=4, density=0.5) -> UltimatelyPeriodic:
    pre = tuple(int(b) for b in rng.random(rng.integers(0, max_prefix + 1)) < density)
    per = tuple(int(b) for b in rng.random(rng.integers(1, max_period + 1)) < density)
    return UltimatelyPeriodic(pre, per).canonical()


def _rand_finite(rng, N=12, k=3) -> UltimatelyPeriodic:
    return D.finite_set(int(v) for v in rng.integers(0, N, rng.integers(0, k + 1)))


def _rand_sparse(rng):
    if rng.random() < 0.5:
        gen = D.GeometricGen(int(rng.integers(1, 4)), int(rng.integers(2, 4)), int(rng.integers(0, 3)))
    else:
        gen = D.PolynomialGen(int(rng.integers(1, 3)), int(rng.integers(2, 4)), int(rng.integers(0, 3)))
    mask = _rand_up(rng, 2, 3, 0.7)
    return D.sparse(gen, mask)


def _rand_set(rng):
    x = _rand_up(rng)
    if rng.random() < 0.4:
        x = D.combine("union", x, _rand_sparse(rng))
    return x


def _perturb(rng, x, kind):
    """Symmetric difference with a finite, sparse or infinite periodic set."""
    if kind == "finite":
        return D.combine("symdiff", x, _rand_finite(rng))
    if kind == "sparse":
        return D.combine("symdiff", x, D.combine("union", _rand_sparse(rng), _rand_finite(rng)))
    inf = _rand_up(rng, 2, 3, 0.5)
    while inf.is_finite():
        inf = _rand_up(rng, 2, 3, 0.5)
    return D.combine("symdiff", x, inf)


def sample_sets(rng, kinds=("finite", "sparse", "infinite")):
    x = _rand_set(rng)
    return x, _perturb(rng, x, kinds[int(rng.integers(0, len(kinds)))])


def sample_matrices(rng):
    keys = sorted({int(k) for k in rng.integers(0, 4, rng.integers(0, 3))})
    cols = {k: _rand_set(rng) for k in keys}
    default = _rand_up(rng, 2, 3)
    x = Matrix.of(cols, default)
    ycols = dict(cols)
    kind = rng.integers(0, 4)
    if kind == 0:  # finite changes everywhere: E3-equivalent
        for k in list(ycols) + [int(rng.integers(0, 5))]:
            ycols[k] = _perturb(rng, x.column(k), "finite")
        ydef = _perturb(rng, default, "finite")
    elif kind == 1:  # one column changes infinitely
        k = int(rng.integers(0, 5))
        ycols[k] = _perturb(rng, x.column(k), "infinite")
        ydef = default
    elif kind == 2:  # default column changes infinitely
        ydef = _perturb(rng, default, "infinite")
    else:
        ycols = {k: _rand_set(rng) for k in keys}
        ydef = _rand_up(rng, 2, 3)
    return x, Matrix.of(ycols, ydef)


def _rand_coef(rng, den=8, top=None) -> Fraction:
    top = top or den
    return Fraction(int(rng.integers(1, top + 1)), den)


def _rand_realseq(rng, budget=Fraction(1, 2), decays=("none", "none", "harmonic", "geometric")):
    head = tuple(Fraction(int(v), 8) for v in rng.integers(0, 9, rng.integers(0, 4)))
    terms = []
    left = budget
    for _ in range(int(rng.integers(0, 3))):
        c = min(_rand_coef(rng), left)
        if c <= 0:
            break
        left -= c
        support = _rand_up(rng, 2, 3) if rng.random() < 0.7 else _rand_sparse(rng)
        terms.append(Term(support, c, decays[int(rng.integers(0, len(decays)))]))
    return RealSeq(head, tuple(terms))


def sample_realseqs(rng):
    x = _rand_realseq(rng)
    kind = rng.integers(0, 4)
    head = tuple(Fraction(int(v), 8) for v in rng.integers(0, 9, rng.integers(0, 4)))
    if kind == 0:  # same tail, new head
        y = RealSeq(head, x.terms)
    elif kind == 1:  # add a decaying or sparse term
        s = _rand_up(rng, 2, 3) if rng.random() < 0.5 else _rand_sparse(rng)
        dec = ("harmonic", "geometric", "none")[int(rng.integers(0, 3))]
        y = RealSeq(head, x.terms + (Term(s, _rand_coef(rng, 8, 4), dec),))
    else:
        y = _rand_realseq(rng)
    return x, y


def sample_grids(rng):
    x, y = sample_realseqs(rng)
    clamp = lambda s: RealSeq(tuple(min(max(v, Fraction(0)), Fraction(1)) for v in s.head), s.terms)
    return GridSeq(clamp(x)), GridSeq(clamp(y))


def sample_family_points(rng, spaces=None):
    if spaces is None:
        spaces = (E0Family().space(1),) if rng.random() < 0.5 else _rand_space_table(rng)
    m = len(spaces)

    def choices(length):
        return tuple(int(rng.integers(0, spaces[i % m].n)) for i in range(length))

    head, per = choices(m * int(rng.integers(0, 3))), choices(m * int(rng.integers(1, 3)))
    x = FamilyPoint(spaces, head, per)
    if rng.random() < 0.5:
        y = FamilyPoint(spaces, choices(m * int(rng.integers(0, 3))), per)
    else:
        y = FamilyPoint(spaces, choices(len(head)), choices(m * int(rng.integers(1, 3))))
    return x, y


def random_metric_space(rng, n: int, den: int = 4, top: int = 8) -> FiniteMetricSpace:
    """Shortest-path closure of random positive rational weights."""
    d = [[Fraction(0) if i == j else None for j in range(n)] for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        d[i][j] = d[j][i] = Fraction(int(rng.integers(1, top + 1)), den)
    for k, i, j in itertools.product(range(n), repeat=3):
        if d[i][k] + d[k][j] < d[i][j]:
            d[i][j] = d[i][k] + d[k][j]
    return FiniteMetricSpace(tuple(tuple(r) for r in d))


def _rand_space_table(rng) -> tuple:
    return tuple(random_metric_space(rng, int(rng.integers(2, 5))) for _ in range(int(rng.integers(1, 3))))


def sample_tuples(rng, kind="any"):
    x = tuple(int(v) for v in rng.integers(0, 4, rng.integers(1, 5)))
    r = rng.random()
    if r < 0.3:
        y = tuple(rng.permutation(list(x)))
    elif r < 0.6:
        y = x + tuple(rng.choice(list(x), int(rng.integers(0, 3))))
        y = tuple(rng.permutation(list(y)))
    else:
        y = tuple(int(v) for v in rng.integers(0, 4, rng.integers(1, 5)))
    return tuple(int(v) for v in x), tuple(int(v) for v in y)


def sample_tuples_eq(rng):
    x = tuple(int(v) for v in rng.integers(0, 3, rng.integers(0, 4)))
    r = rng.random()
    if r < 0.4:
        return x, x
    if r < 0.55:
        return x, x + (0,) * int(rng.integers(1, 3))
    if r < 0.8 and x:
        y = list(x)
        y[int(rng.integers(0, len(y)))] += 1
        return x, tuple(y)
    return x, tuple(int(v) for v in rng.integers(0, 3, rng.integers(0, 4)))


def sample_tuples_nonempty(rng):
    x, y = sample_tuples(rng)
    return x or (0,), y or (0,)


# ---------------------------------------------------------------- the suite

@dataclass
class ReductionCase:
    name: str
    source: Callable
    target: Callable
    map: Callable
    sampler: Callable
    map_pair: Optional[Callable] = None  # for maps needing shared state

    def images(self, x, y):
        if self.map_pair is not None:
            return self.map_pair(x, y)
        return self.map(x), self.map(y)


def _shared_blocks(K=10):
    blocks = HarmonicBlocks(K)
    return lambda x, y: (map_l1grid_e2(x, K, blocks), map_l1grid_e2(y, K, blocks))


CASES = {
    "identity_e0": ReductionCase("identity_e0", e0_set, e0_set, lambda x: x, sample_sets),
    "e0_e1": ReductionCase("e0_e1", e0_set, e1_rows, map_e0_e1, sample_sets),
    "e0_e1_faulty": ReductionCase("e0_e1_faulty", e0_set, e1_matrix, map_e0_e1_column0, sample_sets),
    "e3_c0": ReductionCase("e3_c0", e3_matrix, c0_interleaved, map_e3_c0, sample_matrices),
    "c0_grid": ReductionCase("c0_grid", c0_real, c0_clipgrid, map_c0_grid, sample_realseqs),
    "grid_z0": ReductionCase("grid_z0", c0_grid, z0_blockcoded, map_grid_z0, sample_grids),
    "z0_c0": ReductionCase("z0_c0", z0_set, c0_countseq, map_z0_c0, sample_sets),
    "e2_l1": ReductionCase("e2_l1", e2_set, lp_real, map_e2_l1, sample_sets),
    "l1grid_e2": ReductionCase("l1grid_e2", l1_grid, e2_blockset, None, sample_grids,
                               map_pair=_shared_blocks()),
    "c0family_dmax": ReductionCase("c0family_dmax", d_family, c0_blockseq, map_c0family_dmax,
                                   sample_family_points),
    "t2_r": ReductionCase("t2_r", eq_tuple, eq_set, map_t2, sample_tuples_eq),
    "t2_r_faulty": ReductionCase("t2_r_faulty", eq_tuple, eq_set, map_t2_noshift, sample_tuples_eq),
    "t2_dup": ReductionCase("t2_dup", t2_tuple, orbit_dup, lambda x: t2_normalize(x, "dup"),
                            sample_tuples_nonempty),
    "t2_count": ReductionCase("t2_count", orbit_tuple, t2_tuple, lambda x: t2_normalize(x, "count"),
                              sample_tuples),
}

ACCEPTANCE_CASES = ("e0_e1", "e3_c0", "grid_z0", "z0_c0", "e2_l1", "l1grid_e2",
                    "c0family_dmax", "t2_r", "t2_dup", "t2_count")


def _describe(x):
    if isinstance(x, (tuple, frozenset)):
        return list(x)
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, (UltimatelyPeriodic, D.SparseGen, D.BooleanCombo)):
        return D.set_to_json(x)
    if isinstance(x, FamilyPoint):
        return {"head": list(x.head), "period": list(x.period)}
    try:
        return D.set_to_json(x)
    except TypeError:
        return repr(x)


def run_reduction_suite(case, n: int = 100, seed: int = 0, depth: int = 10) -> dict:
    """Sample n pairs, compare verdicts where both are definite."""
    if isinstance(case, str):
        case = CASES[case]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(sum(map(ord, case.name)),)))
    matrix: Counter = Counter()
    agreements = unknowns = 0
    counterexamples = []
    for _ in range(n):
        x, y = case.sampler(rng)
        sv = case.source(x, y)
        tx, ty = case.images(x, y)
        tv = case.target(tx, ty)
        matrix[(sv.kind, tv.kind)] += 1
        if not (sv.definite and tv.definite):
            unknowns += 1
        elif sv.kind == tv.kind:
            agreements += 1
        elif len(counterexamples) < 5:
            counterexamples.append({"x": _describe(x), "y": _describe(y),
                                    "source": sv.kind, "target": tv.kind})
        else:
            counterexamples.append({"source": sv.kind, "target": tv.kind})
    return {
        "case": case.name,
        "agreements": agreements,
        "unknowns": unknowns,
        "counterexamples": counterexamples,
        "matrix": {f"{a}/{b}": c for (a, b), c in sorted(matrix.items())},
        "config": {"n": n, "seed": seed, "depth": depth, "pairing": PAIRING},
    }
