"""Submeasures, weight sequences, a zoo of ideals on N and N x N, and membership verdicts.

Verdicts are decided in closed form from the descriptor shapes. When no
closed form applies the verdict is Unknown and carries a window estimate.
Sparse sets are handled by a shadow rule: once every sparse part of a
Boolean combination is known to lie in the ideal, the combination is in the
ideal exactly when its periodic shadow is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Optional, Union

import mpmath

from . import descriptors as D
from .descriptors import Matrix, SparseGen, UltimatelyPeriodic


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


# ---------------------------------------------------------------- weight sequences

# residue-class behaviour of a weight sequence, from the tail on
ZERO, GEOMETRIC, HARMONIC, ATOMIC, DYADIC = "zero", "geometric", "harmonic", "atomic", "dyadic"
DIVERGENT = (HARMONIC, ATOMIC, DYADIC)


@dataclass(frozen=True)
class Constant:
    c: Fraction = Fraction(1)

    def value(self, n: int) -> Fraction:
        return _frac(self.c)

    def period(self) -> int:
        return 1

    def kind(self, j: int, M: int) -> tuple:
        return (ATOMIC, _frac(self.c)) if self.c > 0 else (ZERO, Fraction(0))

    def to_json(self) -> dict:
        return {"family": "constant", "c": str(self.c)}


@dataclass(frozen=True)
class Harmonic:
    """c / (n + 1)."""

    c: Fraction = Fraction(1)

    def value(self, n: int) -> Fraction:
        return _frac(self.c) / (n + 1)

    def period(self) -> int:
        return 1

    def kind(self, j: int, M: int) -> tuple:
        return (HARMONIC, _frac(self.c)) if self.c > 0 else (ZERO, Fraction(0))

    def to_json(self) -> dict:
        return {"family": "harmonic", "c": str(self.c)}


@dataclass(frozen=True)
class Geometric:
    """c * rho**n with 0 <= rho < 1."""

    c: Fraction = Fraction(1)
    rho: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError("geometric weights need 0 <= rho < 1")

    def value(self, n: int) -> Fraction:
        return _frac(self.c) * _frac(self.rho) ** n

    def period(self) -> int:
        return 1

    def kind(self, j: int, M: int) -> tuple:
        return (GEOMETRIC, _frac(self.c)) if self.c > 0 else (ZERO, Fraction(0))

    def to_json(self) -> dict:
        return {"family": "geometric", "c": str(self.c), "rho": str(self.rho)}


@dataclass(frozen=True)
class DyadicValuation:
    """c * 2**-v where 2**v is the largest power of 2 dividing n + 1."""

    c: Fraction = Fraction(1)

    def value(self, n: int) -> Fraction:
        return _frac(self.c) / (1 << _v2(n + 1))

    def period(self) -> int:
        return 1

    def kind(self, j: int, M: int) -> tuple:
        if self.c == 0:
            return (ZERO, Fraction(0))
        e = _v2(M)
        if _v2(j + 1) < e or (j + 1) % (1 << e) != 0:
            # valuation of n + 1 is fixed on this residue class
            return (ATOMIC, _frac(self.c) / (1 << _v2(j + 1)))
        return (DYADIC, _frac(self.c))

    def to_json(self) -> dict:
        return {"family": "dyadic", "c": str(self.c)}


@dataclass(frozen=True)
class Periodic:
    """r_n = parts[n % len(parts)].value(n)."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("periodic weights need at least one part")

    def value(self, n: int) -> Fraction:
        return self.parts[n % len(self.parts)].value(n)

    def period(self) -> int:
        m = len(self.parts)
        for p in self.parts:
            m = _lcm(m, p.period())
        return m

    def kind(self, j: int, M: int) -> tuple:
        return self.parts[j % len(self.parts)].kind(j, M)

    def to_json(self) -> dict:
        return {"family": "periodic", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Table:
    """Explicit values on a prefix, then a tail from one of the other families."""

    prefix: tuple
    tail: object

    def value(self, n: int) -> Fraction:
        if n < len(self.prefix):
            return _frac(self.prefix[n])
        return self.tail.value(n)

    def period(self) -> int:
        return self.tail.period()

    def kind(self, j: int, M: int) -> tuple:
        return self.tail.kind(j, M)

    def to_json(self) -> dict:
        return {"family": "table", "prefix": [str(x) for x in self.prefix], "tail": self.tail.to_json()}


WeightSeq = Union[Constant, Harmonic, Geometric, DyadicValuation, Periodic, Table]


def weights_from_json(d: dict) -> WeightSeq:
    fam = d["family"]
    c = Fraction(d.get("c", 1))
    if fam == "constant":
        return Constant(c)
    if fam == "harmonic":
        return Harmonic(c)
    if fam == "geometric":
        return Geometric(c, Fraction(d.get("rho", "1/2")))
    if fam == "dyadic":
        return DyadicValuation(c)
    if fam == "periodic":
        return Periodic(tuple(weights_from_json(p) for p in d["parts"]))
    if fam == "table":
        return Table(tuple(Fraction(x) for x in d["prefix"]), weights_from_json(d["tail"]))
    raise ValueError(f"unknown weight family {fam!r}")


def prefix_len(r: WeightSeq) -> int:
    return len(r.prefix) if isinstance(r, Table) else 0


def class_kinds(r: WeightSeq, M: int) -> list:
    """Tail behaviour of r on each residue class mod M (M a multiple of the period)."""
    return [r.kind(j, M) for j in range(M)]


def _kind_period(r: WeightSeq) -> int:
    # dyadic valuations need an even modulus so that atomic classes separate
    m = r.period()
    return _lcm(m, 2) if _has_dyadic(r) else m


def _has_dyadic(r) -> bool:
    if isinstance(r, DyadicValuation):
        return r.c > 0
    if isinstance(r, Periodic):
        return any(_has_dyadic(p) for p in r.parts)
    if isinstance(r, Table):
        return _has_dyadic(r.tail)
    return False


def sum_diverges(r: WeightSeq) -> bool:
    return any(k in DIVERGENT for k, _ in class_kinds(r, _kind_period(r)))


def tends_to_zero(r: WeightSeq) -> bool:
    return all(k in (ZERO, GEOMETRIC, HARMONIC) for k, _ in class_kinds(r, _kind_period(r)))


def classify_summable(r: WeightSeq) -> str:
    """Atomic, Dense, Sliced, FinPlusDense or Unknown, read off the family tags."""
    kinds = {k for k, _ in class_kinds(r, _kind_period(r))}
    if not kinds & set(DIVERGENT):
        raise ValueError("weights are summable: not a summable ideal")
    if DYADIC in kinds:
        # the valuation classes make every level band infinite
        return "Sliced"
    if ATOMIC in kinds:
        return "FinPlusDense" if HARMONIC in kinds else "Atomic"
    return "Dense"


# ---------------------------------------------------------------- submeasures

def dyadic_block(n: int) -> range:
    """Block n is [2**n - 1, 2**(n+1) - 1); the blocks partition N."""
    return range((1 << n) - 1, (1 << (n + 1)) - 1)


def block_index(k: int) -> int:
    return (k + 1).bit_length() - 1


@dataclass(frozen=True)
class WeightedSum:
    r: object

    def eval(self, x) -> Fraction:
        return sum((self.r.value(n) for n in x), Fraction(0))

    def to_json(self) -> dict:
        return {"kind": "weighted_sum", "weights": self.r.to_json()}


@dataclass(frozen=True)
class MaxOfBlocks:
    """sup over dyadic blocks of a normalized measure of x within the block."""

    scale: str = "uniform"  # or "harmonic"

    def __post_init__(self):
        if self.scale not in ("uniform", "harmonic"):
            raise ValueError("scale must be uniform or harmonic")

    def block_measure(self, n: int, part) -> Fraction:
        B = dyadic_block(n)
        if self.scale == "uniform":
            return Fraction(len(part), len(B))
        total = sum(Fraction(1, k + 1) for k in B)
        return sum((Fraction(1, k + 1) for k in part), Fraction(0)) / total

    def eval(self, x) -> Fraction:
        by_block: dict = {}
        for k in x:
            by_block.setdefault(block_index(k), []).append(k)
        return max((self.block_measure(n, p) for n, p in by_block.items()), default=Fraction(0))

    def to_json(self) -> dict:
        return {"kind": "max_of_blocks", "scale": self.scale}


@dataclass(frozen=True)
class Indicator:
    """phi(x) = 1 for nonempty x."""

    def eval(self, x) -> Fraction:
        return Fraction(1 if len(list(x)) else 0)

    def to_json(self) -> dict:
        return {"kind": "indicator"}


Submeasure = Union[WeightedSum, MaxOfBlocks, Indicator]


def submeasure_eval(phi: Submeasure, x) -> Fraction:
    return phi.eval(set(x))


def submeasure_from_json(d: dict) -> Submeasure:
    if d["kind"] == "weighted_sum":
        return WeightedSum(weights_from_json(d["weights"]))
    if d["kind"] == "max_of_blocks":
        return MaxOfBlocks(d.get("scale", "uniform"))
    if d["kind"] == "indicator":
        return Indicator()
    raise ValueError(f"unknown submeasure {d['kind']!r}")


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Verdict:
    kind: str  # In, Out, Unknown
    window: Optional[int] = None
    estimate: Optional[Fraction] = None

    def to_json(self) -> dict:
        d = {"verdict": self.kind}
        if self.window is not None:
            d["window"] = self.window
        if self.estimate is not None:
            d["estimate"] = str(self.estimate)
        return d

    def __bool__(self):
        raise TypeError("compare verdict.kind instead of truth-testing a verdict")


IN, OUT = Verdict("In"), Verdict("Out")
UNKNOWN = Verdict("Unknown")


def _both(a: Verdict, b: Verdict, rule) -> Verdict:
    return rule(a.kind, b.kind)


# ---------------------------------------------------------------- ideals on N

@dataclass(frozen=True)
class Fin:
    def to_json(self):
        return {"kind": "fin"}


@dataclass(frozen=True)
class Zero:
    """The least ideal, whose only member is the empty set."""

    def to_json(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class Summable:
    r: object = Harmonic()

    def __post_init__(self):
        if not sum_diverges(self.r):
            raise ValueError("weights are summable: the ideal would be all of P(N)")

    def to_json(self):
        return {"kind": "summable", "weights": self.r.to_json()}


@dataclass(frozen=True)
class Density0:
    def to_json(self):
        return {"kind": "density0"}


@dataclass(frozen=True)
class ErdosUlam:
    r: object = Harmonic()

    def __post_init__(self):
        if not sum_diverges(self.r) or not tends_to_zero(self.r):
            raise ValueError("Erdos-Ulam ideals need divergent weights tending to zero")

    def to_json(self):
        return {"kind": "erdos_ulam", "weights": self.r.to_json()}


@dataclass(frozen=True)
class DensityIdeal:
    """Sets whose normalized measure within the n-th dyadic block tends to 0."""

    scale: str = "uniform"

    def to_json(self):
        return {"kind": "density_ideal", "scale": self.scale}


@dataclass(frozen=True)
class Exh:
    phi: object

    def to_json(self):
        return {"kind": "exh", "submeasure": self.phi.to_json()}


@dataclass(frozen=True)
class Restrict:
    """x is in the ideal iff x meets B in a member of I."""

    I: object
    B: object

    def to_json(self):
        return {"kind": "restrict", "ideal": self.I.to_json(), "set": self.B.to_json()}


@dataclass(frozen=True)
class TrivialVariation:
    """I living on the even numbers with the odd numbers free: I restricted to the evens."""

    I: object

    def to_json(self):
        return {"kind": "trivial_variation", "ideal": self.I.to_json()}


# ---------------------------------------------------------------- ideals on products

@dataclass(frozen=True)
class FinTimes0:
    """Sets x of N x N with only finitely many nonempty columns."""

    def to_json(self):
        return {"kind": "fin_times_0"}


@dataclass(frozen=True)
class ZeroTimesFin:
    """Sets x of N x N all of whose columns are finite."""

    def to_json(self):
        return {"kind": "zero_times_fin"}


@dataclass(frozen=True)
class FubiniSum:
    """x is in the ideal iff {a : column a of x is not in J_a} is in I.

    The family is given by finitely many explicit ideals plus either a
    default ideal or a callable a -> J_a.
    """

    I: object
    explicit: tuple = ()  # (a, J_a) pairs
    default: object = None
    rule: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    def family(self, a: int):
        for k, J in self.explicit:
            if k == a:
                return J
        if self.rule is not None:
            return self.rule(a)
        return self.default

    def to_json(self):
        d = {"kind": "fubini_sum", "index_ideal": self.I.to_json(),
             "explicit": {str(a): J.to_json() for a, J in self.explicit}}
        if self.default is not None:
            d["default"] = self.default.to_json()
        if self.label:
            d["family"] = self.label
        return d


@dataclass(frozen=True)
class FubiniProduct:
    I: object
    J: object

    def as_sum(self) -> FubiniSum:
        return FubiniSum(self.I, (), self.J)

    def to_json(self):
        return {"kind": "fubini_product", "index_ideal": self.I.to_json(), "ideal": self.J.to_json()}


@dataclass(frozen=True)
class DisjointSum:
    """Sum of finitely many ideals: column a of x must lie in the a-th summand."""

    summands: tuple

    def to_json(self):
        return {"kind": "disjoint_sum", "summands": [J.to_json() for J in self.summands]}


@dataclass(frozen=True)
class Frechet:
    """Iterated Fubini powers of Fin, for xi = n (n >= 1) or omega + n."""

    finite: int = 1
    omega: bool = False

    def __post_init__(self):
        if self.finite < (0 if self.omega else 1):
            raise ValueError("Frechet ideals start at index 1")

    def unfold(self):
        if not self.omega and self.finite == 1:
            return Fin()
        if self.finite > 0:
            return FubiniProduct(Fin(), Frechet(self.finite - 1, self.omega))
        # limit step: Fubini sum over Fin with cofinal sequence 1, 2, 3, ...
        return FubiniSum(Fin(), rule=lambda a: Frechet(a + 1), label="frechet_cofinal")

    def to_json(self):
        return {"kind": "frechet", "xi": ("omega+%d" % self.finite) if self.omega else self.finite}


IdealDescriptor = Union[Fin, Zero, Summable, Density0, ErdosUlam, DensityIdeal, Exh, Restrict,
                        TrivialVariation, FinTimes0, ZeroTimesFin, FubiniSum, FubiniProduct,
                        DisjointSum, Frechet]

PRODUCT_IDEALS = (FinTimes0, ZeroTimesFin, FubiniSum, FubiniProduct, DisjointSum)


def frechet(xi) -> Frechet:
    """xi is an int n >= 1, or the string 'omega' / 'omega+n'."""
    if isinstance(xi, int):
        return Frechet(xi)
    s = str(xi).replace(" ", "")
    if s.isdigit():
        return Frechet(int(s))
    if s == "omega" or s == "w":
        return Frechet(0, True)
    for head in ("omega+", "w+"):
        if s.startswith(head) and s[len(head):].isdigit():
            return Frechet(int(s[len(head):]), True)
    raise ValueError(f"unsupported ordinal {xi!r}: only xi < omega*2")


def disjoint_sum(*summands) -> DisjointSum:
    return DisjointSum(tuple(summands))


def fubini_sum(I, family: dict, default=None) -> FubiniSum:
    return FubiniSum(I, tuple(sorted(family.items())), default)


def fubini_product(I, J) -> FubiniProduct:
    return FubiniProduct(I, J)


def restrict(I, B) -> Restrict:
    return Restrict(I, B)


def trivial_variation(I) -> TrivialVariation:
    return TrivialVariation(I)


def is_product_ideal(I) -> bool:
    if isinstance(I, Frechet):
        return isinstance(I.unfold(), PRODUCT_IDEALS)
    return isinstance(I, PRODUCT_IDEALS)


# ---------------------------------------------------------------- membership on N

def _up_classes(U: UltimatelyPeriodic, r) -> tuple[int, int, list]:
    """Offset, modulus and per-class kinds of r on the classes hit by U."""
    M = _lcm(len(U.period), _kind_period(r))
    L = max(len(U.prefix), prefix_len(r))
    hit = [U.contains(L + j) for j in range(M)]
    kinds = [r.kind((L + j) % M, M) for j in range(M)]
    return L, M, [k for h, k in zip(hit, kinds) if h]


def _atom_up(I, U: UltimatelyPeriodic) -> Verdict:
    U = U.canonical()
    if isinstance(I, Zero):
        return IN if U.is_empty() else OUT
    if U.is_finite():
        return IN
    if isinstance(I, (Fin, Density0, DensityIdeal)):
        return OUT  # infinite periodic sets have positive density
    if isinstance(I, Summable):
        _, _, kinds = _up_classes(U, I.r)
        return OUT if any(k in DIVERGENT for k, _ in kinds) else IN
    if isinstance(I, ErdosUlam):
        _, _, kinds = _up_classes(U, I.r)
        return OUT if any(k == HARMONIC and c > 0 for k, c in kinds) else IN
    raise TypeError(f"no periodic rule for {I!r}")


def _atom_sparse(I, S: SparseGen) -> Verdict:
    if isinstance(I, (Fin, Zero)):
        return OUT  # canonical sparse sets are infinite
    if isinstance(I, (Density0, DensityIdeal, ErdosUlam)):
        return IN  # reciprocals of the generator are summable, so densities vanish
    if isinstance(I, Summable):
        r = I.r
        if _has_dyadic(r):
            return UNKNOWN
        M = _kind_period(r)
        L = prefix_len(r)
        # sparse terms on atomic classes diverge; the rest are below c/(n+1)
        atomic = UltimatelyPeriodic((0,) * L, tuple(int(r.kind((L + j) % M, M)[0] == ATOMIC) for j in range(M)))
        idx = D.up_combine(D.sparse_index_mask(S, atomic), S.mask, lambda a, b: a and b)
        return IN if idx.is_finite() else OUT
    raise TypeError(f"no sparse rule for {I!r}")


def _window_estimate(I, X, depth: int) -> Verdict:
    N = 1 << depth
    elems = X.elements_below(N)
    est = None
    if isinstance(I, Summable):
        est = sum((I.r.value(n) for n in elems), Fraction(0))
    elif isinstance(I, (Density0, DensityIdeal, Fin, Zero)):
        est = Fraction(sum(1 for n in elems if n >= N // 2 - 1), N // 2) if N > 1 else Fraction(len(elems))
    elif isinstance(I, ErdosUlam):
        tot = sum((I.r.value(n) for n in range(N)), Fraction(0))
        est = sum((I.r.value(n) for n in elems), Fraction(0)) / tot if tot else None
    return Verdict("Unknown", depth, est)


def _base_ideal(I):
    if isinstance(I, Frechet):
        return I.unfold()
    if isinstance(I, Exh):
        phi = I.phi
        if isinstance(phi, WeightedSum):
            return Summable(phi.r)
        if isinstance(phi, MaxOfBlocks):
            return DensityIdeal(phi.scale)
        return Fin()
    return I


def _member_set(I, X, depth: int) -> Verdict:
    I = _base_ideal(I)
    if isinstance(I, (Restrict, TrivialVariation)):
        B = I.B if isinstance(I, Restrict) else D.EVENS
        return _member_set(I.I, D.combine("inter", X, B), depth)
    X = D.normalize(X)
    if isinstance(X, UltimatelyPeriodic):
        return _atom_up(I, X)
    if isinstance(X, SparseGen):
        v = _atom_sparse(I, X)
        return _window_estimate(I, X, depth) if v.kind == "Unknown" else v
    if isinstance(I, Fin):
        f = D.is_finite(X)
        if f is not None:
            return IN if f else OUT
    if isinstance(I, Zero):
        e = D.is_empty(X)
        if e is not None:
            return IN if e else OUT
    split = D.generator_split(X)
    if split is not None:
        v = _member_split(I, *split)
        if v.kind != "Unknown":
            return v
    parts = D.sparse_parts(X)
    if all(_atom_sparse(I, p).kind == "In" for p in parts):
        return _atom_up(I, D.periodic_shadow(X))
    v = _combo_rules(I, X, depth)
    return _window_estimate(I, X, depth) if v.kind == "Unknown" else v


def _member_split(I, gen, m, s) -> Verdict:
    """X = gen[m] union (s minus range(gen)); both pieces must lie in I."""
    if isinstance(I, Zero):
        empty = m.is_empty() and s.is_finite() and not D.off_range_finite(gen, s)
        return IN if empty else OUT
    # removing the density-zero, summable range of gen from a periodic set
    # changes neither finiteness nor divergence of any of the zoo's measures
    a = _atom_up(I, s)
    b = _atom_sparse(I, D.sparse(gen, m)) if gen is not None and not m.is_finite() else IN
    if a.kind == "Out" or b.kind == "Out":
        return OUT
    if a.kind == "In" and b.kind == "In":
        return IN
    return UNKNOWN


def _combo_rules(I, X, depth) -> Verdict:
    args = [_member_set(I, a, depth).kind for a in X.args]
    op = X.op
    if op == "complement":
        return OUT if args[0] == "In" else UNKNOWN
    a, b = args
    if op == "union":
        if a == "In" and b == "In":
            return IN
        if "Out" in (a, b):
            return OUT
    elif op == "inter":
        if "In" in (a, b):
            return IN
    elif op == "diff":
        if a == "In":
            return IN
        if a == "Out" and b == "In":
            return OUT
    elif op == "symdiff":
        if a == "In" and b != "Unknown":
            return Verdict(b)
        if b == "In" and a != "Unknown":
            return Verdict(a)
    return UNKNOWN


# ---------------------------------------------------------------- membership on products

def _is_everything(x) -> bool:
    return isinstance(x, UltimatelyPeriodic) and x.canonical() == D.EVERYTHING


def _is_nothing(x) -> bool:
    return isinstance(x, UltimatelyPeriodic) and x.canonical() == D.EMPTY


def _bad_set(explicit_bad: dict, default_bad: str):
    """The index set {a : column not in J_a} from explicit verdicts and the default verdict.

    Returns (smallest, largest) candidate sets when some explicit verdicts are Unknown.
    """
    keys = sorted(explicit_bad)
    lo = {k for k in keys if explicit_bad[k] == "Out"}
    hi = {k for k in keys if explicit_bad[k] != "In"}
    if default_bad == "In":
        return D.finite_set(lo), D.finite_set(hi)
    good_lo = set(keys) - lo
    good_hi = set(keys) - hi
    return D.cofinite(good_lo), D.cofinite(good_hi)


def _member_fubini(F: FubiniSum, x, depth: int) -> Verdict:
    if _is_nothing(x):
        return IN
    if _is_everything(x):
        x = Matrix((), D.EVERYTHING)
    if not isinstance(x, Matrix):
        raise ValueError("a product ideal needs a matrix descriptor")
    keys = x.explicit_keys()
    explicit_bad = {k: membership(F.family(k), x.column(k), depth).kind for k in keys}
    if F.rule is not None and F.default is None:
        # a varying family: only the empty and full defaults are settled
        if _is_nothing(x.default):
            default_kind = "In"
        elif _is_everything(x.default):
            default_kind = "Out"
        else:
            return Verdict("Unknown", depth)
    else:
        default_kind = membership(F.default, x.default, depth).kind
    if default_kind == "Unknown":
        return Verdict("Unknown", depth)
    lo, hi = _bad_set(explicit_bad, default_kind)
    v_lo, v_hi = membership(F.I, lo, depth), membership(F.I, hi, depth)
    if v_lo.kind == v_hi.kind:
        return v_lo
    return Verdict("Unknown", depth)


def _member_product(I, x, depth: int) -> Verdict:
    if isinstance(I, Frechet):
        return membership(I.unfold(), x, depth)
    if isinstance(I, FubiniProduct):
        return _member_fubini(I.as_sum(), x, depth)
    if isinstance(I, FubiniSum):
        return _member_fubini(I, x, depth)
    if _is_nothing(x):
        return IN
    if _is_everything(x):
        return OUT
    if not isinstance(x, Matrix):
        raise ValueError("a product ideal needs a matrix descriptor")
    if isinstance(I, FinTimes0):
        # finitely many explicit columns cannot matter; the default column decides
        e = D.is_empty(x.default)
        return Verdict("Unknown", depth) if e is None else (IN if e else OUT)
    if isinstance(I, ZeroTimesFin):
        kinds = [D.is_finite(c) for c in [x.default] + [c for _, c in x.columns]]
        if False in kinds:
            return OUT
        return IN if all(kinds) else Verdict("Unknown", depth)
    if isinstance(I, DisjointSum):
        m = len(I.summands)
        if any(k >= m and not _is_nothing(c) for k, c in x.columns) or not _is_nothing(x.default):
            raise ValueError("set has points outside the support of the disjoint sum")
        kinds = [membership(J, x.column(a), depth).kind for a, J in enumerate(I.summands)]
        if "Out" in kinds:
            return OUT
        return IN if all(k == "In" for k in kinds) else Verdict("Unknown", depth)
    raise TypeError(f"unknown product ideal {I!r}")


def membership(I, X, depth: int = 10) -> Verdict:
    """Decide X in I when a closed form applies; else Unknown with a window estimate."""
    if is_product_ideal(I):
        return _member_product(I, X, depth)
    if isinstance(X, Matrix):
        raise ValueError("a matrix descriptor needs a product ideal")
    return _member_set(I, X, depth)


def ideal_from_json(d: dict):
    k = d["kind"]
    simple = {"fin": Fin, "zero": Zero, "density0": Density0, "fin_times_0": FinTimes0,
              "zero_times_fin": ZeroTimesFin}
    if k in simple:
        return simple[k]()
    if k == "summable":
        return Summable(weights_from_json(d.get("weights", {"family": "harmonic"})))
    if k == "erdos_ulam":
        return ErdosUlam(weights_from_json(d.get("weights", {"family": "harmonic"})))
    if k == "density_ideal":
        return DensityIdeal(d.get("scale", "uniform"))
    if k == "exh":
        return Exh(submeasure_from_json(d["submeasure"]))
    if k == "restrict":
        return Restrict(ideal_from_json(d["ideal"]), D.set_from_json(d["set"]))
    if k == "trivial_variation":
        return TrivialVariation(ideal_from_json(d["ideal"]))
    if k == "frechet":
        return frechet(d["xi"])
    if k == "fubini_product":
        return FubiniProduct(ideal_from_json(d["index_ideal"]), ideal_from_json(d["ideal"]))
    if k == "fubini_sum":
        fam = {int(a): ideal_from_json(J) for a, J in d.get("explicit", {}).items()}
        default = ideal_from_json(d["default"]) if "default" in d else None
        return fubini_sum(ideal_from_json(d["index_ideal"]), fam, default)
    if k == "disjoint_sum":
        return DisjointSum(tuple(ideal_from_json(J) for J in d["summands"]))
    raise ValueError(f"unknown ideal kind {k!r}")


# ---------------------------------------------------------------- Rudin-Blass witnesses

@dataclass(frozen=True)
class Block:
    """A finite set of indices: consecutive runs [a, b) plus single indices."""

    runs: tuple = ()
    singles: tuple = ()

    def min(self) -> int:
        return min([a for a, _ in self.runs] + list(self.singles))

    def max(self) -> int:
        return max([b - 1 for _, b in self.runs] + list(self.singles))

    def size(self) -> int:
        return sum(b - a for a, b in self.runs) + len(self.singles)

    def indices(self, limit: int = 10_000):
        if self.size() > limit:
            raise ValueError("block too large to list")
        out = []
        for a, b in self.runs:
            out.extend(range(a, b))
        return sorted(out + list(self.singles))

    def to_json(self) -> dict:
        return {"runs": [[a, b] for a, b in self.runs], "singles": list(self.singles)}


@dataclass
class BlockWitness:
    blocks: list
    source: list  # the target values p_i as Fractions
    errors: list  # certified upper bounds on |p_i - block sum|, as Fractions
    family: object = None  # the source weight sequence when given symbolically

    def to_json(self) -> dict:
        return {"blocks": [b.to_json() for b in self.blocks], "source": [str(p) for p in self.source],
                "error_bounds": [str(e) for e in self.errors]}


_IV_PREC = 256
_EXACT_RUN = 2000


def _mpf_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * Fraction(2) ** exp


def _harmonic_run_interval(a: int, b: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of sum_{j=a}^{b-1} 1/(j+1) = H_b - H_a."""
    if b <= a:
        return Fraction(0), Fraction(0)
    if b - a <= _EXACT_RUN and b <= 50_000:
        s = sum((Fraction(1, j + 1) for j in range(a, b)), Fraction(0))
        return s, s
    if a < 64:
        lo0, hi0 = _harmonic_run_interval(a, 64)
        lo1, hi1 = _harmonic_run_interval(64, b)
        return lo0 + lo1, hi0 + hi1
    # H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + e_n with 0 < e_n < 1/(120 n^4)
    old = mpmath.iv.prec
    mpmath.iv.prec = _IV_PREC
    try:
        lg = mpmath.iv.log(mpmath.iv.mpf(b) / mpmath.iv.mpf(a))
        lg_lo, lg_hi = _mpf_fraction(lg.a), _mpf_fraction(lg.b)
    finally:
        mpmath.iv.prec = old
    corr = Fraction(1, 2 * b) - Fraction(1, 2 * a) - Fraction(1, 12 * b * b) + Fraction(1, 12 * a * a)
    return lg_lo + corr - Fraction(1, 120 * a ** 4), lg_hi + corr + Fraction(1, 120 * b ** 4)


def _run_interval(r, a: int, b: int) -> tuple[Fraction, Fraction]:
    if isinstance(r, Harmonic):
        lo, hi = _harmonic_run_interval(a, b)
        return r.c * lo, r.c * hi
    if b - a > 200_000:
        raise ValueError("accuracy unreachable under declared caps")
    s = sum((r.value(j) for j in range(a, b)), Fraction(0))
    return s, s


def _longest_run(r, a: int, target: Fraction) -> int:
    """Largest b >= a whose run sum is certainly <= target."""
    def fits(b):
        return _run_interval(r, a, b)[1] <= target

    lo, hi = a, a + 1
    while fits(hi):
        lo, hi = hi, a + 2 * (hi - a)
        if hi - a > 1 << 62:
            raise ValueError("accuracy unreachable under declared caps")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _first_at_most(r, start: int, bound: Fraction, strict: bool = False) -> int:
    """Smallest j >= start with r_j <= bound (< bound when strict)."""
    if isinstance(r, Harmonic):
        # c/(j+1) <= bound  iff  j+1 >= c/bound
        q = r.c / bound
        j = max(start, -(-q.numerator // q.denominator) - 1)
        while (r.value(j) >= bound) if strict else (r.value(j) > bound):
            j += 1
        return j
    j = start
    while (r.value(j) >= bound) if strict else (r.value(j) > bound):
        j += 1
        if j - start > 1_000_000:
            raise ValueError("accuracy unreachable under declared caps")
    return j


def rb_witness_summable(p, r, imax: int, p_cap: Fraction = Fraction(2)) -> BlockWitness:
    """Consecutive blocks w_i with |p_i - sum_{j in w_i} r_j| < 2**-i for i <= imax.

    Greedy left to right: the longest run that does not overshoot p_i, then
    single indices that still fit, until the remainder drops below 2**-i.
    """
    if not sum_diverges(r) or not tends_to_zero(r):
        raise ValueError("target weights must tend to zero with divergent sum")
    ps = [_frac(p.value(i) if hasattr(p, "value") else p[i]) for i in range(imax + 1)]
    if any(x < 0 or x > p_cap for x in ps):
        raise ValueError("source weights outside [0, cap]")
    blocks, errors = [], []
    nxt = 0
    for i, target in enumerate(ps):
        eps = Fraction(1, 1 << i)
        if target == 0:
            j = _first_at_most(r, nxt, eps, strict=True)
            blocks.append(Block((), (j,)))
            errors.append(r.value(j))
            nxt = j + 1
            continue
        b = _longest_run(r, nxt, target)
        lo, hi = _run_interval(r, nxt, b)
        d_lo, d_hi = target - hi, target - lo  # remainder enclosure, d_lo >= 0
        singles = []
        j = b
        while d_hi >= eps:
            j = _first_at_most(r, j + (1 if singles or b > nxt else 0), d_lo)
            v = r.value(j)
            singles.append(j)
            d_lo, d_hi = d_lo - v, d_hi - v
        runs = ((nxt, b),) if b > nxt else ()
        if not runs and not singles:
            j = _first_at_most(r, nxt, eps, strict=True)
            singles.append(j)
            d_hi = max(d_hi, r.value(j) - d_lo)
        blk = Block(runs, tuple(singles))
        blocks.append(blk)
        errors.append(max(d_hi, Fraction(0)) if d_lo >= 0 else max(d_hi, -d_lo))
        nxt = blk.max() + 1
    return BlockWitness(blocks, ps, errors, p if hasattr(p, "value") else None)


def _recheck_block_sum(r, blk: Block):
    """Independent evaluation of a block sum: exact for small runs, digamma at high precision otherwise."""
    total = Fraction(0)
    approx = mpmath.mpf(0)
    exact = True
    with mpmath.workdps(60):
        for a, b in blk.runs:
            if b - a <= _EXACT_RUN and b <= 50_000:
                total += sum((r.value(j) for j in range(a, b)), Fraction(0))
            elif isinstance(r, Harmonic):
                exact = False
                approx += mpmath.mpf(r.c.numerator) / r.c.denominator * (mpmath.harmonic(b) - mpmath.harmonic(a))
            else:
                total += sum((r.value(j) for j in range(a, b)), Fraction(0))
        for j in blk.singles:
            total += r.value(j)
    return total, (None if exact else approx)


@dataclass
class WitnessReport:
    ordered: bool
    bound_failures: list
    agreement: dict  # (source verdict, target verdict) -> count
    disagreements: list
    checked: int

    @property
    def ok(self) -> bool:
        return self.ordered and not self.bound_failures and not self.disagreements

    def to_json(self) -> dict:
        return {"ok": self.ok, "ordered": self.ordered, "bound_failures": self.bound_failures,
                "agreement": {f"{a}/{b}": n for (a, b), n in self.agreement.items()},
                "disagreements": self.disagreements, "checked": self.checked}


def check_rb_witness(W: BlockWitness, r, I=None, J=None, samples=()) -> WitnessReport:
    """Recompute ordering and error bounds; compare verdicts of A and of w_A on samples.

    w_A is the union of the blocks w_i, i in A. Its sum against r differs from
    the p-sum of A by at most sum 2**-i, so w_A is in the target summable
    ideal iff A is in the source one; the sample check evaluates both sides
    through the blocks' recomputed sums.
    """
    blocks = W.blocks
    ordered = all(b.size() > 0 for b in blocks) and all(
        blocks[i].max() < blocks[i + 1].min() for i in range(len(blocks) - 1))
    failures = []
    for i, (blk, p) in enumerate(zip(blocks, W.source)):
        eps = Fraction(1, 1 << i)
        total, approx = _recheck_block_sum(r, blk)
        if approx is None:
            if not abs(p - total) < eps:
                failures.append(i)
        else:
            with mpmath.workdps(60):
                err = abs(mpmath.mpf(p.numerator) / p.denominator - total.numerator / mpmath.mpf(total.denominator) - approx)
                if not err < mpmath.mpf(eps.numerator) / eps.denominator - mpmath.mpf(10) ** -40:
                    failures.append(i)
    agreement: dict = {}
    bad = []
    for A in samples:
        if I is None and W.family is not None and sum_diverges(W.family):
            I = Summable(W.family)
        src = membership(I, A).kind if I is not None else "Unknown"
        tgt = _block_image_verdict(W, A, J)
        if "Unknown" in (src, tgt):
            continue
        agreement[(src, tgt)] = agreement.get((src, tgt), 0) + 1
        if src != tgt:
            bad.append(A.to_json())
    return WitnessReport(ordered, failures, agreement, bad, len(samples))


def _block_image_verdict(W: BlockWitness, A, J) -> str:
    """Verdict for w_A in the target summable ideal, read through the block error bounds.

    The r-sum over w_A is sum_{i in A} s_i with |s_i - p_i| < 2**-i, so it
    converges iff sum_{i in A} p_i does; the latter is decided from the
    source family tag.
    """
    A = D.normalize(A)
    if D.is_finite(A):
        return "In"  # finitely many finite blocks
    if W.family is None:
        return "Unknown"
    if not sum_diverges(W.family):
        return "In"
    return membership(Summable(W.family), A).kind


# ---------------------------------------------------------------- approximate Delta-homomorphisms

@dataclass
class HomReport:
    condition1: dict
    condition2: dict
    failures: list
    checked: int

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"ok": self.ok, "condition1": self.condition1, "condition2": self.condition2,
                "failures": self.failures, "checked": self.checked}


def check_delta_homomorphism(theta, I, J, samples) -> HomReport:
    """(1) theta(x) D theta(y) D theta(x D y) in J and (2) x in I iff theta(x) in J, D = symmetric difference."""
    c1: dict = {}
    c2: dict = {}
    failures = []
    for x, y in samples:
        tx, ty, txy = theta(x), theta(y), theta(D.combine("symdiff", x, y))
        err = D.combine("symdiff", D.combine("symdiff", tx, ty), txy)
        v = membership(J, err).kind
        c1[v] = c1.get(v, 0) + 1
        if v == "Out":
            failures.append({"condition": 1, "x": x.to_json(), "y": y.to_json()})
        for z, tz in ((x, tx), (y, ty)):
            a, b = membership(I, z).kind, membership(J, tz).kind
            if "Unknown" in (a, b):
                c2["Unknown"] = c2.get("Unknown", 0) + 1
                continue
            key = f"{a}/{b}"
            c2[key] = c2.get(key, 0) + 1
            if a != b:
                failures.append({"condition": 2, "x": z.to_json()})
    return HomReport(c1, c2, failures, len(samples))
