"""Finite descriptions of infinite subsets of N and of points of N x N.

Variants: finite sets, ultimately periodic sets, sparse sets given by a
strictly increasing generator (geometric or polynomial growth) restricted to
an ultimately periodic set of indices, Boolean combinations of these, and
matrices with finitely many explicit columns plus a default column.

Boolean combinations are normalized where a closed form exists: periodic
with periodic gives periodic, a sparse set met with a periodic set stays
sparse, and two sparse sets over the same generator combine on indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Union


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# ---------------------------------------------------------------- periodic sets

@dataclass(frozen=True)
class UltimatelyPeriodic:
    """n is in the set iff prefix[n] (n < len(prefix)) or period[(n - len(prefix)) % len(period)]."""

    prefix: tuple = ()
    period: tuple = (0,)

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(b not in (0, 1) for b in self.prefix + self.period):
            raise ValueError("bits must be 0 or 1")

    def contains(self, n: int) -> bool:
        L = len(self.prefix)
        if n < L:
            return bool(self.prefix[n])
        return bool(self.period[(n - L) % len(self.period)])

    def canonical(self) -> "UltimatelyPeriodic":
        per = list(self.period)
        p = len(per)
        for d in range(1, p + 1):
            if p % d == 0 and per == per[:d] * (p // d):
                per = per[:d]
                break
        pre = list(self.prefix)
        # absorb trailing prefix bits into the period by rotation
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = [per[-1]] + per[:-1]
        return UltimatelyPeriodic(tuple(pre), tuple(per))

    def is_finite(self) -> bool:
        return not any(self.period)

    def is_empty(self) -> bool:
        return not any(self.period) and not any(self.prefix)

    def density(self) -> Fraction:
        return Fraction(sum(self.period), len(self.period))

    def elements_below(self, N: int) -> list:
        return [n for n in range(N) if self.contains(n)]

    def finite_elements(self) -> frozenset:
        if not self.is_finite():
            raise ValueError("set is infinite")
        return frozenset(n for n, b in enumerate(self.prefix) if b)

    def to_json(self) -> dict:
        c = self.canonical()
        if c.is_finite():
            return {"kind": "finite", "elements": sorted(c.finite_elements())}
        return {"kind": "periodic", "prefix": "".join(map(str, c.prefix)), "period": "".join(map(str, c.period))}


def finite_set(elements) -> UltimatelyPeriodic:
    elements = sorted(set(int(e) for e in elements))
    if elements and elements[0] < 0:
        raise ValueError("elements must be natural numbers")
    size = elements[-1] + 1 if elements else 0
    bits = [0] * size
    for e in elements:
        bits[e] = 1
    return UltimatelyPeriodic(tuple(bits), (0,))


EMPTY = UltimatelyPeriodic((), (0,))
EVERYTHING = UltimatelyPeriodic((), (1,))
EVENS = UltimatelyPeriodic((), (1, 0))
ODDS = UltimatelyPeriodic((), (0, 1))


def cofinite(missing) -> UltimatelyPeriodic:
    missing = set(missing)
    size = max(missing) + 1 if missing else 0
    return UltimatelyPeriodic(tuple(0 if n in missing else 1 for n in range(size)), (1,))


def up_combine(a: UltimatelyPeriodic, b: UltimatelyPeriodic, op) -> UltimatelyPeriodic:
    L = max(len(a.prefix), len(b.prefix))
    P = _lcm(len(a.period), len(b.period))
    pre = tuple(int(op(a.contains(n), b.contains(n))) for n in range(L))
    per = tuple(int(op(a.contains(n), b.contains(n))) for n in range(L, L + P))
    return UltimatelyPeriodic(pre, per).canonical()


def up_complement(a: UltimatelyPeriodic) -> UltimatelyPeriodic:
    return UltimatelyPeriodic(tuple(1 - b for b in a.prefix), tuple(1 - b for b in a.period)).canonical()


def up_shift(a: UltimatelyPeriodic, k: int) -> UltimatelyPeriodic:
    """The set {n + k : n in a}."""
    return UltimatelyPeriodic((0,) * k + a.prefix, a.period).canonical()


# ---------------------------------------------------------------- sparse generators

@dataclass(frozen=True)
class GeometricGen:
    """g(n) = a * b**n + c."""

    a: int = 1
    b: int = 2
    c: int = 0

    def __post_init__(self):
        if self.a < 1 or self.b < 2 or self.c < 0:
            raise ValueError("geometric generator needs a >= 1, b >= 2, c >= 0")

    def __call__(self, n: int) -> int:
        return self.a * self.b ** n + self.c

    def residues(self, M: int) -> tuple[tuple, tuple]:
        """g(n) mod M as an ultimately periodic sequence (prefix, period)."""
        seen: dict = {}
        seq = []
        x = self.a % M if M > 1 else 0
        n = 0
        while True:
            key = x
            if key in seen:
                start = seen[key]
                return tuple(seq[:start]), tuple(seq[start:])
            seen[key] = n
            seq.append((x + self.c) % M)
            x = (x * self.b) % M
            n += 1

    def growth(self) -> dict:
        return {"growth": "geometric"}

    def to_json(self) -> dict:
        return {"type": "geometric", "a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class PolynomialGen:
    """g(n) = a * n**d + c, d >= 2."""

    a: int = 1
    d: int = 2
    c: int = 0

    def __post_init__(self):
        if self.a < 1 or self.d < 2 or self.c < 0:
            raise ValueError("polynomial generator needs a >= 1, d >= 2, c >= 0")

    def __call__(self, n: int) -> int:
        return self.a * n ** self.d + self.c

    def residues(self, M: int) -> tuple[tuple, tuple]:
        return (), tuple(self(n) % M for n in range(M))

    def growth(self) -> dict:
        return {"growth": "polynomial", "degree": self.d}

    def to_json(self) -> dict:
        return {"type": "polynomial", "a": self.a, "d": self.d, "c": self.c}


Generator = Union[GeometricGen, PolynomialGen]


def gen_from_json(d: dict) -> Generator:
    if d["type"] == "geometric":
        return GeometricGen(d.get("a", 1), d.get("b", 2), d.get("c", 0))
    if d["type"] == "polynomial":
        return PolynomialGen(d.get("a", 1), d.get("d", 2), d.get("c", 0))
    raise ValueError(f"unknown generator {d!r}")


@dataclass(frozen=True)
class SparseGen:
    """{gen(n) : n in mask}; gen strictly increasing with summable reciprocals."""

    gen: Generator
    mask: UltimatelyPeriodic = EVERYTHING

    def contains(self, m: int) -> bool:
        # gen is strictly increasing, so a short search settles membership
        n = 0
        while True:
            v = self.gen(n)
            if v == m:
                return self.mask.contains(n)
            if v > m:
                return False
            n += 1

    def elements_below(self, N: int) -> list:
        out = []
        n = 0
        while True:
            v = self.gen(n)
            if v >= N:
                return out
            if self.mask.contains(n):
                out.append(v)
            n += 1

    def is_finite(self) -> bool:
        return self.mask.is_finite()

    def is_empty(self) -> bool:
        return self.mask.is_empty()

    def to_json(self) -> dict:
        d = {"kind": "sparse", "gen": self.gen.to_json()}
        d.update(self.gen.growth())
        if self.mask.canonical() != EVERYTHING:
            d["mask"] = self.mask.to_json()
        return d


def sparse(gen: Generator, mask: UltimatelyPeriodic = EVERYTHING):
    """Build a sparse set in canonical form; finite ones become finite sets."""
    mask = mask.canonical()
    if isinstance(gen, GeometricGen):
        a, k = gen.a, 0
        while a % gen.b == 0:
            a //= gen.b
            k += 1
        if k:
            gen = GeometricGen(a, gen.b, gen.c)
            mask = up_shift(mask, k)
    if mask.is_finite():
        return finite_set(gen(n) for n in mask.finite_elements())
    return SparseGen(gen, mask)


def sparse_index_mask(S: SparseGen, U: UltimatelyPeriodic) -> UltimatelyPeriodic:
    """Indices n with gen(n) in U, as an ultimately periodic set."""
    L, P = len(U.prefix), len(U.period)
    # first index with gen(n) >= L
    n0 = 0
    while S.gen(n0) < L:
        n0 += 1
    res_pre, res_per = S.gen.residues(P)
    head = [int(U.contains(S.gen(n))) for n in range(n0)]

    def bit(n):
        r = res_pre[n] if n < len(res_pre) else res_per[(n - len(res_pre)) % len(res_per)]
        return int(U.period[(r - L) % P])

    start = max(n0, len(res_pre))
    head += [bit(n) for n in range(n0, start)]
    per = tuple(bit(n) for n in range(start, start + len(res_per)))
    return UltimatelyPeriodic(tuple(head), per).canonical()


# ---------------------------------------------------------------- Boolean combinations

OPS = ("union", "inter", "diff", "symdiff", "complement")


@dataclass(frozen=True)
class BooleanCombo:
    op: str
    args: tuple

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown operation {self.op!r}")
        if self.op == "complement" and len(self.args) != 1:
            raise ValueError("complement takes one argument")
        if self.op != "complement" and len(self.args) != 2:
            raise ValueError(f"{self.op} takes two arguments")

    def contains(self, n: int) -> bool:
        vals = [a.contains(n) for a in self.args]
        return _apply(self.op, *vals)

    def elements_below(self, N: int) -> list:
        return [n for n in range(N) if self.contains(n)]

    def to_json(self) -> dict:
        return {"kind": "combo", "op": self.op, "args": [a.to_json() for a in self.args]}


def _apply(op, a, b=None):
    if op == "union":
        return a or b
    if op == "inter":
        return a and b
    if op == "diff":
        return a and not b
    if op == "symdiff":
        return a != b
    return not a


SetDescriptor = Union[UltimatelyPeriodic, SparseGen, BooleanCombo]


def combine(op: str, *args) -> SetDescriptor:
    """Normalizing constructor for Boolean combinations."""
    args = tuple(normalize(a) for a in args)
    if op == "complement":
        (a,) = args
        if isinstance(a, UltimatelyPeriodic):
            return up_complement(a)
        return BooleanCombo(op, args)
    a, b = args
    if isinstance(a, UltimatelyPeriodic) and isinstance(b, UltimatelyPeriodic):
        return up_combine(a, b, lambda x, y: _apply(op, x, y))
    if a == b:
        if op in ("union", "inter"):
            return a
        return EMPTY
    if isinstance(a, SparseGen) and isinstance(b, UltimatelyPeriodic) and op in ("inter", "diff"):
        m = sparse_index_mask(a, b)
        new = up_combine(a.mask, m, (lambda x, y: x and y) if op == "inter" else (lambda x, y: x and not y))
        return sparse(a.gen, new)
    if isinstance(a, UltimatelyPeriodic) and isinstance(b, SparseGen) and op == "inter":
        return combine("inter", b, a)
    if isinstance(a, SparseGen) and isinstance(b, SparseGen) and a.gen == b.gen:
        return sparse(a.gen, up_combine(a.mask, b.mask, lambda x, y: _apply(op, x, y)))
    if isinstance(a, UltimatelyPeriodic) and a.is_empty():
        if op in ("union", "symdiff"):
            return b
        if op in ("inter", "diff"):
            return EMPTY
    if isinstance(b, UltimatelyPeriodic) and b.is_empty():
        if op in ("union", "symdiff", "diff"):
            return a
        return EMPTY
    return BooleanCombo(op, args)


def normalize(x: SetDescriptor) -> SetDescriptor:
    if isinstance(x, UltimatelyPeriodic):
        return x.canonical()
    if isinstance(x, SparseGen):
        return sparse(x.gen, x.mask)
    if isinstance(x, BooleanCombo):
        return combine(x.op, *x.args)
    raise TypeError(f"not a set descriptor: {x!r}")


def periodic_shadow(x: SetDescriptor) -> UltimatelyPeriodic:
    """Replace every sparse part by the empty set.

    The result differs from x only inside the union of the sparse parts, so
    any ideal containing those parts agrees on x and its shadow.
    """
    x = normalize(x)
    if isinstance(x, UltimatelyPeriodic):
        return x
    if isinstance(x, SparseGen):
        return EMPTY
    parts = [periodic_shadow(a) for a in x.args]
    if x.op == "complement":
        return up_complement(parts[0])
    return up_combine(parts[0], parts[1], lambda p, q: _apply(x.op, p, q))


def sparse_parts(x: SetDescriptor) -> list:
    x = normalize(x)
    if isinstance(x, SparseGen):
        return [x]
    if isinstance(x, BooleanCombo):
        out = []
        for a in x.args:
            out.extend(sparse_parts(a))
        return out
    return []


def generator_split(x: SetDescriptor, gen=None):
    """Split x as gen[m] union (s minus range(gen)) when all sparse parts share one generator.

    Returns (gen, m, s) with m and s ultimately periodic, or None when the
    sparse parts use several generators. gen is None when x has no sparse part.
    """
    x = normalize(x)
    gens = {p.gen for p in sparse_parts(x)}
    if gen is not None:
        gens.add(gen)
    if len(gens) > 1:
        return None
    if not gens:
        return None, EMPTY, periodic_shadow(x)
    (gen,) = gens

    def on_range(y) -> UltimatelyPeriodic:
        # indices n with gen(n) in y
        if isinstance(y, UltimatelyPeriodic):
            return sparse_index_mask(SparseGen(gen, EVERYTHING), y)
        if isinstance(y, SparseGen):
            return y.mask
        parts = [on_range(a) for a in y.args]
        if y.op == "complement":
            return up_complement(parts[0])
        return up_combine(parts[0], parts[1], lambda p, q: _apply(y.op, p, q))

    return gen, on_range(x).canonical(), periodic_shadow(x)


def off_range_finite(gen, s: UltimatelyPeriodic) -> frozenset:
    """Elements of the finite set s outside the range of gen."""
    R = SparseGen(gen, EVERYTHING) if gen is not None else None
    return frozenset(e for e in s.finite_elements() if R is None or not R.contains(e))


def is_empty(x: SetDescriptor) -> Optional[bool]:
    x = normalize(x)
    if isinstance(x, (UltimatelyPeriodic, SparseGen)):
        return x.is_empty()
    split = generator_split(x)
    if split is not None:
        gen, m, s = split
        if not s.is_finite():
            return False
        return m.is_empty() and not off_range_finite(gen, s)
    shadow = periodic_shadow(x)
    if not shadow.is_finite():
        return False
    if not shadow.is_empty():
        # shadow elements outside every sparse part survive in x
        elems = shadow.finite_elements()
        if any(not any(p.contains(e) for p in sparse_parts(x)) for e in elems):
            return False
    if x.op == "union":
        a, b = (is_empty(y) for y in x.args)
        if a is False or b is False:
            return False
        if a and b:
            return True
    if x.op in ("inter", "diff"):
        if is_empty(x.args[0]):
            return True
    return None


def is_finite(x: SetDescriptor) -> Optional[bool]:
    x = normalize(x)
    if isinstance(x, (UltimatelyPeriodic, SparseGen)):
        return x.is_finite()
    split = generator_split(x)
    if split is not None:
        return split[1].is_finite() and split[2].is_finite()
    if not periodic_shadow(x).is_finite():
        return False
    args = [is_finite(y) for y in x.args]
    if x.op == "union":
        if args[0] is False or args[1] is False:
            return False
        if args[0] and args[1]:
            return True
    elif x.op == "inter":
        if args[0] or args[1]:
            return True
    elif x.op == "diff":
        if args[0]:
            return True
        if args[0] is False and args[1]:
            return False
    elif x.op == "symdiff":
        if args[0] and args[1]:
            return True
        if args[0] != args[1] and None not in args:
            return False
    elif x.op == "complement":
        if args[0]:
            return False
    return None


def eventually_equal(x: SetDescriptor, y: SetDescriptor) -> Optional[bool]:
    """Is the symmetric difference of x and y finite? Direct comparison of normal forms."""
    x, y = normalize(x), normalize(y)
    if isinstance(x, UltimatelyPeriodic) and isinstance(y, UltimatelyPeriodic):
        L = max(len(x.prefix), len(y.prefix))
        P = _lcm(len(x.period), len(y.period))
        return all(x.contains(n) == y.contains(n) for n in range(L, L + P))
    if isinstance(x, SparseGen) and isinstance(y, SparseGen):
        if x.gen == y.gen:
            return eventually_equal(x.mask, y.mask)
        return None
    if isinstance(x, SparseGen) and isinstance(y, UltimatelyPeriodic):
        # an infinite density-zero set is never almost equal to a periodic set
        return False
    if isinstance(y, SparseGen) and isinstance(x, UltimatelyPeriodic):
        return False
    return is_finite(combine("symdiff", x, y))


def exactly_equal(x: SetDescriptor, y: SetDescriptor) -> Optional[bool]:
    """Equality of the described sets, comparing normal forms directly."""
    x, y = normalize(x), normalize(y)
    if isinstance(x, UltimatelyPeriodic) and isinstance(y, UltimatelyPeriodic):
        return x.canonical() == y.canonical()
    if isinstance(x, SparseGen) and isinstance(y, SparseGen):
        if x.gen == y.gen:
            return x.mask.canonical() == y.mask.canonical()
        return None
    if {type(x), type(y)} == {SparseGen, UltimatelyPeriodic}:
        return False
    if x == y:
        return True
    sx, sy = generator_split(x), generator_split(y)
    if sx is None or sy is None:
        return None
    if sx[0] is None and sy[0] is not None:
        sx = generator_split(x, sy[0])
    if sy[0] is None and sx[0] is not None:
        sy = generator_split(y, sx[0])
    if sx is None or sy is None:
        return None
    gx, mx, px = sx
    gy, my, py = sy
    gen = gx
    if mx.canonical() != my.canonical():
        return False
    # the off-range parts must agree: their difference is periodic, so it
    # has to be a finite set lying inside the range of gen
    diff = up_combine(px, py, lambda a, b: a != b)
    return diff.is_finite() and not off_range_finite(gen, diff)


def set_from_json(d: dict) -> SetDescriptor:
    kind = d["kind"]
    if kind == "finite":
        return finite_set(d["elements"])
    if kind == "periodic":
        return UltimatelyPeriodic(tuple(int(c) for c in d.get("prefix", "")), tuple(int(c) for c in d["period"]))
    if kind == "everything":
        return EVERYTHING
    if kind == "nothing":
        return EMPTY
    if kind == "sparse":
        mask = set_from_json(d["mask"]) if "mask" in d else EVERYTHING
        return sparse(gen_from_json(d["gen"]), mask)
    if kind == "combo":
        return combine(d["op"], *(set_from_json(a) for a in d["args"]))
    raise ValueError(f"unknown set descriptor kind {kind!r}")


def set_to_json(x: SetDescriptor) -> dict:
    return x.to_json()


# ---------------------------------------------------------------- matrices

@dataclass(frozen=True)
class Matrix:
    """A subset of N x A: column k is columns[k] if given, else default.

    Columns are set descriptors, or matrices for iterated products.
    """

    columns: tuple = ()  # sorted (k, descriptor) pairs
    default: object = EMPTY

    @staticmethod
    def of(columns: dict, default=EMPTY) -> "Matrix":
        return Matrix(tuple(sorted(columns.items())), default)

    def column(self, k: int):
        for j, c in self.columns:
            if j == k:
                return c
        return self.default

    def explicit_keys(self) -> list:
        return [k for k, _ in self.columns]

    def contains(self, point) -> bool:
        k, rest = point[0], point[1:]
        col = self.column(k)
        if isinstance(col, Matrix):
            return col.contains(rest)
        return col.contains(rest[0])

    def depth(self) -> int:
        cols = [c for _, c in self.columns] + [self.default]
        return 1 + max((c.depth() if isinstance(c, Matrix) else 0) for c in cols)

    def to_json(self) -> dict:
        return {"kind": "matrix", "columns": {str(k): c.to_json() for k, c in self.columns},
                "default": self.default.to_json()}


def point_from_json(d: dict):
    if d["kind"] == "matrix":
        cols = {int(k): point_from_json(v) for k, v in d["columns"].items()}
        return Matrix.of(cols, point_from_json(d["default"]))
    return set_from_json(d)


def matrix_combine(op: str, x, y):
    """Columnwise Boolean combination of two matrices (or sets)."""
    if isinstance(x, Matrix) or isinstance(y, Matrix):
        if not (isinstance(x, Matrix) and isinstance(y, Matrix)):
            raise ValueError("cannot combine a matrix with a set")
        keys = sorted(set(x.explicit_keys()) | set(y.explicit_keys()))
        cols = {k: matrix_combine(op, x.column(k), y.column(k)) for k in keys}
        return Matrix.of(cols, matrix_combine(op, x.default, y.default))
    return combine(op, x, y)
