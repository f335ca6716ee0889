"""Free-group words acting on binary words, level-by-level Lipschitz permutation pairs,
finite group actions on windows, and cycle finding in finite graphs.

Letters are 'a', 'b' and their inverses 'A', 'B'. A word acts on the left:
w = x_1 ... x_m sends s to h_{x_1}(h_{x_2}(... h_{x_m}(s))), so the last
letter is applied first. Binary words of length n are stored as integers
with the first bit most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

LETTERS = "abAB"  # order used to enumerate words
INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


# ---------------------------------------------------------------- words

def reduce_word(letters: str) -> str:
    out: list = []
    for c in letters:
        if c not in INVERSE:
            raise ValueError(f"unknown letter {c!r}")
        if out and out[-1] == INVERSE[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


@dataclass(frozen=True)
class ReducedWord:
    letters: str = ""

    def __post_init__(self):
        if reduce_word(self.letters) != self.letters:
            raise ValueError(f"{self.letters!r} is not reduced")

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "ReducedWord":
        return ReducedWord("".join(INVERSE[c] for c in reversed(self.letters)))

    def application_order(self) -> str:
        """Letters in the order they act."""
        return self.letters[::-1]

    def initial_subwords(self) -> list:
        """The partial products applied first: Lambda, x_m, x_{m-1} x_m, ..., w."""
        m = len(self.letters)
        return [ReducedWord(self.letters[m - j:]) for j in range(m + 1)]

    def __str__(self):
        return self.letters or "Λ"


def word(s: str) -> ReducedWord:
    return ReducedWord(reduce_word(s.replace("Λ", "")))


def word_concat(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    return ReducedWord(reduce_word(u.letters + v.letters))


def words_of_length(n: int) -> Iterable[ReducedWord]:
    """Reduced words of length n in lexicographic order on the letter order a, b, A, B."""
    for tup in itertools.product(LETTERS, repeat=n):
        s = "".join(tup)
        if reduce_word(s) == s:
            yield ReducedWord(s)


# ---------------------------------------------------------------- level maps

def bits_to_int(s) -> int:
    v = 0
    for b in s:
        v = 2 * v + int(b)
    return v


def int_to_bits(v: int, n: int) -> tuple:
    return tuple((v >> (n - 1 - i)) & 1 for i in range(n))


@dataclass
class LevelMap:
    """f[n], g[n]: permutations of 2^n (arrays) for n = 0..N."""

    f: list
    g: list
    processed: list = field(default_factory=list)  # (n, word, s, T_n) per step
    flags: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.f) - 1

    def perm(self, letter: str, n: int) -> np.ndarray:
        base = self.f[n] if letter in "aA" else self.g[n]
        if letter in "ab":
            return base
        inv = np.empty_like(base)
        inv[base] = np.arange(len(base))
        return inv

    def word_perm(self, w: ReducedWord, n: int) -> np.ndarray:
        p = np.arange(1 << n)
        for c in w.application_order():
            p = self.perm(c, n)[p]
        return p

    def to_json(self) -> dict:
        return {"N": self.N, "f": [p.tolist() for p in self.f], "g": [p.tolist() for p in self.g],
                "processed": [{"level": n, "word": str(w), "s": "".join(map(str, s)), "T": len(T)}
                              for n, w, s, T in self.processed],
                "flags": self.flags}

    @classmethod
    def from_json(cls, d: dict) -> "LevelMap":
        lm = cls([np.array(p, dtype=np.int64) for p in d["f"]], [np.array(p, dtype=np.int64) for p in d["g"]])
        for item in d.get("processed", []):
            s = tuple(int(c) for c in item["s"])
            lm.processed.append((item["level"], word(item["word"]), s, None))
        return lm


def word_apply(w: ReducedWord, x, maps: LevelMap) -> tuple:
    x = tuple(x)
    n = len(x)
    if n > maps.N:
        raise ValueError("word longer than the built levels")
    return int_to_bits(int(maps.word_perm(w, n)[bits_to_int(x)]), n)


def _extend(prev: np.ndarray, flips: np.ndarray) -> np.ndarray:
    """Level n+1 map s^i -> f(s)^(i xor flips[s])."""
    m = len(prev)
    out = np.empty(2 * m, dtype=np.int64)
    idx = np.arange(m)
    out[2 * idx] = 2 * prev + flips
    out[2 * idx + 1] = 2 * prev + (1 - flips)
    return out


def _eligible(maps: LevelMap, n: int, w: ReducedWord, s: tuple, fixed: np.ndarray) -> bool:
    k = len(s)
    # some t in 2^n extending s is fixed by w
    lo, hi = bits_to_int(s) << (n - k), (bits_to_int(s) + 1) << (n - k)
    if not fixed[lo:hi].any():
        return False
    x = bits_to_int(s)
    images = [int(maps.word_perm(u, k)[x]) for u in w.initial_subwords()]
    inner = images[:-1]  # Lambda and w are allowed to agree
    return len(set(inner)) == len(inner) and len(set(images[1:])) == len(images[1:])


def least_eligible_pair(maps: LevelMap, n: int, max_word: int = 12) -> tuple:
    """Least pair (w, s) in the order: word length, word, s length, s."""
    for L in range(1, max_word + 1):
        for w in words_of_length(L):
            fixed = maps.word_perm(w, n) == np.arange(1 << n)
            if not fixed.any():
                continue
            for k in range(n + 1):
                for s in itertools.product((0, 1), repeat=k):
                    if _eligible(maps, n, w, s, fixed):
                        return w, s
    raise RuntimeError("no eligible pair within the word-length cap")


def build_lipschitz_pair(N: int) -> LevelMap:
    """Level maps through 2^N: one least eligible pair is killed at each step."""
    ident = np.zeros(1, dtype=np.int64)
    one = np.array([1, 0], dtype=np.int64)
    maps = LevelMap([ident, one], [ident.copy(), one.copy()])
    if N == 0:
        return LevelMap([ident], [ident.copy()])
    for n in range(1, N):
        w, s = least_eligible_pair(maps, n)
        k = len(s)
        lo, hi = bits_to_int(s) << (n - k), (bits_to_int(s) + 1) << (n - k)
        wp = maps.word_perm(w, n)
        T = [t for t in range(lo, hi) if wp[t] == t]
        order = w.application_order()
        if INVERSE[order[-1]] == order[0]:
            maps.flags.append({"level": n, "word": str(w), "issue": "first and last letters are inverse"})
        sig = {"a": {}, "b": {}}
        for t in T:
            cyc = [t]
            for c in order:
                cyc.append(int(maps.perm(c, n)[cyc[-1]]))
            for ell, c in enumerate(order):
                key, node = c.lower(), (cyc[ell] if c in "ab" else cyc[ell + 1])
                val = int(ell == 0)
                if sig[key].get(node, val) != val:
                    raise RuntimeError(f"inconsistent flip at level {n} for {w}")
                sig[key][node] = val
        flips_f = np.zeros(1 << n, dtype=np.int64)
        flips_g = np.zeros(1 << n, dtype=np.int64)
        for node, v in sig["a"].items():
            flips_f[node] = v
        for node, v in sig["b"].items():
            flips_g[node] = v
        maps.f.append(_extend(maps.f[n], flips_f))
        maps.g.append(_extend(maps.g[n], flips_g))
        maps.processed.append((n, w, s, T))
    return maps


@dataclass
class PairReport:
    violations: list
    processed: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "processed": self.processed}


def verify_pair(maps: LevelMap, N: Optional[int] = None) -> PairReport:
    """Bijectivity, prefix coherence, the Lipschitz property and the kill invariant."""
    N = maps.N if N is None else N
    bad = []
    for name, lv in (("f", maps.f), ("g", maps.g)):
        for n in range(N + 1):
            p = lv[n]
            if len(p) != 1 << n or sorted(p.tolist()) != list(range(1 << n)):
                bad.append({"check": "bijective", "map": name, "level": n})
        for n in range(N):
            child = lv[n + 1]
            for s in range(1 << n):
                for i in (0, 1):
                    if child[2 * s + i] >> 1 != lv[n][s]:
                        bad.append({"check": "coherence", "map": name, "s": "".join(map(str, int_to_bits(s, n))), "i": i})
        # x|n = y|n iff f(x)|n = f(y)|n, on 2^N
        top = lv[N]
        for n in range(N + 1):
            pref = np.arange(1 << N) >> (N - n)
            img = top >> (N - n)
            # the prefix map must be well defined and injective at each length
            table = {}
            for a, b in zip(pref.tolist(), img.tolist()):
                if table.setdefault(a, b) != b:
                    bad.append({"check": "lipschitz", "map": name, "length": n})
                    break
            if len(set(table.values())) != len(table):
                bad.append({"check": "lipschitz", "map": name, "length": n})
    # replay the selection on the given maps and check each step's kill
    steps = []
    for n in range(1, N):
        try:
            w, s = least_eligible_pair(maps, n)
        except RuntimeError:
            bad.append({"check": "selection", "level": n})
            continue
        steps.append((n, w, s))
    recorded = [(n, w, s) for n, w, s, _ in maps.processed]
    if recorded and recorded[:len(steps)] != steps:
        bad.append({"check": "selection", "detail": "recorded pairs differ from the least eligible pairs"})
    for n, w, s in steps:
        k = len(s)
        lo, hi = bits_to_int(s) << (n - k), (bits_to_int(s) + 1) << (n - k)
        wp_n = maps.word_perm(w, n)
        wp = maps.word_perm(w, n + 1)
        for t in range(lo, hi):
            if wp_n[t] != t:
                continue
            for i in (0, 1):
                if wp[2 * t + i] != 2 * t + (1 - i):
                    bad.append({"check": "kill", "level": n, "word": str(w), "t": "".join(map(str, int_to_bits(t, n)))})
        for later in range(n + 1, N + 1):
            fixed = maps.word_perm(w, later) == np.arange(1 << later)
            if _eligible(maps, later, w, s, fixed):
                bad.append({"check": "reappears", "level": later, "word": str(w), "s": "".join(map(str, s))})
    processed = [{"level": n, "word": str(w), "s": "".join(map(str, s))} for n, w, s in steps]
    return PairReport(bad, processed)


def identity_maps(N: int) -> LevelMap:
    return LevelMap([np.arange(1 << n) for n in range(N + 1)], [np.arange(1 << n) for n in range(N + 1)])


# ---------------------------------------------------------------- simple actions

def e0_action(w: Iterable[int], x) -> tuple:
    """Flip the coordinates of x listed in the finite set w."""
    x = tuple(x)
    w = set(w)
    if any(k >= len(x) or k < 0 for k in w):
        raise ValueError("support escapes window")
    return tuple(1 - b if k in w else b for k, b in enumerate(x))


def shift_action(g, support: Iterable, window: Iterable, mul=None, inv=None) -> frozenset:
    """Canonical action (g.x)(h) = x(g^-1 h) on configurations given by their support.

    Integers by default; pass mul/inv for other groups, e.g. free-group words.
    The image support must stay inside the window.
    """
    mul = mul or (lambda u, v: u + v)
    window = set(window)
    support = set(support)
    if not support <= window:
        raise ValueError("support escapes window")
    image = frozenset(mul(g, h) for h in support)
    if not image <= window:
        raise ValueError("support escapes window")
    return image


# ---------------------------------------------------------------- cycles

def two_core(nodes: Iterable, edges: Iterable) -> tuple[set, dict]:
    adj = {v: set() for v in nodes}
    for u, v in edges:
        if u == v:
            raise ValueError("graph must be simple")
        adj[u].add(v)
        adj[v].add(u)
    stack = [v for v in adj if len(adj[v]) <= 1]
    alive = set(adj)
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                adj[u].discard(v)
                if len(adj[u]) <= 1:
                    stack.append(u)
        adj[v] = set()
    return alive, {v: adj[v] & alive for v in alive}


def find_cycle(nodes: Iterable, edges: Iterable) -> Optional[list]:
    """A cycle with at least three nodes, or None when the graph is a forest."""
    alive, adj = two_core(list(nodes), list(edges))
    if not alive:
        return None
    # every node of the 2-core has degree >= 2: walk without backtracking until a repeat
    start = min(alive)
    path, pos = [start], {start: 0}
    prev = None
    while True:
        cur = path[-1]
        nxt = min(v for v in adj[cur] if v != prev)
        if nxt in pos:
            return path[pos[nxt]:]
        pos[nxt] = len(path)
        path.append(nxt)
        prev = cur


def is_cycle(cycle: list, edges: Iterable) -> bool:
    E = {frozenset(e) for e in edges}
    return (len(cycle) >= 3 and len(set(cycle)) == len(cycle)
            and all(frozenset((cycle[i], cycle[(i + 1) % len(cycle)])) in E for i in range(len(cycle))))
