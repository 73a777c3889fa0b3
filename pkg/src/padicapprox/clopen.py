"""Exact clopen subsets of Z_p^n as hash-consed digit-prefix tries.

A node at level j stands for a coset c + (p^j Z_p)^n and is either full, empty,
or carries p^n children, one per next-digit vector. Nodes are interned per
(p, n) space, so identical subtrees share one id: a rectangle with very unequal
radii costs O(depth) nodes instead of exponentially many, set algebra is
memoized on node-id pairs, and canonical form is structural equality of ids.

Measures are exact Fractions with denominator dividing p^{n*K}; box counts are
exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import is_prime

EMPTY = 0
FULL = 1


class _Space:
    """Interned trie nodes and op caches for one (p, n) branching alphabet."""

    def __init__(self, p: int, n: int):
        self.p = p
        self.n = n
        self.width = p**n
        self._children: list[tuple[int, ...] | None] = [None, None]
        self._intern: dict[tuple[int, ...], int] = {}
        self._union: dict[tuple[int, int], int] = {}
        self._inter: dict[tuple[int, int], int] = {}
        self._compl: dict[int, int] = {}
        self._measure: dict[int, Fraction] = {}
        self._boxes: dict[tuple[int, int], int] = {}
        self._empty_children = (EMPTY,) * self.width

    def node(self, children: tuple[int, ...]) -> int:
        first = children[0]
        if first in (EMPTY, FULL) and all(c == first for c in children):
            return first
        nid = self._intern.get(children)
        if nid is None:
            nid = len(self._children)
            self._children.append(children)
            self._intern[children] = nid
        return nid

    def children(self, nid: int) -> tuple[int, ...]:
        if nid == EMPTY:
            return self._empty_children
        if nid == FULL:
            return (FULL,) * self.width
        return self._children[nid]

    def union(self, a: int, b: int) -> int:
        if a == FULL or b == FULL:
            return FULL
        if a == EMPTY:
            return b
        if b == EMPTY or a == b:
            return a
        key = (a, b) if a < b else (b, a)
        out = self._union.get(key)
        if out is None:
            ca, cb = self._children[a], self._children[b]
            out = self.node(tuple(self.union(x, y) for x, y in zip(ca, cb)))
            self._union[key] = out
        return out

    def intersect(self, a: int, b: int) -> int:
        if a == EMPTY or b == EMPTY:
            return EMPTY
        if a == FULL:
            return b
        if b == FULL or a == b:
            return a
        key = (a, b) if a < b else (b, a)
        out = self._inter.get(key)
        if out is None:
            ca, cb = self._children[a], self._children[b]
            out = self.node(tuple(self.intersect(x, y) for x, y in zip(ca, cb)))
            self._inter[key] = out
        return out

    def complement(self, a: int) -> int:
        if a == EMPTY:
            return FULL
        if a == FULL:
            return EMPTY
        out = self._compl.get(a)
        if out is None:
            out = self.node(tuple(self.complement(c) for c in self._children[a]))
            self._compl[a] = out
        return out

    def measure(self, a: int) -> Fraction:
        if a == EMPTY:
            return Fraction(0)
        if a == FULL:
            return Fraction(1)
        out = self._measure.get(a)
        if out is None:
            out = sum((self.measure(c) for c in self._children[a]), Fraction(0)) / self.width
            self._measure[a] = out
        return out

    def box_count(self, a: int, k: int) -> int:
        if a == EMPTY:
            return 0
        if k == 0:
            return 1
        if a == FULL:
            return self.width**k
        key = (a, k)
        out = self._boxes.get(key)
        if out is None:
            out = sum(self.box_count(c, k - 1) for c in self._children[a])
            self._boxes[key] = out
        return out


_SPACES: dict[tuple[int, int], _Space] = {}


def _space(p: int, n: int) -> _Space:
    key = (p, n)
    sp = _SPACES.get(key)
    if sp is None:
        if not is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if n < 1:
            raise ValueError("n >= 1 required")
        sp = _Space(p, n)
        _SPACES[key] = sp
    return sp


@dataclass(frozen=True)
class BallSpec:
    """A closed-ball rectangle: per coordinate, {x : |x - center_i|_p <= p^{-t_i}}.

    Centers are rationals with p-unit denominators; exponents t_i are the
    closed-ball radii exponents (already converted from any strict bound).
    """

    center: tuple[Fraction, ...]
    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.center) != len(self.exponents):
            raise ValueError("center and exponents must have equal length")
        if any(t < 0 for t in self.exponents):
            raise ValueError("radius exponents must be nonnegative")


class ClopenSet:
    """Immutable clopen subset of Z_p^n, canonical by construction."""

    __slots__ = ("p", "n", "depth", "_root", "_sp")

    def __init__(self, p: int, n: int, depth: int, _root: int | None = None):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "_sp", _space(p, n))
        object.__setattr__(self, "_root", EMPTY if _root is None else _root)

    def __setattr__(self, *args):
        raise AttributeError("ClopenSet is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def empty(cls, p: int, n: int, depth: int) -> "ClopenSet":
        return cls(p, n, depth, EMPTY)

    @classmethod
    def full(cls, p: int, n: int, depth: int) -> "ClopenSet":
        return cls(p, n, depth, FULL)

    @classmethod
    def from_rectangles(cls, p: int, n: int, depth: int, rects: Sequence[BallSpec]) -> "ClopenSet":
        out = cls.empty(p, n, depth)
        for r in rects:
            out = out.insert_rectangle(r)
        return out

    # -- algebra -----------------------------------------------------------

    def insert_rectangle(self, rect: BallSpec) -> "ClopenSet":
        if len(rect.center) != self.n:
            raise ValueError(f"rectangle dimension {len(rect.center)} != n={self.n}")
        if max(rect.exponents, default=0) > self.depth:
            raise ValueError(
                f"insufficient depth: rectangle needs level {max(rect.exponents)}, depth is {self.depth}"
            )
        node = self._rectangle_node(rect)
        return ClopenSet(self.p, self.n, self.depth, self._sp.union(self._root, node))

    def _rectangle_node(self, rect: BallSpec) -> int:
        p, n, sp = self.p, self.n, self._sp
        tmax = max(rect.exponents, default=0)
        digits = []
        for c, t in zip(rect.center, rect.exponents):
            if c.denominator % p == 0:
                raise ValueError(f"center {c} is not a p-adic integer for p={p}")
            res = (c.numerator * pow(c.denominator, -1, p**t)) % p**t if t > 0 else 0
            digs = []
            for _ in range(t):
                res, d = divmod(res, p)
                digs.append(d)
            digits.append(digs)
        node = FULL
        for level in range(tmax - 1, -1, -1):
            children = [EMPTY] * sp.width
            slots = [0]
            for i in range(n):
                if level < rect.exponents[i]:
                    slots = [s + digits[i][level] * p**i for s in slots]
                else:
                    slots = [s + d * p**i for s in slots for d in range(p)]
            for s in slots:
                children[s] = node
            node = sp.node(tuple(children))
        return node

    def _binary(self, other: "ClopenSet", fn) -> "ClopenSet":
        if self.p != other.p or self.n != other.n:
            raise ValueError("mismatched p or n")
        return ClopenSet(self.p, self.n, max(self.depth, other.depth), fn(self._root, other._root))

    def union(self, other: "ClopenSet") -> "ClopenSet":
        return self._binary(other, self._sp.union)

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        return self._binary(other, self._sp.intersect)

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        return self._binary(other, lambda a, b: self._sp.intersect(a, self._sp.complement(b)))

    def complement(self) -> "ClopenSet":
        return ClopenSet(self.p, self.n, self.depth, self._sp.complement(self._root))

    # -- queries -----------------------------------------------------------

    def is_empty(self) -> bool:
        return self._root == EMPTY

    def measure(self) -> Fraction:
        return self._sp.measure(self._root)

    def box_count(self, k: int) -> int:
        if k < 0 or k > self.depth:
            raise ValueError(f"level {k} outside [0, depth={self.depth}]")
        return self._sp.box_count(self._root, k)

    def enumerate_cosets(self, k: int) -> list[tuple[int, ...]]:
        """Representatives (one integer mod p^k per coordinate) of level-k cosets meeting the set."""
        if k < 0 or k > self.depth:
            raise ValueError(f"level {k} outside [0, depth={self.depth}]")
        out: list[tuple[int, ...]] = []
        self._collect(self._root, k, 0, (0,) * self.n, out)
        return sorted(out)

    def _collect(self, node: int, k: int, level: int, acc: tuple[int, ...], out: list) -> None:
        if node == EMPTY:
            return
        if level == k:
            out.append(acc)
            return
        p, sp = self.p, self._sp
        scale = p**level
        for v, child in enumerate(sp.children(node)):
            if child == EMPTY:
                continue
            nxt = list(acc)
            rem = v
            for i in range(self.n):
                rem, d = divmod(rem, p)
                nxt[i] += d * scale
            self._collect(child, k, level + 1, tuple(nxt), out)

    def contains_residue(self, point: tuple[int, ...], level: int) -> bool:
        """True iff the coset point + (p^level Z_p)^n is entirely contained in the set."""
        node = self._root
        p = self.p
        coords = list(point)
        for _ in range(level):
            if node == FULL:
                return True
            if node == EMPTY:
                return False
            v = 0
            for i in range(self.n):
                coords[i], d = coords[i] // p, coords[i] % p
                v += d * p**i
            node = self._sp.children(node)[v]
        return node == FULL

    # -- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ClopenSet)
            and self.p == other.p
            and self.n == other.n
            and self._root == other._root
        )

    def __hash__(self) -> int:
        return hash((self.p, self.n, self._root))

    def __repr__(self) -> str:
        return f"ClopenSet(p={self.p}, n={self.n}, depth={self.depth}, measure={self.measure()})"

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        """Deterministic preorder walk: F/E terminals, M plus p^n children."""
        parts: list[str] = []

        def walk(node: int) -> None:
            if node == EMPTY:
                parts.append("E")
            elif node == FULL:
                parts.append("F")
            else:
                parts.append("M")
                for c in self._sp.children(node):
                    walk(c)

        walk(self._root)
        return f"clopen 1 {self.p} {self.n} {self.depth}\n" + "".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "ClopenSet":
        header, body = text.split("\n", 1)
        tag, version, p, n, depth = header.split()
        if tag != "clopen" or version != "1":
            raise ValueError("unrecognized clopen serialization header")
        p, n, depth = int(p), int(n), int(depth)
        sp = _space(p, n)
        pos = 0

        def parse() -> int:
            nonlocal pos
            ch = body[pos]
            pos += 1
            if ch == "E":
                return EMPTY
            if ch == "F":
                return FULL
            if ch == "M":
                return sp.node(tuple(parse() for _ in range(sp.width)))
            raise ValueError(f"bad node tag {ch!r}")

        root = parse()
        if pos != len(body):
            raise ValueError("trailing data in clopen serialization")
        return cls(p, n, depth, root)


def set_algebra(a: ClopenSet, b: ClopenSet | None, op: str) -> ClopenSet:
    """Dispatch form of the set operations; op in {union, intersect, complement, difference}."""
    if op == "complement":
        return a.complement()
    if b is None:
        raise ValueError(f"op {op!r} needs two operands")
    if op == "union":
        return a.union(b)
    if op == "intersect":
        return a.intersect(b)
    if op == "difference":
        return a.difference(b)
    raise ValueError(f"unknown op {op!r}")


def product_set(factors: Sequence[ClopenSet]) -> ClopenSet:
    """Cartesian product of one-dimensional clopen sets as a set in Z_p^n.

    Memoized on factor node-id tuples, so layers with heavy structure sharing
    stay small.
    """
    if not factors:
        raise ValueError("need at least one factor")
    p = factors[0].p
    if any(f.p != p for f in factors) or any(f.n != 1 for f in factors):
        raise ValueError("factors must be one-dimensional sets over a common prime")
    n = len(factors)
    sp1 = _space(p, 1)
    spn = _space(p, n)
    depth = max(f.depth for f in factors)
    memo: dict[tuple[int, ...], int] = {}

    def child1(node: int, digit: int) -> int:
        if node in (EMPTY, FULL):
            return node
        return sp1.children(node)[digit]

    def build(ids: tuple[int, ...]) -> int:
        if any(i == EMPTY for i in ids):
            return EMPTY
        if all(i == FULL for i in ids):
            return FULL
        out = memo.get(ids)
        if out is None:
            children = []
            for v in range(spn.width):
                rem = v
                sub = []
                for _ in range(n):
                    rem, d = divmod(rem, p)
                    sub.append(d)
                children.append(build(tuple(child1(ids[i], sub[i]) for i in range(n))))
            out = spn.node(tuple(children))
            memo[ids] = out
        return out

    return ClopenSet(p, n, depth, build(tuple(f._root for f in factors)))
