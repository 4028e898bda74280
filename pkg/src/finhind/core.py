"""Finite sets, block families, colorings and the exp2 encoding.

Sets of naturals are kept as sorted tuples at the interface and as integer
bitmasks internally (bit ``b`` set iff ``b`` is an element).  Under that
encoding ``exp2(A)`` is literally the mask of ``A``, which the search and
replay code exploits heavily.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

__all__ = [
    "DomainError",
    "FiniteSet",
    "BlockFamily",
    "Coloring",
    "SpencerWitness",
    "UnionWitness",
    "exp2",
    "set_of",
    "precedes",
    "nu",
    "sum_set",
    "color_of",
    "bits",
]


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def bits(mask: int) -> list[int]:
    """Positions of the set bits of ``mask``, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True, order=True)
class FiniteSet:
    elements: tuple[int, ...] = ()

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        for i, x in enumerate(els):
            if not isinstance(x, int) or isinstance(x, bool) or x < 0:
                raise DomainError(f"not a natural number: {x!r}")
            if i and els[i - 1] >= x:
                raise DomainError("elements must be strictly increasing")

    @classmethod
    def of(cls, items: Iterable[int]) -> "FiniteSet":
        return cls(tuple(sorted(set(items))))

    @classmethod
    def from_mask(cls, mask: int) -> "FiniteSet":
        if mask < 0:
            raise DomainError("negative mask")
        return cls(tuple(bits(mask)))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "FiniteSet":
        """The integer interval ``[lo, hi]`` (empty when ``hi < lo``)."""
        return cls(tuple(range(lo, hi + 1)))

    @property
    def mask(self) -> int:
        m = 0
        for x in self.elements:
            m |= 1 << x
        return m

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __bool__(self) -> bool:
        return bool(self.elements)

    def min(self) -> int:
        if not self.elements:
            raise DomainError("min of empty set")
        return self.elements[0]

    def max(self) -> int:
        if not self.elements:
            raise DomainError("max of empty set")
        return self.elements[-1]

    def union(self, *others: "FiniteSet") -> "FiniteSet":
        m = self.mask
        for o in others:
            m |= o.mask
        return FiniteSet.from_mask(m)

    def isdisjoint(self, other: "FiniteSet") -> bool:
        return not (self.mask & other.mask)

    def issubset(self, other: "FiniteSet") -> bool:
        return self.mask & ~other.mask == 0

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.elements)) + "}"


SetLike = Union[FiniteSet, Iterable[int]]


def _as_set(a: SetLike) -> FiniteSet:
    return a if isinstance(a, FiniteSet) else FiniteSet.of(a)


def exp2(a: SetLike) -> int:
    """Return ``sum(2**x for x in a)``; the set must be non-empty."""
    a = _as_set(a)
    if not a:
        raise DomainError("exp2 of the empty set")
    return a.mask


def set_of(n: int) -> FiniteSet:
    """Inverse of :func:`exp2`: the binary digits of ``n``."""
    if n < 1:
        raise DomainError(f"set_of needs n >= 1, got {n}")
    return FiniteSet.from_mask(n)


def precedes(a: SetLike, b: SetLike) -> bool:
    """``max a < min b``."""
    a, b = _as_set(a), _as_set(b)
    if not a or not b:
        raise DomainError("precedes is undefined on empty sets")
    return a.max() < b.min()


@dataclass(frozen=True)
class BlockFamily:
    blocks: tuple[FiniteSet, ...]
    ordered: bool = False

    def __post_init__(self):
        blocks = tuple(_as_set(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = 0
        for i, b in enumerate(blocks):
            if not b:
                raise DomainError("blocks must be non-empty")
            if b.mask & seen:
                raise DomainError("blocks must be pairwise disjoint")
            seen |= b.mask
            if self.ordered and i and not precedes(blocks[i - 1], b):
                raise DomainError(f"block {i - 1} does not precede block {i}")

    def __len__(self) -> int:
        return len(self.blocks)

    def union_of(self, index_mask: int) -> FiniteSet:
        m = 0
        for i in bits(index_mask):
            m |= self.blocks[i].mask
        return FiniteSet.from_mask(m)


def nu(family: Union[BlockFamily, Iterable[SetLike]]) -> frozenset[FiniteSet]:
    """All non-empty unions of the blocks of ``family``."""
    if not isinstance(family, BlockFamily):
        family = BlockFamily(tuple(family))
    masks = [b.mask for b in family.blocks]
    unions = [0]
    for m in masks:
        unions += [u | m for u in unions]
    return frozenset(FiniteSet.from_mask(u) for u in unions[1:])


def sum_set(h: Iterable[int]) -> frozenset[int]:
    """Sums of non-empty subsets of ``h`` (no repetition)."""
    h = list(h)
    if not h:
        raise DomainError("sum_set of an empty set")
    if len(set(h)) != len(h):
        raise DomainError("sum_set needs distinct elements")
    sums = {0}
    for x in h:
        sums |= {s + x for s in sums}
    sums.discard(0)
    return frozenset(sums)


INTERVAL = "interval"
SUBSETS = "subsets"


@dataclass(frozen=True)
class Coloring:
    """A total coloring of ``[k]`` (interval kind) or of ``P+({0..k-1})``.

    ``assign[i - 1]`` is the color of integer ``i`` for the interval kind and
    of bitmask ``i`` for the subsets kind.
    """

    kind: str
    k: int
    colors: int
    assign: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assign", tuple(self.assign))
        if self.kind not in (INTERVAL, SUBSETS):
            raise DomainError(f"unknown coloring kind {self.kind!r}")
        if self.k < 1:
            raise DomainError("k must be positive")
        if self.colors < 1:
            raise DomainError("colors must be positive")
        if len(self.assign) != self.size:
            raise DomainError(
                f"{self.kind} coloring with k={self.k} needs {self.size} cells, got {len(self.assign)}"
            )
        for x in self.assign:
            if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < self.colors:
                raise DomainError(f"color {x!r} out of range for {self.colors} colors")

    @property
    def size(self) -> int:
        return self.k if self.kind == INTERVAL else (1 << self.k) - 1

    def restrict(self, k: int) -> "Coloring":
        """Restriction to ``[k]`` or ``P+({0..k-1})``; both are prefixes of ``assign``."""
        if not 1 <= k <= self.k:
            raise DomainError(f"cannot restrict k={self.k} coloring to k={k}")
        size = k if self.kind == INTERVAL else (1 << k) - 1
        return Coloring(self.kind, k, self.colors, self.assign[:size])

    def renamed(self, perm: tuple[int, ...]) -> "Coloring":
        """Apply the color permutation ``perm`` (old color -> new color)."""
        if sorted(perm) != list(range(self.colors)):
            raise DomainError("perm must be a permutation of the colors")
        return Coloring(self.kind, self.k, self.colors, tuple(perm[x] for x in self.assign))

    @classmethod
    def constant(cls, kind: str, k: int, colors: int = 1, color: int = 0) -> "Coloring":
        size = k if kind == INTERVAL else (1 << k) - 1
        return cls(kind, k, colors, (color,) * size)


def color_of(coloring: Coloring, cell: Union[int, SetLike]) -> int:
    """Color of an integer cell (interval kind) or of a set / bitmask (subsets kind)."""
    if coloring.kind == SUBSETS and not isinstance(cell, int):
        s = _as_set(cell)
        if s and s.max() >= coloring.k:
            raise DomainError(f"{s!r} is not a subset of {{0..{coloring.k - 1}}}")
        cell = s.mask
    elif not isinstance(cell, int):
        raise DomainError("interval colorings are indexed by integers")
    if not 1 <= cell <= coloring.size:
        raise DomainError(f"cell {cell} outside the {coloring.kind} domain of size {coloring.size}")
    return coloring.assign[cell - 1]


@dataclass(frozen=True)
class SpencerWitness:
    """A candidate set ``H`` for the Spencer condition with parameters ``m, p``.

    Only the structural invariant (strictly increasing positive integers) is
    enforced here; :meth:`violation` reports the threshold conditions.
    """

    m: int
    p: int
    H: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "H", tuple(self.H))
        if self.m < 1 or self.p < 1:
            raise DomainError("m and p must be positive")
        if not self.H:
            raise DomainError("H must be non-empty")
        for i, x in enumerate(self.H):
            if x < 1 or (i and self.H[i - 1] >= x):
                raise DomainError("H must be strictly increasing positive integers")

    @property
    def l(self) -> int:
        return len(self.H)

    def violation(self) -> str | None:
        if self.m > self.H[0]:
            return "m <= a_0 violated"
        if self.p > self.l:
            return "p <= l violated"
        if self.H[self.p - 1] > self.l:
            return "a_{p-1} <= l violated"
        return None


@dataclass(frozen=True)
class UnionWitness:
    n: int
    ordered: bool
    d: tuple[FiniteSet, ...]

    def __post_init__(self):
        d = tuple(_as_set(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if len(d) != self.n:
            raise DomainError(f"expected {self.n} supports, got {len(d)}")
        # BlockFamily does the disjoint / ordered validation
        BlockFamily(d, self.ordered)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(x.mask for x in self.d)
