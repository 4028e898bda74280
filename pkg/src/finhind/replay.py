"""Constructive extraction of a Spencer witness from a coloring.

Given ``n_0..n_{k*}`` the positions ``n_0 .. n_0+...+n_{k*}-1`` are cut into
consecutive intervals ``S_0 < ... < S_{k*-1}``.  A set ``A`` of positions is
colored by the color of the integer ``exp2(A)`` (the "star" coloring).  Going
down from the top level, each ``S_i`` gets rows ``w_{i,0..m_i-1}`` whose
non-empty unions all share one fingerprint: the vector of star colors of
``A | u | w_{j,0} (j in B)`` over every ``A`` below ``S_i`` and every set
``B`` of higher levels.  An ordered finite-unions witness on the first rows
then gives ``v_0 < ... < v_p``, and ``v_p`` is widened along its rows to
``v_{p+1}, ...``.  The answer is ``H = {exp2(v_i)}``.

Positions are handled as bitmasks throughout, so ``exp2(A)`` is just the
mask of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .bounds import OracleTable, spencer_bound
from .core import INTERVAL, SUBSETS, Coloring, FiniteSet, SpencerWitness, bits, sum_set
from .search import InputError, SearchBudget, find_union_witness

__all__ = [
    "InfeasibleError",
    "ConstructionError",
    "StateError",
    "IntervalLayout",
    "RowSelection",
    "BlockDecomposition",
    "Transcript",
    "build_layout",
    "induced_colorstar",
    "fingerprint",
    "fingerprint_classes",
    "select_rows",
    "hindman_select",
    "assemble_witness",
    "verify_spencer",
    "audit_row_equivalence",
    "extract",
]


class InfeasibleError(RuntimeError):
    """The supplied parameters are too small for the construction to go through."""


class ConstructionError(AssertionError):
    """An internal invariant of the construction failed."""


class StateError(RuntimeError):
    """An operation was called before the rows it depends on were chosen."""


@dataclass(frozen=True)
class IntervalLayout:
    n_seq: tuple[int, ...]
    intervals: tuple[FiniteSet, ...]
    s_star: FiniteSet

    @property
    def k_star(self) -> int:
        return len(self.intervals)

    def m(self, i: int) -> int:
        """Row count at level ``i``: ``2 ** (n_0 + ... + n_i)``."""
        return 1 << sum(self.n_seq[: i + 1])

    def alpha(self, i: int) -> int:
        return 1 << (self.k_star - i - 1 + sum(self.n_seq[1 : i + 1]))


@dataclass
class RowSelection:
    rows: dict[int, tuple[FiniteSet, ...]] = field(default_factory=dict)

    def check_separation(self) -> None:
        levels = sorted(self.rows)
        for lo, hi in zip(levels, levels[1:]):
            top = max(w.max() for w in self.rows[lo])
            bottom = min(w.min() for w in self.rows[hi])
            if not top < bottom:
                raise ConstructionError(f"rows at levels {lo} and {hi} are not separated")


@dataclass(frozen=True)
class BlockDecomposition:
    levels: tuple[int, ...]
    l_star: int


@dataclass
class Transcript:
    m: int
    p: int
    c: int
    layout: Optional[IntervalLayout] = None
    class_counts: dict[int, int] = field(default_factory=dict)
    alphas: dict[int, int] = field(default_factory=dict)
    rows: RowSelection = field(default_factory=RowSelection)
    v: tuple[FiniteSet, ...] = ()
    hindman_levels: tuple[tuple[int, ...], ...] = ()
    decomposition: Optional[BlockDecomposition] = None
    witness: Optional[SpencerWitness] = None
    audit: Optional[bool] = None


def build_layout(m: int, p: int, c: int, n_seq, k_star: Optional[int] = None) -> IntervalLayout:
    n_seq = tuple(n_seq)
    if k_star is not None and len(n_seq) != k_star + 1:
        raise InputError(f"n_seq needs {k_star + 1} entries, got {len(n_seq)}")
    if len(n_seq) < 2:
        raise InputError("n_seq needs at least two entries")
    if any(not isinstance(x, int) or x < 0 for x in n_seq):
        raise InputError("n_seq entries must be exact naturals")
    if any(x == 0 for x in n_seq[1:]):
        raise InputError("n_1, n_2, ... must be positive (intervals are non-empty)")
    if m > 1 << n_seq[0]:
        raise InputError(f"n_0={n_seq[0]} is too small for m={m}")
    starts = [n_seq[0]]
    for x in n_seq[1:]:
        starts.append(starts[-1] + x)
    intervals = tuple(FiniteSet.interval(a, b - 1) for a, b in zip(starts, starts[1:]))
    return IntervalLayout(n_seq, intervals, FiniteSet.interval(starts[0], starts[-1] - 1))


def induced_colorstar(coloring: Coloring, layout: IntervalLayout) -> Callable[[int], int]:
    """Star coloring on masks of subsets of ``s_star``: the color of ``exp2(A)``."""
    if coloring.kind != INTERVAL:
        raise InputError("the star coloring needs an interval coloring")
    need = layout.s_star.mask
    if coloring.k < need:
        raise InputError(f"interval [{coloring.k}] is too short: exp2(S*) = {need}")
    assign = coloring.assign

    def colorstar(a) -> int:
        mask = a if isinstance(a, int) else a.mask
        if mask < 1 or mask & ~need:
            raise InputError(f"{FiniteSet.from_mask(mask)!r} is not a non-empty subset of S*")
        return assign[mask - 1]

    return colorstar


def _contexts(level: int, layout: IntervalLayout, rows: RowSelection) -> list[int]:
    """All ``A | union(w_{j,0} for j in B)`` in A-major, B-minor order."""
    k_star = layout.k_star
    higher = []
    for j in range(level + 1, k_star):
        if j not in rows.rows:
            raise StateError(f"row w_{{{j},0}} is needed before level {level}")
        higher.append(rows.rows[j][0].mask)
    b_unions = [0]
    for w in higher:
        b_unions += [u | w for u in b_unions]
    base = layout.n_seq[0]
    width = sum(layout.n_seq[1 : level + 1])
    return [(a << base) | b for a in range(1 << width) for b in b_unions]


def fingerprint(u, level: int, layout: IntervalLayout, rows: RowSelection, colorstar) -> tuple[int, ...]:
    umask = u if isinstance(u, int) else u.mask
    if not umask or umask & ~layout.intervals[level].mask:
        raise InputError(f"{FiniteSet.from_mask(umask)!r} is not a non-empty subset of S_{level}")
    return tuple(colorstar(x | umask) for x in _contexts(level, layout, rows))


def fingerprint_classes(level: int, layout: IntervalLayout, rows: RowSelection, colorstar) -> Coloring:
    """Fingerprint coloring of ``P+(S_level)`` as a subsets coloring.

    Block ``b`` is the ``b``-th element of ``S_level``; classes are numbered
    in order of first appearance.
    """
    contexts = _contexts(level, layout, rows)
    start = layout.intervals[level].min()
    size = len(layout.intervals[level])
    classes: dict[tuple, int] = {}
    assign = []
    for t in range(1, 1 << size):
        umask = t << start
        vec = tuple(colorstar(x | umask) for x in contexts)
        assign.append(classes.setdefault(vec, len(classes)))
    return Coloring(SUBSETS, size, len(classes), tuple(assign))


def _within(count: int, c: int, alpha: int) -> bool:
    """``count <= c ** alpha`` without building huge powers."""
    if c == 1:
        return count <= 1
    if alpha >= count.bit_length():
        return True
    return count <= c ** alpha


def select_rows(layout: IntervalLayout, colorstar, level: int, count: int, rows: RowSelection,
                classes: Optional[Coloring] = None) -> tuple[FiniteSet, ...]:
    if classes is None:
        classes = fingerprint_classes(level, layout, rows, colorstar)
    found = find_union_witness(classes, count, ordered=False)
    if found is None:
        raise InfeasibleError(
            f"no {count} rows in S_{level} (size {len(layout.intervals[level])}) with a "
            "single fingerprint class: construction infeasible with supplied parameters"
        )
    start = layout.intervals[level].min()
    return tuple(FiniteSet.from_mask(d.mask << start) for d in found.d)


def hindman_select(colorstar, first_rows, p: int):
    """``v_0 < ... < v_p`` in NU of the first rows, star-monochromatic.

    Returns the v's and, for each, the levels whose rows it is made of.
    """
    first_rows = list(first_rows)
    k = len(first_rows)
    if p + 1 > k:
        raise InfeasibleError(f"need {p + 1} ordered blocks but only {k} levels")
    masks = [w.mask for w in first_rows]
    assign = []
    for f in range(1, 1 << k):
        u = 0
        for i in bits(f):
            u |= masks[i]
        assign.append(colorstar(u))
    found = find_union_witness(Coloring(SUBSETS, k, max(assign) + 1, tuple(assign)), p + 1, ordered=True)
    if found is None:
        raise InfeasibleError(f"no ordered {p + 1}-block witness among {k} levels")
    vs, levels = [], []
    for d in found.d:
        u = 0
        for i in d:
            u |= masks[i]
        vs.append(FiniteSet.from_mask(u))
        levels.append(tuple(d))
    return tuple(vs), tuple(levels)


def _decompose(v: FiniteSet, rows: RowSelection) -> tuple[int, ...]:
    levels = tuple(i for i in sorted(rows.rows) if rows.rows[i][0].mask & v.mask)
    rebuilt = 0
    for i in levels:
        rebuilt |= rows.rows[i][0].mask
    if rebuilt != v.mask:
        raise ConstructionError(f"{v!r} is not a union of first rows")
    return levels


def assemble_witness(vs, rows: RowSelection, layout: IntervalLayout, m: int, p: int):
    """Widen ``v_p`` along its rows and read off ``H``.

    Returns ``(witness, all v's in construction order, decomposition)``.
    """
    vs = list(vs)
    if len(vs) != p + 1:
        raise ConstructionError(f"expected {p + 1} blocks, got {len(vs)}")
    levels = _decompose(vs[p], rows)
    l_star = layout.m(levels[0])
    for s in range(1, l_star):
        u = 0
        for e in levels:
            u |= rows.rows[e][s].mask
        vs.append(FiniteSet.from_mask(u))
    seen = 0
    for v in vs:
        if v.mask & seen:
            raise ConstructionError("v's are not pairwise disjoint")
        seen |= v.mask
    a = [v.mask for v in vs]
    if not a[0] >= 1 << layout.n_seq[0] >= m:
        raise ConstructionError(f"a_0 = {a[0]} below 2^n_0 or m")
    if not a[p - 1] <= l_star <= len(a):
        raise ConstructionError(f"a_(p-1) = {a[p - 1]} exceeds l* = {l_star}")
    if list(a[:p]) != sorted(a[:p]) or any(a[p - 1] >= x for x in a[p:]):
        raise ConstructionError("head of H is out of order")
    return SpencerWitness(m, p, tuple(sorted(a))), tuple(vs), BlockDecomposition(levels, l_star)


def verify_spencer(coloring: Coloring, witness: SpencerWitness) -> tuple[bool, Optional[str]]:
    """Check ``witness`` against ``coloring``; the report names the first violation."""
    bad = witness.violation()
    if bad:
        return False, bad
    if coloring.kind != INTERVAL:
        return False, "coloring is not an interval coloring"
    total = sum(witness.H)
    if total > coloring.k:
        return False, f"sum {total} outside [k]"
    sums = sorted(sum_set(witness.H))
    first = coloring.assign[sums[0] - 1]
    for s in sums:
        if coloring.assign[s - 1] != first:
            return False, f"sum-set not monochromatic: {sums[0]} and {s} differ"
    return True, None


def audit_row_equivalence(rows: RowSelection, colorstar, layout: IntervalLayout) -> bool:
    """Every non-empty union of a level's rows has the fingerprint of its first row."""
    for level, ws in rows.rows.items():
        contexts = _contexts(level, layout, rows)
        ref = None
        unions = [0]
        for w in ws:
            unions += [u | w.mask for u in unions]
        for u in unions[1:]:
            vec = tuple(colorstar(x | u) for x in contexts)
            if ref is None:
                ref = vec
            elif vec != ref:
                return False
    return True


def extract(
    m: int,
    p: int,
    c: int,
    coloring: Coloring,
    oracles: Optional[OracleTable] = None,
    budget: Optional[SearchBudget] = None,
    n_seq=None,
) -> tuple[SpencerWitness, Transcript]:
    """Run the whole construction; the witness returned has been verified."""
    if coloring.kind != INTERVAL:
        raise InputError("extract needs an interval coloring")
    if coloring.colors > c:
        raise InputError(f"coloring uses {coloring.colors} colors, more than c={c}")
    if n_seq is None:
        trace = spencer_bound(m, p, c, oracles or OracleTable.exact(budget))
        if not trace.exact:
            raise InputError("the recursion does not resolve to exact values; supply n_seq")
        n_seq = trace.n_seq
    layout = build_layout(m, p, c, n_seq)
    operative = 1 << sum(layout.n_seq)
    if coloring.k < operative:
        raise InputError(f"interval [{coloring.k}] is too short: need [{operative}]")
    colorstar = induced_colorstar(coloring, layout)
    tr = Transcript(m, p, c, layout)

    for i in reversed(range(layout.k_star)):
        classes = fingerprint_classes(i, layout, tr.rows, colorstar)
        tr.class_counts[i] = classes.colors
        tr.alphas[i] = layout.alpha(i)
        if not _within(classes.colors, c, layout.alpha(i)):
            raise ConstructionError(f"level {i}: {classes.colors} fingerprint classes exceed c^alpha")
        tr.rows.rows[i] = select_rows(layout, colorstar, i, layout.m(i), tr.rows, classes)
    tr.rows.check_separation()

    first = [tr.rows.rows[i][0] for i in range(layout.k_star)]
    head, tr.hindman_levels = hindman_select(colorstar, first, p)
    witness, tr.v, tr.decomposition = assemble_witness(head, tr.rows, layout, m, p)
    ok, why = verify_spencer(coloring, witness)
    if not ok:
        raise ConstructionError(f"extracted witness fails verification: {why}")
    tr.audit = audit_row_equivalence(tr.rows, colorstar, layout)
    if not tr.audit:
        raise ConstructionError("row equivalence audit failed")
    tr.witness = witness
    return witness, tr
