"""Exact small values of Sp(m,p,c), U(n,c) and Hind(n,c) by exhaustive search.

For each candidate ``k`` the colorings of the domain (``[k]`` or the
non-empty subsets of ``{0..k-1}``) are enumerated depth-first, one cell at a
time in increasing order.  A partial coloring is dropped as soon as some
witness is fully colored; since cells are visited in increasing order, only
witnesses whose largest cell is the one just colored need checking.  Colors
are introduced in first-occurrence order, so each coloring is seen once up to
renaming.

U and Hind are computed over the singleton family ``{0},...,{k-1}``: the
map ``F -> union of A_i (i in F)`` carries witnesses between ``P+([k])`` and
any other family ``NU{A_0..A_{k-1}}`` in both directions.
"""

from __future__ import annotations

import atexit
import itertools
import multiprocessing
import os
import threading
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .core import (
    INTERVAL,
    SUBSETS,
    BlockFamily,
    Coloring,
    DomainError,
    FiniteSet,
    SpencerWitness,
    UnionWitness,
    bits,
    nu,
    sum_set,
)

__all__ = [
    "InputError",
    "Problem",
    "SearchBudget",
    "SearchOutcome",
    "BadColoringCertificate",
    "EXACT",
    "UNKNOWN",
    "find_spencer_witness",
    "find_union_witness",
    "find_witness",
    "compute",
    "compute_sp",
    "compute_u",
    "compute_hind",
    "naive_compute",
    "verify_certificate",
    "bad_colorings",
]

EXACT = "exact"
UNKNOWN = "unknown"

# Cells colored before the work is split into independent subtrees.  Fixed so
# that node accounting does not depend on the thread count.
SPLIT_DEPTH = 6
_ABORT_POLL = 1024


class InputError(ValueError):
    """Malformed or mismatched input (wrong coloring kind, bad parameters)."""


@dataclass(frozen=True)
class Problem:
    kind: str
    params: tuple[int, ...]

    def __post_init__(self):
        arity = {"sp": 2, "u": 1, "hind": 1}.get(self.kind)
        if arity is None:
            raise InputError(f"unknown problem kind {self.kind!r}")
        if len(self.params) != arity or any(x < 1 for x in self.params):
            raise InputError(f"{self.kind} needs {arity} positive parameter(s), got {self.params}")

    @classmethod
    def sp(cls, m: int, p: int) -> "Problem":
        return cls("sp", (m, p))

    @classmethod
    def u(cls, n: int) -> "Problem":
        return cls("u", (n,))

    @classmethod
    def hind(cls, n: int) -> "Problem":
        return cls("hind", (n,))

    @property
    def domain(self) -> str:
        return INTERVAL if self.kind == "sp" else SUBSETS

    @property
    def ordered(self) -> bool:
        return self.kind == "hind"

    def size(self, k: int) -> int:
        return k if self.kind == "sp" else (1 << k) - 1

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.params))})"


@dataclass(frozen=True)
class SearchBudget:
    max_k: int = 64
    max_nodes: int = 10_000_000
    threads: int = 1

    def __post_init__(self):
        if self.max_k < 1 or self.max_nodes < 1 or self.threads < 1:
            raise InputError("budget fields must be positive")


@dataclass(frozen=True)
class BadColoringCertificate:
    problem: Problem
    coloring: Coloring


@dataclass(frozen=True)
class SearchOutcome:
    """``value`` is the exact number, or for ``unknown`` a proven lower bound."""

    problem: Problem
    colors: int
    status: str
    value: int
    lower_certificate: Optional[Coloring] = None
    nodes_explored: int = 0

    @property
    def exact(self) -> bool:
        return self.status == EXACT

    def certificate(self) -> Optional[BadColoringCertificate]:
        if self.lower_certificate is None:
            return None
        return BadColoringCertificate(self.problem, self.lower_certificate)

    def __str__(self) -> str:
        return f"exact {self.value}" if self.exact else f"unknown >= {self.value}"


# ---------------------------------------------------------------------------
# witness search on a complete coloring


def _require(coloring: Coloring, kind: str) -> None:
    if coloring.kind != kind:
        raise InputError(f"expected a {kind} coloring, got {coloring.kind}")


def find_spencer_witness(coloring: Coloring, m: int, p: int) -> Optional[SpencerWitness]:
    """Smallest-``l``, then lexicographically least ``H`` with monochromatic sum-set in ``[k]``."""
    _require(coloring, INTERVAL)
    if m < 1 or p < 1:
        raise InputError("m and p must be positive")
    k, assign = coloring.k, coloring.assign
    classes: dict[int, int] = {}
    for i, col in enumerate(assign, 1):
        classes[col] = classes.get(col, 0) | (1 << i)

    def extend(chosen, s, fs, cm, length):
        i = len(chosen)
        if i == length:
            h = tuple(chosen)
            if h[p - 1] <= length:
                return h
            return None
        r = length - i
        lo = chosen[-1] + 1 if chosen else m
        for a in range(lo, k + 1):
            # a, a+1, ..., a+r-1 is the cheapest completion
            if s + r * a + r * (r - 1) // 2 > k:
                break
            if i == p - 1 and a > length:
                break
            if not (cm >> a) & 1:
                continue
            fs2 = fs | (fs << a) | (1 << a)
            if fs2 & ~cm:
                continue
            found = extend(chosen + [a], s + a, fs2, cm, length)
            if found:
                return found
        return None

    length = 1
    while length * m + length * (length - 1) // 2 <= k:
        if length >= p:
            best = None
            for cm in classes.values():
                h = extend([], 0, 0, cm, length)
                if h and (best is None or h < best):
                    best = h
            if best:
                return SpencerWitness(m, p, best)
        length += 1
    return None


def find_union_witness(coloring: Coloring, n: int, ordered: bool) -> Optional[UnionWitness]:
    """``n`` disjoint (ordered, if asked) supports whose unions share one color.

    Supports are returned with increasing masks; the first hit in increasing
    lexicographic order of the mask tuple is returned.
    """
    _require(coloring, SUBSETS)
    if n < 1:
        raise InputError("n must be positive")
    full = (1 << coloring.k) - 1
    assign = coloring.assign

    def extend(ds, used, cells, col):
        if len(ds) == n:
            return ds
        need = n - len(ds)
        if ordered:
            free = full & ~((1 << used.bit_length()) - 1)
        else:
            free = full & ~used
        if bin(free).count("1") < need:
            return None
        start = ds[-1] + 1
        # masks are increasing, so the next one is a non-empty subset of
        # ``free`` larger than the previous mask
        for d in range(start, full + 1):
            if d & ~free:
                continue
            if assign[d - 1] != col:
                continue
            new = [d] + [c | d for c in cells]
            if any(assign[x - 1] != col for x in new[1:]):
                continue
            got = extend(ds + [d], used | d, cells + new, col)
            if got:
                return got
        return None

    for d0 in range(1, full + 1):
        got = extend([d0], d0, [d0], assign[d0 - 1])
        if got:
            return UnionWitness(n, ordered, tuple(FiniteSet.from_mask(x) for x in got))
    return None


def find_witness(problem: Problem, coloring: Coloring):
    if problem.kind == "sp":
        return find_spencer_witness(coloring, *problem.params)
    return find_union_witness(coloring, problem.params[0], problem.ordered)


def verify_certificate(cert: BadColoringCertificate) -> bool:
    """True iff exhaustive witness search over the certificate's coloring finds nothing."""
    if not isinstance(cert, BadColoringCertificate):
        raise InputError("not a certificate")
    if cert.coloring.kind != cert.problem.domain:
        raise InputError(f"{cert.problem} certificates need a {cert.problem.domain} coloring")
    return find_witness(cert.problem, cert.coloring) is None


# ---------------------------------------------------------------------------
# per-level pruning tables


class _SpencerLevel:
    """Witnesses with sum ``t`` checked lazily against the color class of ``t``.

    Only witnesses with exactly ``max(p, a_{p-1})`` elements are looked for:
    dropping tail elements of any witness keeps it a witness, so these exist
    inside a prefix whenever any witness does.
    """

    def __init__(self, k: int, m: int, p: int):
        self.size = k
        self.m = m
        self.p = p

    def completes(self, t: int, cm: int) -> bool:
        m, p = self.m, self.p

        def rec(last, s, fs, n_el, need):
            lo = last + 1 if n_el else m
            for a in range(lo, t - s + 1):
                s2 = s + a
                n2 = n_el + 1
                need2 = need if need is not None else (max(p, a) if n2 == p else None)
                r = (need2 if need2 is not None else p) - n2
                if s2 + r * a + r * (r + 1) // 2 > t:
                    break
                if not (cm >> a) & 1:
                    continue
                fs2 = fs | (fs << a) | (1 << a)
                if fs2 & ~cm:
                    continue
                if r == 0:
                    if s2 == t:
                        return True
                    continue
                if rec(a, s2, fs2, n2, need2):
                    return True
            return False

        return rec(0, 0, 0, 0, None)


def _set_partitions(elems: list[int], n: int) -> Iterator[list[int]]:
    """Partitions of ``elems`` into exactly ``n`` blocks, as lists of masks."""
    blocks: list[int] = []

    def rec(i):
        left = len(elems) - i
        if len(blocks) + left < n:
            return
        if i == len(elems):
            if len(blocks) == n:
                yield list(blocks)
            return
        bit = 1 << elems[i]
        for j in range(len(blocks)):
            blocks[j] |= bit
            yield from rec(i + 1)
            blocks[j] ^= bit
        if len(blocks) < n:
            blocks.append(bit)
            yield from rec(i + 1)
            blocks.pop()

    yield from rec(0)


def _runs(elems: list[int], n: int) -> Iterator[list[int]]:
    """Splits of sorted ``elems`` into ``n`` consecutive non-empty runs."""
    for cuts in itertools.combinations(range(1, len(elems)), n - 1):
        edges = (0,) + cuts + (len(elems),)
        out = []
        for a, b in zip(edges, edges[1:]):
            mk = 0
            for x in elems[a:b]:
                mk |= 1 << x
            out.append(mk)
        yield out


class _UnionLevel:
    """For each cell ``t``: masks (over cell indices) of the other unions of
    every witness whose overall union is ``t``."""

    def __init__(self, k: int, n: int, ordered: bool):
        self.size = (1 << k) - 1
        split = _runs if ordered else _set_partitions
        self.patterns: list[list[int]] = [[] for _ in range(self.size + 1)]
        for t in range(1, self.size + 1):
            els = bits(t)
            if len(els) < n:
                continue
            for blocks in split(els, n):
                unions = [0]
                for b in blocks:
                    unions += [u | b for u in unions]
                pm = 0
                for u in unions[1:]:
                    if u != t:
                        pm |= 1 << u
                self.patterns[t].append(pm)

    def completes(self, t: int, cm: int) -> bool:
        for pm in self.patterns[t]:
            if pm & ~cm == 0:
                return True
        return False


@lru_cache(maxsize=64)
def _level(problem: Problem, k: int):
    if problem.kind == "sp":
        return _SpencerLevel(k, *problem.params)
    return _UnionLevel(k, problem.params[0], problem.ordered)


# ---------------------------------------------------------------------------
# depth-first enumeration


class _Capped(Exception):
    pass


class _Aborted(Exception):
    pass


def _walk(level, c: int, prefix: tuple[int, ...], stop: int, cap: int, on_leaf, abort=None):
    """Extend ``prefix`` to witness-free canonical colorings of cells ``1..stop``.

    ``on_leaf`` receives each such coloring and returns True to stop.
    Returns ``(stopped, nodes)``; raises ``_Capped`` past ``cap`` nodes.
    """
    # canonical colorings never use more colors than cells
    c = min(c, level.size)
    colmask = [0] * c
    for i, col in enumerate(prefix, 1):
        colmask[col] |= 1 << i
    assign = list(prefix)
    nodes = 0
    completes = level.completes

    def rec(t, used):
        nonlocal nodes
        if t > stop:
            return on_leaf(tuple(assign))
        for col in range(min(c, used + 1)):
            nodes += 1
            if nodes > cap:
                raise _Capped
            if abort is not None and nodes % _ABORT_POLL == 0 and abort():
                raise _Aborted
            cm = colmask[col] | (1 << t)
            if completes(t, cm):
                continue
            colmask[col] = cm
            assign.append(col)
            done = rec(t + 1, max(used, col + 1))
            assign.pop()
            colmask[col] ^= 1 << t
            if done:
                return True
        return False

    stopped = rec(len(prefix) + 1, (max(prefix) + 1) if prefix else 0)
    return stopped, nodes


def _subtree(level, c, prefix, cap, abort=None):
    """Search below ``prefix``; returns ``(coloring or None, nodes, capped)``."""
    hit = []

    def leaf(a):
        hit.append(a)
        return True

    try:
        _, nodes = _walk(level, c, prefix, level.size, cap, leaf, abort)
    except _Capped:
        return None, cap + 1, True
    return (hit[0] if hit else None), nodes, False


def _run_chunk(level, c, chunk, first_index, cap, abort=None, report=None):
    results = []
    for offset, prefix in enumerate(chunk):
        res = _subtree(level, c, prefix, cap, abort)
        results.append(res)
        if res[0] is not None:
            if report:
                report(first_index + offset)
            break
        if res[2]:
            break
    return results


# worker-side state for the process pool
_SIGNAL = None


def _init_worker(signal):
    global _SIGNAL
    _SIGNAL = signal


def _worker(problem, c, k, chunk, first_index, cap, token):
    level = _level(problem, k)
    sig = _SIGNAL

    def abort():
        return sig[0] != token or sig[1] < first_index

    def report(idx):
        with sig.get_lock():
            if sig[0] == token and idx < sig[1]:
                sig[1] = idx

    try:
        return _run_chunk(level, c, chunk, first_index, cap, abort, report)
    except _Aborted:
        return None


class _Pool:
    def __init__(self, workers: int):
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else "spawn")
        self.signal = ctx.Array("q", 2)
        self.executor = ProcessPoolExecutor(
            workers, mp_context=ctx, initializer=_init_worker, initargs=(self.signal,)
        )
        self.lock = threading.Lock()
        self.token = 0
        self.pid = os.getpid()


_POOLS: dict[int, _Pool] = {}
_POOLS_LOCK = threading.Lock()


def _pool(workers: int) -> _Pool:
    with _POOLS_LOCK:
        pool = _POOLS.get(workers)
        if pool is None or pool.pid != os.getpid():
            pool = _Pool(workers)
            _POOLS[workers] = pool
        return pool


@atexit.register
def _shutdown_pools():
    for pool in _POOLS.values():
        pool.executor.shutdown(wait=False, cancel_futures=True)


def _fold(chunks_results, prefix_nodes, cap):
    """Combine subtree results in subtree order, as a sequential run would."""
    used = prefix_nodes
    for results in chunks_results:
        for found, n, capped in results:
            if capped or used + n > cap:
                return None, cap, True
            used += n
            if found is not None:
                return found, used, False
    return None, used, False


def _search_level(problem: Problem, c: int, k: int, cap: int, threads: int):
    """Find the first bad coloring at ``k``; returns ``(coloring, nodes, capped)``."""
    level = _level(problem, k)
    depth = min(level.size, SPLIT_DEPTH)
    prefixes: list[tuple[int, ...]] = []

    def keep(a):
        prefixes.append(a)
        return False

    try:
        _, pnodes = _walk(level, c, (), depth, cap, keep)
    except _Capped:
        return None, cap, True
    if depth == level.size:
        return (prefixes[0] if prefixes else None), pnodes, False
    sub_cap = cap - pnodes
    if threads == 1 or len(prefixes) <= 1:
        def lazy():
            for i, pre in enumerate(prefixes):
                yield _run_chunk(level, c, [pre], i, sub_cap)
        return _fold(lazy(), pnodes, cap)

    size = -(-len(prefixes) // threads)
    chunks = [prefixes[i:i + size] for i in range(0, len(prefixes), size)]
    pool = _pool(threads)
    with pool.lock:
        pool.token += 1
        token = pool.token
        with pool.signal.get_lock():
            pool.signal[0] = token
            pool.signal[1] = len(prefixes)
        futures = [
            pool.executor.submit(_worker, problem, c, k, ch, i * size, sub_cap, token)
            for i, ch in enumerate(chunks)
        ]

        def ordered():
            for f in futures:
                res = f.result()
                # an aborted chunk lies past a found subtree, so the fold
                # has already stopped before reaching it
                yield res if res is not None else []

        try:
            return _fold(ordered(), pnodes, cap)
        finally:
            with pool.signal.get_lock():
                pool.signal[0] = -token
            for f in futures:
                f.cancel()


def compute(problem: Problem, c: int, budget: SearchBudget = SearchBudget()) -> SearchOutcome:
    """Least ``k`` such that every ``c``-coloring of the ``k``-domain has a witness."""
    if c < 1:
        raise InputError("c must be positive")
    used = 0
    last_bad: Optional[Coloring] = None
    for k in range(1, budget.max_k + 1):
        found, nodes, capped = _search_level(problem, c, k, budget.max_nodes - used, budget.threads)
        if capped:
            return SearchOutcome(problem, c, UNKNOWN, k, last_bad, budget.max_nodes)
        used += nodes
        if found is None:
            return SearchOutcome(problem, c, EXACT, k, last_bad, used)
        last_bad = Coloring(problem.domain, k, c, found)
    return SearchOutcome(problem, c, UNKNOWN, budget.max_k + 1, last_bad, used)


def compute_sp(m: int, p: int, c: int, budget: SearchBudget = SearchBudget()) -> SearchOutcome:
    return compute(Problem.sp(m, p), c, budget)


def compute_u(n: int, c: int, budget: SearchBudget = SearchBudget(max_k=6)) -> SearchOutcome:
    return compute(Problem.u(n), c, budget)


def compute_hind(n: int, c: int, budget: SearchBudget = SearchBudget(max_k=6)) -> SearchOutcome:
    return compute(Problem.hind(n), c, budget)


def bad_colorings(problem: Problem, c: int, k: int, limit: Optional[int] = None) -> Iterator[Coloring]:
    """Canonical bad colorings at ``k`` in search order (first-occurrence colors)."""
    level = _level(problem, k)
    out: list[tuple[int, ...]] = []

    def leaf(a):
        out.append(a)
        return limit is not None and len(out) >= limit

    _walk(level, c, (), level.size, float("inf"), leaf)
    for a in out:
        yield Coloring(problem.domain, k, c, a)


# ---------------------------------------------------------------------------
# brute-force oracle


def _naive_has_witness(problem: Problem, coloring: Coloring) -> bool:
    k, assign = coloring.k, coloring.assign
    if problem.kind == "sp":
        m, p = problem.params
        for length in range(1, k + 1):
            if length * (length + 1) // 2 > k:
                break
            for h in itertools.combinations(range(1, k + 1), length):
                if sum(h) > k:
                    continue
                if h[0] < m or length < p or h[p - 1] > length:
                    continue
                if len({assign[s - 1] for s in sum_set(h)}) == 1:
                    return True
        return False
    n = problem.params[0]
    cells = [FiniteSet.from_mask(x) for x in range(1, 1 << k)]
    for ds in itertools.combinations(cells, n):
        try:
            fam = BlockFamily(ds, problem.ordered)
        except DomainError:
            continue
        if len({assign[u.mask - 1] for u in nu(fam)}) == 1:
            return True
    return False


def naive_compute(
    problem: Problem,
    c: int,
    k_max: int,
    max_colorings: Optional[int] = None,
    time_limit: Optional[float] = None,
) -> SearchOutcome:
    """Same contract as :func:`compute`, by enumerating every coloring outright."""
    start = time.monotonic()
    seen = 0
    last_bad: Optional[Coloring] = None
    for k in range(1, k_max + 1):
        bad = None
        for assign in itertools.product(range(c), repeat=problem.size(k)):
            seen += 1
            over_count = max_colorings is not None and seen > max_colorings
            over_time = time_limit is not None and time.monotonic() - start > time_limit
            if over_count or over_time:
                return SearchOutcome(problem, c, UNKNOWN, k, last_bad, seen - 1)
            col = Coloring(problem.domain, k, c, assign)
            if not _naive_has_witness(problem, col):
                bad = col
                break
        if bad is None:
            return SearchOutcome(problem, c, EXACT, k, last_bad, seen)
        last_bad = bad
    return SearchOutcome(problem, c, UNKNOWN, k_max + 1, last_bad, seen)
