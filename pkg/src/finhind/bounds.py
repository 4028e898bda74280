"""The recursive upper bound for Sp(m,p,c) over exact-or-symbolic naturals.

With ``k* = Hind(p+1, c)`` the sequence is

    n_0      = least n with m <= 2**n
    m_i      = 2 ** (n_0 + ... + n_i)
    alpha_i  = 2 ** (k* - i - 1 + n_1 + ... + n_i)
    n_{i+1}  = U(m_i, c ** alpha_i)

and two bounds are reported: ``2 ** n_{k*}`` as stated, and ``m_{k*}``, the
length of the interval the extraction actually colors.

Quantities are plain ``int`` when they fit inside the bit budget and
:class:`Expr` trees otherwise.  U and Hind values come from an
:class:`OracleTable`.
"""

from __future__ import annotations

import decimal
import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import DomainError
from .search import EXACT, InputError, SearchBudget, compute_hind, compute_u

__all__ = [
    "DEFAULT_BITS",
    "Expr",
    "Sum",
    "Pow2",
    "Power",
    "Oracle",
    "Sym",
    "ExtNat",
    "OracleTable",
    "BoundTrace",
    "UnknownOracleError",
    "least_n0",
    "evaluate",
    "spencer_bound",
    "render",
    "render_ext",
    "parse_ext",
    "decimal_str",
    "trace_to_json",
    "load_table",
]

DEFAULT_BITS = 1 << 20


class Expr:
    """Base class of unresolved quantities."""


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True)
class Pow2(Expr):
    exponent: object


@dataclass(frozen=True)
class Power(Expr):
    base: object
    exponent: object


@dataclass(frozen=True)
class Oracle(Expr):
    kind: str  # "U" or "Hind"
    n: object
    c: object


@dataclass(frozen=True)
class Sym(Expr):
    name: str


ExtNat = Union[int, Expr]


class UnknownOracleError(RuntimeError):
    """An exact-search oracle ran out of budget; ``trace`` holds what was computed."""

    def __init__(self, message: str, trace: "BoundTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class OracleTable:
    """Known U / Hind values plus what to do on a miss.

    ``fallback`` is ``"symbolic"`` (leave the leaf unresolved) or
    ``"exact-search"`` (run the search module under ``budget``).
    ``closed_forms`` enables U(1,c) = Hind(1,c) = 1 and U(n,1) = Hind(n,1) = n.
    """

    u: dict = field(default_factory=dict)
    hind: dict = field(default_factory=dict)
    fallback: str = "symbolic"
    budget: SearchBudget = field(default_factory=lambda: SearchBudget(max_k=6, max_nodes=1_000_000))
    closed_forms: bool = False
    misses: set = field(default_factory=set)

    def __post_init__(self):
        if self.fallback not in ("symbolic", "exact-search"):
            raise InputError(f"unknown oracle fallback {self.fallback!r}")
        for table in (self.u, self.hind):
            for (n, c), v in table.items():
                if n < 1 or c < 1 or v < 1:
                    raise InputError("oracle entries must be positive")

    @classmethod
    def exact(cls, budget: Optional[SearchBudget] = None) -> "OracleTable":
        t = cls(fallback="exact-search", closed_forms=True)
        if budget is not None:
            t.budget = budget
        return t

    @classmethod
    def from_json(cls, obj, fallback: str = "symbolic") -> "OracleTable":
        """Parse ``{"u": [[n, c, value], ...], "hind": [...]}``."""
        if not isinstance(obj, dict) or set(obj) - {"u", "hind"}:
            raise InputError('oracle table must be an object with keys "u" and/or "hind"')
        tables = {}
        for key in ("u", "hind"):
            rows = obj.get(key, [])
            if not isinstance(rows, list):
                raise InputError(f"{key!r} must be a list")
            table = {}
            for row in rows:
                if not isinstance(row, list) or len(row) != 3:
                    raise InputError(f"{key!r} rows must be [n, c, value]")
                try:
                    n, c, v = (_nat(x) for x in row)
                except (TypeError, ValueError) as e:
                    raise InputError(f"bad {key!r} row {row!r}") from e
                table[(n, c)] = v
            tables[key] = table
        return cls(u=tables["u"], hind=tables["hind"], fallback=fallback)

    def to_json(self) -> dict:
        return {
            key: [[_jnum(n), _jnum(c), _jnum(v)] for (n, c), v in sorted(table.items())]
            for key, table in (("u", self.u), ("hind", self.hind))
        }

    def lookup(self, kind: str, n: int, c: int, search: bool = False) -> Optional[int]:
        table = self.u if kind == "U" else self.hind
        if (n, c) in table:
            return table[(n, c)]
        if self.closed_forms and (n == 1 or c == 1):
            return 1 if n == 1 else n
        if not (search or self.fallback == "exact-search"):
            return None
        if (kind, n, c) in self.misses:
            return None
        run = compute_u if kind == "U" else compute_hind
        out = run(n, c, self.budget)
        if out.status != EXACT:
            self.misses.add((kind, n, c))
            return None
        table[(n, c)] = out.value
        return out.value


def _nat(x) -> int:
    if isinstance(x, bool):
        raise TypeError("booleans are not naturals")
    if isinstance(x, str):
        if not x.isdigit():
            raise ValueError(x)
        x = int(x)
    if not isinstance(x, int) or x < 0:
        raise ValueError(x)
    return x


def _jnum(x: int):
    return x if x < (1 << 53) else decimal_str(x)


def least_n0(m: int) -> int:
    """Least ``n`` with ``m <= 2**n``."""
    if m < 1:
        raise DomainError(f"least_n0 needs m >= 1, got {m}")
    return (m - 1).bit_length()


def _sum(terms) -> ExtNat:
    const = 0
    rest = []
    for t in terms:
        if isinstance(t, int):
            const += t
        elif isinstance(t, Sum):
            for u in t.terms:
                if isinstance(u, int):
                    const += u
                else:
                    rest.append(u)
        else:
            rest.append(t)
    if not rest:
        return const
    if const:
        rest.insert(0, const)
    return rest[0] if len(rest) == 1 else Sum(tuple(rest))


def evaluate(x: ExtNat, oracles: Optional[OracleTable] = None, bit_budget: int = DEFAULT_BITS) -> ExtNat:
    """Resolve ``x`` as far as the oracles and the bit budget allow.

    Idempotent; unresolvable parts come back as (simplified) expressions.
    """
    if isinstance(x, int):
        return x
    if isinstance(x, Sum):
        return _sum([evaluate(t, oracles, bit_budget) for t in x.terms])
    if isinstance(x, Pow2):
        e = evaluate(x.exponent, oracles, bit_budget)
        if isinstance(e, int) and e <= bit_budget:
            return 1 << e
        return Pow2(e)
    if isinstance(x, Power):
        b = evaluate(x.base, oracles, bit_budget)
        e = evaluate(x.exponent, oracles, bit_budget)
        if b == 1 or e == 0:
            return 1
        if isinstance(b, int) and isinstance(e, int) and e * b.bit_length() <= bit_budget:
            return b ** e
        return Power(b, e)
    if isinstance(x, Oracle):
        n = evaluate(x.n, oracles, bit_budget)
        c = evaluate(x.c, oracles, bit_budget)
        if oracles is not None and isinstance(n, int) and isinstance(c, int):
            v = oracles.lookup(x.kind, n, c)
            if v is not None:
                return v
        return Oracle(x.kind, n, c)
    if isinstance(x, Sym):
        return x
    raise TypeError(f"not an ExtNat: {x!r}")


@dataclass(frozen=True)
class BoundTrace:
    m: int
    p: int
    c: int
    k_star: ExtNat
    n_seq: tuple
    m_seq: tuple
    alpha_seq: tuple
    bound_paper: ExtNat
    bound_operative: ExtNat

    @property
    def exact(self) -> bool:
        vals = (self.k_star, *self.n_seq, *self.m_seq, *self.alpha_seq, self.bound_paper, self.bound_operative)
        return all(isinstance(v, int) for v in vals)


def spencer_bound(
    m: int, p: int, c: int, oracles: Optional[OracleTable] = None, bit_budget: int = DEFAULT_BITS
) -> BoundTrace:
    """Unroll the recursion for ``(m, p, c)``.

    ``k*`` fixes the length of the trace, so it is always looked up with a
    search fallback; if that fails the trace stops at ``n_0`` and the bounds
    are left in terms of symbols.
    """
    if min(m, p, c) < 1:
        raise InputError("m, p, c must be positive")
    if oracles is None:
        oracles = OracleTable()
    strict = oracles.fallback == "exact-search"
    n0 = least_n0(m)
    k_star = oracles.lookup("Hind", p + 1, c, search=True)
    if k_star is None:
        trace = BoundTrace(
            m, p, c, Oracle("Hind", p + 1, c), (n0,), (evaluate(Pow2(n0), oracles, bit_budget),), (),
            Pow2(Sym("n[k*]")), Pow2(Sym("n[0]+...+n[k*]")),
        )
        if strict:
            raise UnknownOracleError(f"Hind({p + 1},{c}) not resolved within budget", trace)
        return trace

    ns: list = [n0]
    ms: list = []
    alphas: list = []

    def partial():
        return BoundTrace(m, p, c, k_star, tuple(ns), tuple(ms), tuple(alphas), Sym("?"), Sym("?"))

    for i in range(k_star):
        ms.append(evaluate(Pow2(_sum(ns)), oracles, bit_budget))
        alphas.append(evaluate(Pow2(_sum([k_star - i - 1, *ns[1:]])), oracles, bit_budget))
        colors = evaluate(Power(c, alphas[i]), oracles, bit_budget)
        nxt = evaluate(Oracle("U", ms[i], colors), oracles, bit_budget)
        if strict and isinstance(nxt, Oracle) and isinstance(nxt.n, int) and isinstance(nxt.c, int):
            ns.append(nxt)
            raise UnknownOracleError(f"U({ms[i]},{colors}) not resolved within budget", partial())
        ns.append(nxt)
    ms.append(evaluate(Pow2(_sum(ns)), oracles, bit_budget))
    return BoundTrace(
        m, p, c, k_star, tuple(ns), tuple(ms), tuple(alphas),
        evaluate(Pow2(ns[-1]), oracles, bit_budget), ms[-1],
    )


# ---------------------------------------------------------------------------
# text form

_DIRECT_DIGITS = 4000


def decimal_str(n: int) -> str:
    # int.__str__ refuses very long outputs; Decimal does not
    if n.bit_length() < _DIRECT_DIGITS * 3:
        return str(n)
    return str(decimal.Decimal(n))


def render_ext(x: ExtNat) -> str:
    """Decimal for exact values, prefix notation otherwise."""
    if isinstance(x, int):
        return decimal_str(x)
    if isinstance(x, Sum):
        return "(+ " + " ".join(render_ext(t) for t in x.terms) + ")"
    if isinstance(x, Pow2):
        return f"(pow2 {render_ext(x.exponent)})"
    if isinstance(x, Power):
        return f"(pow {render_ext(x.base)} {render_ext(x.exponent)})"
    if isinstance(x, Oracle):
        return f"({x.kind} {render_ext(x.n)} {render_ext(x.c)})"
    if isinstance(x, Sym):
        return x.name
    raise TypeError(f"not an ExtNat: {x!r}")


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_ext(text: str) -> ExtNat:
    """Inverse of :func:`render_ext`."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def item():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            head = tokens[pos]
            pos += 1
            args = []
            while tokens[pos] != ")":
                args.append(item())
            pos += 1
            if head == "+":
                return Sum(tuple(args))
            if head == "pow2" and len(args) == 1:
                return Pow2(args[0])
            if head == "pow" and len(args) == 2:
                return Power(*args)
            if head in ("U", "Hind") and len(args) == 2:
                return Oracle(head, *args)
            raise ValueError(f"bad expression head {head!r}")
        if tok == ")":
            raise ValueError("unbalanced parenthesis")
        if tok.isdigit():
            return int(decimal.Decimal(tok)) if len(tok) > _DIRECT_DIGITS else int(tok)
        return Sym(tok)

    out = item()
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return out


def render(trace: BoundTrace) -> str:
    lines = [f"m={trace.m} p={trace.p} c={trace.c}", f"k*={render_ext(trace.k_star)}"]
    lines += [f"n[{i}]={render_ext(v)}" for i, v in enumerate(trace.n_seq)]
    lines += [f"m[{i}]={render_ext(v)}" for i, v in enumerate(trace.m_seq)]
    lines += [f"alpha[{i}]={render_ext(v)}" for i, v in enumerate(trace.alpha_seq)]
    lines.append(f"bound_paper={render_ext(trace.bound_paper)}")
    lines.append(f"bound_operative={render_ext(trace.bound_operative)}")
    return "\n".join(lines) + "\n"


def trace_to_json(trace: BoundTrace) -> dict:
    def enc(x):
        return _jnum(x) if isinstance(x, int) else render_ext(x)

    return {
        "m": trace.m,
        "p": trace.p,
        "c": trace.c,
        "k_star": enc(trace.k_star),
        "n_seq": [enc(x) for x in trace.n_seq],
        "m_seq": [enc(x) for x in trace.m_seq],
        "alpha_seq": [enc(x) for x in trace.alpha_seq],
        "bound_paper": enc(trace.bound_paper),
        "bound_operative": enc(trace.bound_operative),
    }


def load_table(path) -> OracleTable:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read oracle table {path}: {e}") from e
    return OracleTable.from_json(obj)
