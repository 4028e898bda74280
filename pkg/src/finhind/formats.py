"""JSON forms of colorings, witnesses, certificates and transcripts.

Integers at or above 2**53 are written as decimal strings so that any JSON
reader can audit them; readers accept both forms.
"""

from __future__ import annotations

import json
from typing import Any

from .bounds import decimal_str
from .core import Coloring, DomainError, FiniteSet, SpencerWitness, UnionWitness
from .replay import Transcript
from .search import BadColoringCertificate, InputError, Problem, SearchOutcome

SAFE = 1 << 53


def num(x: int):
    return x if x < SAFE else decimal_str(x)


def _int(x, what: str) -> int:
    if isinstance(x, bool):
        raise InputError(f"{what}: expected an integer")
    if isinstance(x, str) and x.isdigit():
        return int(x)
    if not isinstance(x, int):
        raise InputError(f"{what}: expected an integer, got {x!r}")
    return x


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def coloring_to_json(col: Coloring) -> dict:
    return {"kind": col.kind, "k": col.k, "colors": num(col.colors), "assign": list(col.assign)}


def coloring_from_json(obj) -> Coloring:
    if not isinstance(obj, dict):
        raise InputError("coloring must be a JSON object")
    try:
        kind = obj["kind"]
        k = _int(obj["k"], "k")
        colors = _int(obj["colors"], "colors")
        assign = obj["assign"]
    except KeyError as e:
        raise InputError(f"coloring is missing {e}") from e
    if not isinstance(assign, list):
        raise InputError("assign must be a list")
    try:
        return Coloring(kind, k, colors, tuple(_int(x, "assign") for x in assign))
    except DomainError as e:
        raise InputError(str(e)) from e


def witness_to_json(w) -> dict:
    if isinstance(w, SpencerWitness):
        return {"kind": "spencer", "m": w.m, "p": w.p, "H": [num(x) for x in w.H]}
    return {"kind": "union", "ordered": w.ordered, "n": w.n, "d": [list(d) for d in w.d]}


def witness_from_json(obj):
    if not isinstance(obj, dict):
        raise InputError("witness must be a JSON object")
    try:
        if obj.get("kind") == "spencer":
            return SpencerWitness(
                _int(obj["m"], "m"), _int(obj["p"], "p"), tuple(_int(x, "H") for x in obj["H"])
            )
        if obj.get("kind") == "union":
            if not isinstance(obj["ordered"], bool):
                raise InputError("ordered must be a boolean")
            d = tuple(FiniteSet(tuple(_int(x, "d") for x in block)) for block in obj["d"])
            return UnionWitness(_int(obj["n"], "n"), obj["ordered"], d)
    except KeyError as e:
        raise InputError(f"witness is missing {e}") from e
    except (DomainError, TypeError) as e:
        raise InputError(str(e)) from e
    raise InputError(f"unknown witness kind {obj.get('kind')!r}")


def problem_to_json(problem: Problem) -> dict:
    if problem.kind == "sp":
        m, p = problem.params
        return {"kind": "sp", "m": m, "p": p}
    return {"kind": problem.kind, "n": problem.params[0]}


def problem_from_json(obj) -> Problem:
    try:
        if obj["kind"] == "sp":
            return Problem.sp(_int(obj["m"], "m"), _int(obj["p"], "p"))
        return Problem(obj["kind"], (_int(obj["n"], "n"),))
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed problem {obj!r}") from e


def certificate_to_json(cert: BadColoringCertificate) -> dict:
    return {
        "kind": "certificate",
        "problem": problem_to_json(cert.problem),
        "coloring": coloring_to_json(cert.coloring),
    }


def certificate_from_json(obj) -> BadColoringCertificate:
    if not isinstance(obj, dict) or obj.get("kind") != "certificate":
        raise InputError("not a certificate object")
    try:
        return BadColoringCertificate(problem_from_json(obj["problem"]), coloring_from_json(obj["coloring"]))
    except KeyError as e:
        raise InputError(f"certificate is missing {e}") from e


def outcome_to_json(out: SearchOutcome) -> dict:
    cert = out.certificate()
    return {
        "problem": problem_to_json(out.problem),
        "c": num(out.colors),
        "status": out.status,
        "value": out.value,
        "nodes_explored": out.nodes_explored,
        "lower_certificate": certificate_to_json(cert) if cert else None,
    }


def transcript_to_json(tr: Transcript) -> dict:
    lay = tr.layout

    def sets(xs):
        return [list(x) for x in xs]

    return {
        "m": tr.m,
        "p": tr.p,
        "c": tr.c,
        "n_seq": [num(x) for x in lay.n_seq],
        "intervals": [[s.min(), s.max()] for s in lay.intervals],
        "fingerprint_classes": {str(i): tr.class_counts[i] for i in sorted(tr.class_counts)},
        "alpha": {str(i): num(tr.alphas[i]) for i in sorted(tr.alphas)},
        "rows": {str(i): sets(tr.rows.rows[i]) for i in sorted(tr.rows.rows)},
        "hindman_levels": [list(x) for x in tr.hindman_levels],
        "v": sets(tr.v),
        "decomposition": {"levels": list(tr.decomposition.levels), "l_star": num(tr.decomposition.l_star)},
        "H": [num(x) for x in tr.witness.H],
        "audit_row_equivalence": tr.audit,
    }


def load(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e
