"""Command line interface.

Exit codes: 0 success / valid, 1 invalid witness or infeasible construction,
2 search budget exhausted, 3 bad input.
"""

from __future__ import annotations

import argparse
import random
import sys

from . import formats
from .bounds import DEFAULT_BITS, OracleTable, UnknownOracleError, load_table, render, spencer_bound
from .core import INTERVAL, SUBSETS, Coloring, DomainError, SpencerWitness
from .replay import ConstructionError, InfeasibleError, extract, verify_spencer
from .search import (
    EXACT,
    InputError,
    Problem,
    SearchBudget,
    compute,
    find_union_witness,
    naive_compute,
    verify_certificate,
)

OK, INVALID, UNKNOWN, BAD_INPUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BAD_INPUT, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _n_seq(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of naturals: {text!r}")
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("n-seq entries must be non-negative")
    return vals


def _add_budget(p: argparse.ArgumentParser, max_k: int) -> None:
    p.add_argument("--max-k", type=_positive, default=max_k)
    p.add_argument("--max-nodes", type=_positive, default=10_000_000)
    p.add_argument("--threads", type=_positive, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finhind", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, params, max_k in (("sp", ("m", "p"), 64), ("u", ("n",), 6), ("hind", ("n",), 6)):
        p = sub.add_parser(name, help=f"compute {name} exactly by search")
        for x in params:
            p.add_argument(f"--{x}", type=_positive, required=True)
        p.add_argument("--c", type=_positive, required=True)
        _add_budget(p, max_k)
        p.add_argument("--naive", action="store_true", help="brute-force every coloring instead")
        p.add_argument("--time-limit", type=float, default=None, help="seconds (naive only)")
        p.add_argument("--cert", help="write the lower-bound certificate here")

    p = sub.add_parser("bound", help="unroll the recursive upper bound")
    for x in ("m", "p", "c"):
        p.add_argument(f"--{x}", type=_positive, required=True)
    p.add_argument("--oracle", default="exact", help="exact | symbolic | table:<file>")
    p.add_argument("--bits", type=_positive, default=DEFAULT_BITS)
    p.add_argument("--max-k", type=_positive, default=6)
    p.add_argument("--max-nodes", type=_positive, default=1_000_000)

    p = sub.add_parser("extract", help="extract a witness by replaying the construction")
    for x in ("m", "p", "c"):
        p.add_argument(f"--{x}", type=_positive, required=True)
    p.add_argument("--coloring", required=True)
    p.add_argument("--n-seq", type=_n_seq)
    p.add_argument("--transcript")

    p = sub.add_parser("verify", help="check a witness against a coloring, or a certificate")
    p.add_argument("--witness")
    p.add_argument("--coloring")
    p.add_argument("--certificate")

    p = sub.add_parser("gen-coloring", help="seeded pseudo-random coloring")
    p.add_argument("--kind", choices=(INTERVAL, SUBSETS), required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--colors", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def cmd_compute(args, out) -> int:
    if args.command == "sp":
        problem = Problem.sp(args.m, args.p)
    else:
        problem = Problem(args.command, (args.n,))
    if args.naive:
        res = naive_compute(problem, args.c, args.max_k, args.max_nodes, args.time_limit)
    else:
        budget = SearchBudget(args.max_k, args.max_nodes, args.threads)
        res = compute(problem, args.c, budget)
    out.write(f"{res}\n")
    cert = res.certificate()
    if args.cert and cert is not None:
        _write(args.cert, formats.dumps(formats.certificate_to_json(cert)))
    return OK if res.status == EXACT else UNKNOWN


def _oracles(args) -> OracleTable:
    budget = SearchBudget(max_k=args.max_k, max_nodes=args.max_nodes)
    if args.oracle == "exact":
        return OracleTable.exact(budget)
    if args.oracle == "symbolic":
        return OracleTable(budget=budget)
    if args.oracle.startswith("table:"):
        table = load_table(args.oracle[len("table:"):])
        table.budget = budget
        return table
    raise InputError(f"unknown oracle source {args.oracle!r}")


def cmd_bound(args, out) -> int:
    try:
        trace = spencer_bound(args.m, args.p, args.c, _oracles(args), args.bits)
    except UnknownOracleError as e:
        out.write(render(e.trace))
        sys.stderr.write(f"oracle search exhausted its budget: {e}\n")
        return UNKNOWN
    out.write(render(trace))
    return OK


def cmd_extract(args, out) -> int:
    coloring = formats.coloring_from_json(formats.load(args.coloring))
    try:
        witness, transcript = extract(args.m, args.p, args.c, coloring, n_seq=args.n_seq)
    except InfeasibleError as e:
        sys.stderr.write(f"infeasible: {e}\n")
        return INVALID
    if args.transcript:
        _write(args.transcript, formats.dumps(formats.transcript_to_json(transcript)))
    out.write(formats.dumps(formats.witness_to_json(witness)))
    return OK


def _union_violation(coloring: Coloring, w) -> str | None:
    if coloring.kind != SUBSETS:
        return "union witnesses need a subsets coloring"
    masks = w.masks
    if any(mk >> coloring.k for mk in masks):
        return f"support outside {{0..{coloring.k - 1}}}"
    unions = [0]
    for mk in masks:
        unions += [u | mk for u in unions]
    if len({coloring.assign[u - 1] for u in unions[1:]}) != 1:
        return "unions not monochromatic"
    return None


def cmd_verify(args, out) -> int:
    if args.certificate:
        if args.witness or args.coloring:
            raise InputError("--certificate cannot be combined with --witness/--coloring")
        cert = formats.certificate_from_json(formats.load(args.certificate))
        if verify_certificate(cert):
            out.write("VALID\n")
            return OK
        out.write("INVALID: a witness exists in the coloring\n")
        return INVALID
    if not (args.witness and args.coloring):
        raise InputError("verify needs --witness and --coloring, or --certificate")
    witness = formats.witness_from_json(formats.load(args.witness))
    coloring = formats.coloring_from_json(formats.load(args.coloring))
    if isinstance(witness, SpencerWitness):
        ok, why = verify_spencer(coloring, witness)
    else:
        why = _union_violation(coloring, witness)
        ok = why is None
    out.write("VALID\n" if ok else f"INVALID: {why}\n")
    return OK if ok else INVALID


def gen_coloring(kind: str, k: int, colors: int, seed: int = 0) -> Coloring:
    """``random.Random(seed).randrange(colors)`` for each cell in increasing cell order."""
    rng = random.Random(seed)
    size = k if kind == INTERVAL else (1 << k) - 1
    return Coloring(kind, k, colors, tuple(rng.randrange(colors) for _ in range(size)))


def cmd_gen_coloring(args, out) -> int:
    if args.kind == SUBSETS and args.k > 24:
        raise InputError("subsets colorings are limited to k <= 24")
    out.write(formats.dumps(formats.coloring_to_json(gen_coloring(args.kind, args.k, args.colors, args.seed))))
    return OK


_COMMANDS = {
    "sp": cmd_compute,
    "u": cmd_compute,
    "hind": cmd_compute,
    "bound": cmd_bound,
    "extract": cmd_extract,
    "verify": cmd_verify,
    "gen-coloring": cmd_gen_coloring,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args, out)
    except (InputError, DomainError) as e:
        sys.stderr.write(f"error: {e}\n")
        return BAD_INPUT
    except ConstructionError as e:
        # unreachable when the construction is correct
        sys.stderr.write(f"internal construction failure: {e}\n")
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
