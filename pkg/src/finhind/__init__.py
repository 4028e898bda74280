"""Small finitary Hindman, disjoint-union and Spencer numbers, their recursive
upper bound, and a replay of the witness construction."""

from .core import (
    BlockFamily,
    Coloring,
    DomainError,
    FiniteSet,
    SpencerWitness,
    UnionWitness,
    color_of,
    exp2,
    nu,
    precedes,
    set_of,
    sum_set,
)
from .search import (
    BadColoringCertificate,
    InputError,
    Problem,
    SearchBudget,
    SearchOutcome,
    compute_hind,
    compute_sp,
    compute_u,
    find_spencer_witness,
    find_union_witness,
    naive_compute,
    verify_certificate,
)
from .bounds import BoundTrace, OracleTable, evaluate, least_n0, render, spencer_bound
from .replay import extract, verify_spencer

__version__ = "0.1.0"
