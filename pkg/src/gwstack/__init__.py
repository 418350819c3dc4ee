"""Exact genus-zero Gromov-Witten invariants of the stacks P(1,b).

The package reconstructs every genus-zero invariant of the weighted
projective lines P(1,b) from their 2- and 3-point structure constants,
using only the degree, identity, and divisor axioms plus WDVV
associativity, entirely over exact rationals.  The same engine drives
the projective plane, where it reproduces the classical counts of
rational plane curves.
"""

from .engine import (
    CacheConflictError,
    InsertionKey,
    MemoCache,
    Reconstructor,
    closed_4pt_deg0,
    closed_4pt_deg1,
    e_cut,
    enumerate_nonzero,
    forced_degree,
    gw,
    gw_at,
    shared_reconstructor,
    wdvv_residual,
)
from .golden import (
    GoldenRow,
    VerifyReport,
    golden_rows,
    insertions_from_mults,
    mults_from_insertions,
    verify,
)
from .records import GWRecord, RecordError, parse_rational, render_rational
from .ring import (
    DivisorStep,
    QRingElem,
    SpecializedRing,
    TargetData,
    basis_element,
    basis_product_via_pairing,
    build_p1b,
    build_p2,
    divisor_generation_check,
    pairing_inverse,
    qmul,
    qreduce,
    specialize,
    three_point,
    two_point,
    validate_target,
)

__version__ = "0.1.0"

__all__ = [
    "CacheConflictError",
    "DivisorStep",
    "GWRecord",
    "GoldenRow",
    "InsertionKey",
    "MemoCache",
    "QRingElem",
    "RecordError",
    "Reconstructor",
    "SpecializedRing",
    "TargetData",
    "VerifyReport",
    "basis_element",
    "basis_product_via_pairing",
    "build_p1b",
    "build_p2",
    "closed_4pt_deg0",
    "closed_4pt_deg1",
    "divisor_generation_check",
    "e_cut",
    "enumerate_nonzero",
    "forced_degree",
    "golden_rows",
    "gw",
    "gw_at",
    "insertions_from_mults",
    "mults_from_insertions",
    "pairing_inverse",
    "parse_rational",
    "qmul",
    "qreduce",
    "render_rational",
    "shared_reconstructor",
    "specialize",
    "three_point",
    "two_point",
    "validate_target",
    "verify",
    "wdvv_residual",
    "__version__",
]
