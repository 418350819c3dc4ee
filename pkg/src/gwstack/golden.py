"""Golden tables of known invariant values and the verification driver.

The data file ships every known nonzero invariant of P(1,b) for
b = 2..6 with more than three insertions and no divisor or identity
classes, keyed by multiplicity vectors.  :func:`verify` recomputes each
row from scratch and also re-enumerates the full nonzero support, so a
green report certifies both the values and the completeness of the
table.  The file is guarded by a checksum: a silent edit of the
reference values should fail loudly, not produce a quietly different
baseline.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Optional

from .engine import InsertionKey, Reconstructor
from .records import RecordError, iter_record_lines, parse_rational, render_rational
from .ring import build_p1b

_DATA_NAME = "p1b_tables.dat"
_DATA_SHA256 = "0ba2a34964544be2e83518459645a57a3af16b4bd4533e2ddb4379af45b1433c"

ROW_COUNTS = {2: 1, 3: 3, 4: 9, 5: 22, 6: 46}
TABLE_ORDERS = tuple(sorted(ROW_COUNTS))


def insertions_from_mults(mults) -> tuple[int, ...]:
    """Expand a multiplicity vector (k_1, ..., k_{b-1}) to sorted exponents."""
    out = []
    for idx, count in enumerate(mults, start=1):
        if count < 0:
            raise ValueError(f"negative multiplicity in {tuple(mults)}")
        out.extend([idx] * count)
    return tuple(out)


def mults_from_insertions(b: int, insertions) -> tuple[int, ...]:
    """Inverse of :func:`insertions_from_mults`; exponents must be twisted
    non-divisor classes (1..b-1)."""
    counts = [0] * (b - 1)
    for k in insertions:
        if not 1 <= k <= b - 1:
            raise ValueError(
                f"exponent {k} has no slot in a multiplicity vector for b={b}"
            )
        counts[k - 1] += 1
    return tuple(counts)


@dataclass(frozen=True)
class GoldenRow:
    """One reference value: N_d(k_1, ..., k_{b-1}) = value."""

    b: int
    d: int
    mults: tuple[int, ...]
    value: Fraction

    @property
    def n(self) -> int:
        return sum(self.mults)

    def insertions(self) -> tuple[int, ...]:
        return insertions_from_mults(self.mults)

    def key(self) -> InsertionKey:
        return InsertionKey(f"P(1,{self.b})", self.d, self.insertions())

    def label(self) -> str:
        return f"N_{self.d}({','.join(str(k) for k in self.mults)})"


def _parse_row(payload: str) -> GoldenRow:
    fields = payload.split()
    if len(fields) != 4:
        raise RecordError(f"expected 4 fields, got {len(fields)}")
    b = int(fields[0])
    d = int(fields[1])
    mults = tuple(int(k) for k in fields[2].split(","))
    value = parse_rational(fields[3])
    if b < 2:
        raise RecordError(f"table rows need b >= 2, got {b}")
    if d < 0:
        raise RecordError(f"negative degree {d}")
    if len(mults) != b - 1:
        raise RecordError(f"multiplicity vector for b={b} needs {b - 1} slots")
    if not value:
        raise RecordError("zero values do not belong in the table")
    row = GoldenRow(b, d, mults, value)
    if row.n <= 3:
        raise RecordError(f"row {row.label()} has too few insertions")
    weighted = sum(i * k for i, k in enumerate(mults, start=1))
    if weighted != d * (b + 1) + b * (row.n - 2):
        raise RecordError(f"row {row.label()} violates the degree axiom")
    return row


@lru_cache(maxsize=1)
def _load_tables() -> dict[int, tuple[GoldenRow, ...]]:
    blob = resources.files("gwstack.data").joinpath(_DATA_NAME).read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != _DATA_SHA256:
        raise RuntimeError(
            f"golden data checksum mismatch ({digest}); the reference table "
            "was modified without updating golden._DATA_SHA256"
        )
    grouped: dict[int, list[GoldenRow]] = {}
    seen = set()
    for lineno, payload in iter_record_lines(blob.decode("ascii")):
        try:
            row = _parse_row(payload)
        except (RecordError, ValueError) as exc:
            raise RecordError(f"{_DATA_NAME}:{lineno}: {exc}") from None
        if (row.b, row.mults) in seen:
            raise RecordError(f"{_DATA_NAME}:{lineno}: duplicate row {row.label()}")
        seen.add((row.b, row.mults))
        grouped.setdefault(row.b, []).append(row)
    for b, count in ROW_COUNTS.items():
        if len(grouped.get(b, [])) != count:
            raise RecordError(
                f"{_DATA_NAME}: expected {count} rows for b={b}, "
                f"found {len(grouped.get(b, []))}"
            )
    return {b: tuple(rows) for b, rows in grouped.items()}


def golden_rows(b: int) -> tuple[GoldenRow, ...]:
    """The reference rows for one target order, in file order."""
    tables = _load_tables()
    if b not in tables:
        raise ValueError(
            f"no golden table for b={b}; available: {sorted(tables)}"
        )
    return tables[b]


@dataclass(frozen=True)
class RowResult:
    row: GoldenRow
    computed: Fraction
    recheck: Optional[Fraction] = None  # alternate donor policy, on mismatch

    @property
    def ok(self) -> bool:
        return self.computed == self.row.value


@dataclass(frozen=True)
class VerifyReport:
    b: int
    results: tuple[RowResult, ...]
    missing: tuple[InsertionKey, ...]
    extra: tuple[tuple[InsertionKey, Fraction], ...]

    @property
    def matched(self) -> int:
        return sum(1 for r in self.results if r.ok)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def ok(self) -> bool:
        return self.matched == self.total and not self.missing and not self.extra

    def render(self) -> str:
        lines = [f"P(1,{self.b}): {self.matched}/{self.total} rows match"]
        for r in self.results:
            if r.ok:
                continue
            if r.recheck is not None and r.recheck == r.computed:
                note = "both donor policies agree; engine consistently disagrees with the table"
            else:
                note = (
                    f"alternate donor policy gives {r.recheck}; "
                    "the engine disagrees with itself"
                )
            lines.append(
                f"  {r.row.label()}: table {render_rational(r.row.value)}, "
                f"engine {render_rational(r.computed)} ({note})"
            )
        for key in self.missing:
            lines.append(
                f"  enumeration never produced {key.insertions} at degree {key.d}"
            )
        for key, value in self.extra:
            lines.append(
                f"  enumeration found an untabulated nonzero invariant "
                f"{key.insertions} at degree {key.d} = {render_rational(value)}"
            )
        return "\n".join(lines)


def verify(b: int, reconstructor: Optional[Reconstructor] = None) -> VerifyReport:
    """Recompute one golden table and re-derive its support.

    Every row is evaluated from the 3-point constants; on a mismatch
    the value is recomputed under the alternate donor policy so the
    report can tell a self-inconsistent engine from a consistent
    disagreement with the table.  The nonzero support is then
    re-enumerated and compared as a set against the table's keys.
    """
    rows = golden_rows(b)
    rec = reconstructor if reconstructor is not None else Reconstructor(build_p1b(b))
    alternate = None
    results = []
    for row in rows:
        computed = rec.gw_at(row.insertions(), row.d)
        recheck = None
        if computed != row.value:
            if alternate is None:
                alternate = Reconstructor(rec.td, donor_policy="smallest")
            recheck = alternate.gw_at(row.insertions(), row.d)
        results.append(RowResult(row, computed, recheck))
    table_keys = {row.key(): row.value for row in rows}
    found = dict(rec.enumerate_nonzero())
    missing = tuple(
        sorted(
            (k for k in table_keys if k not in found),
            key=lambda k: (k.d, k.insertions),
        )
    )
    extra = tuple(
        sorted(
            ((k, v) for k, v in found.items() if k not in table_keys),
            key=lambda kv: (kv[0].d, kv[0].insertions),
        )
    )
    return VerifyReport(b=b, results=tuple(results), missing=missing, extra=extra)
