"""Command line front end.

Subcommands:

* ``compute`` -- evaluate one invariant of P(1,b);
* ``table``   -- tabulate all nonzero invariants with n > 3;
* ``verify``  -- recompute the shipped golden tables;
* ``ring``    -- print the multiplication table at a chosen q;
* ``cache``   -- validate or normalize a record file.

Exit codes: 0 success, 1 verification mismatch, 2 usage error,
3 unreadable or malformed file.  All printed values are exact
rationals; the output is deterministic byte for byte.

``compute`` and ``table`` optionally persist their memo to a record
file (``--cache`` or the ``GWSTACK_CACHE`` environment variable) and
preload it on the next run.  Preloaded entries are validated, never
trusted: a record that contradicts the structure constants or carries
an impossible degree rejects the whole file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from functools import lru_cache

from .engine import Reconstructor
from .golden import TABLE_ORDERS, mults_from_insertions, verify
from .records import GWRecord, RecordError, load_records, render_rational, save_records
from .ring import TargetData, build_p1b, divisor_generation_check, specialize

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_FILE = 3


class _FileFailure(Exception):
    """A file-level problem destined for stderr and exit code 3."""


@lru_cache(maxsize=None)
def _target_for(b: int) -> TargetData:
    return build_p1b(b)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwstack",
        description="Exact genus-zero invariants of the weighted projective lines P(1,b).",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    compute = subs.add_parser(
        "compute", help="evaluate one invariant from its insertions"
    )
    compute.add_argument("--b", type=int, required=True, help="target order, b >= 1")
    compute.add_argument(
        "--insertions",
        required=True,
        metavar="K1,K2,...",
        help="comma-separated basis exponents in [0, b] (0 identity, b divisor)",
    )
    compute.add_argument(
        "--degree",
        type=int,
        default=None,
        help="curve degree; defaults to the degree forced by the insertions",
    )
    _add_cache_option(compute)
    compute.set_defaults(handler=_cmd_compute, parser=compute)

    table = subs.add_parser(
        "table", help="tabulate all nonzero invariants with more than 3 insertions"
    )
    table.add_argument("--b", type=int, required=True, help="target order, b >= 1")
    table.add_argument("--max-n", type=int, default=None, help="cap on insertion count")
    table.add_argument("--max-d", type=int, default=None, help="cap on curve degree")
    table.add_argument(
        "--include-divisor",
        action="store_true",
        help="also enumerate divisor insertions (requires --max-n, --max-d, jsonl)",
    )
    table.add_argument(
        "--include-fundamental",
        action="store_true",
        help="also enumerate identity insertions (requires --max-n, --max-d, jsonl)",
    )
    table.add_argument(
        "--format",
        choices=("human", "tsv", "jsonl"),
        default="human",
        help="output format (default: human)",
    )
    _add_cache_option(table)
    table.set_defaults(handler=_cmd_table, parser=table)

    ver = subs.add_parser("verify", help="recompute the shipped golden tables")
    ver.add_argument(
        "--b",
        required=True,
        metavar="B|all",
        help=f"one of {TABLE_ORDERS[0]}..{TABLE_ORDERS[-1]}, or 'all'",
    )
    ver.set_defaults(handler=_cmd_verify, parser=ver)

    ring = subs.add_parser(
        "ring", help="print the specialized quantum multiplication table"
    )
    ring.add_argument("--b", type=int, required=True, help="target order, b >= 1")
    ring.add_argument(
        "--lambda",
        dest="lam",
        required=True,
        metavar="VALUE",
        help="rational value of q, e.g. 1 or 2/3 (write --lambda=-1/2 for negatives)",
    )
    ring.add_argument(
        "--check-generation",
        action="store_true",
        help="report whether the divisor class generates the ring",
    )
    ring.set_defaults(handler=_cmd_ring, parser=ring)

    cache = subs.add_parser("cache", help="validate or normalize a record file")
    cache.add_argument("--path", required=True, help="record file to inspect")
    cache.add_argument(
        "--emit",
        action="store_true",
        help="print the normalized records instead of a summary",
    )
    cache.set_defaults(handler=_cmd_cache, parser=cache)
    return parser


def _add_cache_option(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--cache",
        default=None,
        metavar="PATH",
        help="record file to preload and extend (default: $GWSTACK_CACHE)",
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except (_FileFailure, RecordError) as exc:
        print(f"gwstack: {exc}", file=sys.stderr)
        return EXIT_FILE


def entry() -> None:
    sys.exit(main())


# -- argument helpers ----------------------------------------------------------


def _check_order(args) -> int:
    if args.b < 1:
        args.parser.error(f"--b must be a positive integer, got {args.b}")
    return args.b


def _parse_insertions(args, b: int) -> tuple[int, ...]:
    try:
        ins = tuple(int(part) for part in args.insertions.split(","))
    except ValueError:
        args.parser.error(f"--insertions must be comma-separated integers, got {args.insertions!r}")
    if len(ins) < 2:
        args.parser.error("--insertions needs at least two exponents")
    bad = [k for k in ins if k < 0 or k > b]
    if bad:
        args.parser.error(f"insertion exponents must lie in [0, {b}]: {bad}")
    return ins


def _parse_lambda(args) -> Fraction:
    try:
        return Fraction(args.lam)
    except (ValueError, ZeroDivisionError):
        args.parser.error(f"--lambda must be a rational number, got {args.lam!r}")


def _cache_path(args):
    if args.cache:
        return args.cache
    return os.environ.get("GWSTACK_CACHE") or None


def _preload_cache(rec: Reconstructor, path):
    """Load a record file into the engine, validating every entry.

    Returns the loaded records so a later save can preserve entries
    for other target orders and redundant small-n rows.
    """
    if path is None or not os.path.exists(path):
        return []
    engines = {rec.td.power_basis: rec}
    pairs = load_records(path)
    for lineno, recd in pairs:
        eng = engines.get(recd.b)
        if eng is None:
            eng = Reconstructor(_target_for(recd.b))
            engines[recd.b] = eng
        try:
            eng.preload([(recd.d, recd.insertions, recd.value)])
        except ValueError as exc:
            raise _FileFailure(f"{path}:{lineno}: {exc}") from None
    return [recd for _, recd in pairs]


def _store_cache(rec: Reconstructor, path, loaded) -> None:
    if path is None:
        return
    merged = {(r.b, r.insertions): r for r in loaded}
    b = rec.td.power_basis
    for d, ins, value in rec.snapshot():
        merged[(b, ins)] = GWRecord(b, d, ins, value)
    save_records(path, merged.values())


# -- subcommands ---------------------------------------------------------------


def _cmd_compute(args) -> int:
    b = _check_order(args)
    ins = _parse_insertions(args, b)
    if args.degree is not None and args.degree < 0:
        args.parser.error(f"--degree must be nonnegative, got {args.degree}")
    rec = Reconstructor(_target_for(b))
    path = _cache_path(args)
    loaded = _preload_cache(rec, path)
    try:
        if args.degree is None:
            value = rec.gw(ins)
        else:
            value = rec.gw_at(ins, args.degree)
    except ValueError as exc:  # degenerate 2-point problem at degree 0
        args.parser.error(str(exc))
    print(render_rational(value))
    _store_cache(rec, path, loaded)
    return EXIT_OK


def _cmd_table(args) -> int:
    b = _check_order(args)
    include = args.include_divisor or args.include_fundamental
    if include:
        if args.max_n is None or args.max_d is None:
            args.parser.error(
                "--include-divisor/--include-fundamental make the support "
                "infinite; both --max-n and --max-d are required"
            )
        if args.format != "jsonl":
            args.parser.error(
                "divisor and identity insertions have no multiplicity-vector "
                "rendering; use --format jsonl"
            )
    rec = Reconstructor(_target_for(b))
    path = _cache_path(args)
    loaded = _preload_cache(rec, path)
    rows = list(
        rec.enumerate_nonzero(
            max_n=args.max_n,
            max_d=args.max_d,
            include_divisor=args.include_divisor,
            include_fundamental=args.include_fundamental,
        )
    )
    if args.format == "jsonl":
        rows.sort(key=lambda kv: (kv[0].d, kv[0].insertions))
        for key, value in rows:
            print(
                json.dumps(
                    {
                        "b": b,
                        "d": key.d,
                        "insertions": list(key.insertions),
                        "value": render_rational(value),
                    },
                    separators=(",", ":"),
                )
            )
    else:
        labelled = [
            (key.d, mults_from_insertions(b, key.insertions), value)
            for key, value in rows
        ]
        labelled.sort(key=lambda t: (t[0], t[1]))
        if args.format == "tsv":
            for d, mults, value in labelled:
                cols = (str(d), ",".join(map(str, mults)), render_rational(value))
                print("\t".join(cols))
        else:
            names = [
                f"N_{d}({','.join(map(str, mults))})" for d, mults, _ in labelled
            ]
            width = max(map(len, names), default=0)
            for name, (_, _, value) in zip(names, labelled):
                print(f"{name:<{width}} = {render_rational(value)}")
    _store_cache(rec, path, loaded)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.b == "all":
        orders = TABLE_ORDERS
    else:
        try:
            order = int(args.b)
        except ValueError:
            order = -1
        if order not in TABLE_ORDERS:
            args.parser.error(
                f"--b must be one of {', '.join(map(str, TABLE_ORDERS))}, or 'all'"
            )
        orders = (order,)
    reports = [verify(b) for b in orders]
    for report in reports:
        print(report.render())
    if len(reports) > 1:
        matched = sum(r.matched for r in reports)
        total = sum(r.total for r in reports)
        print(f"total: {matched}/{total} rows match")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_MISMATCH


def _cmd_ring(args) -> int:
    b = _check_order(args)
    lam = _parse_lambda(args)
    td = _target_for(b)
    ring = specialize(td, lam)
    print(f"ring {td.id} at q = {render_rational(ring.lam)}")
    names = td.basis_names
    for i in range(td.basis_size):
        for j in range(i, td.basis_size):
            vec = ring.mult_table[i][j]
            print(f"{names[i]} * {names[j]} = {_render_combo(td, vec)}")
    if args.check_generation:
        verdict = divisor_generation_check(td, lam)
        print(f"generated: {'true' if verdict else 'false'}")
    return EXIT_OK


def _render_combo(td: TargetData, vec) -> str:
    terms = []
    for l, c in enumerate(vec):
        if not c:
            continue
        name = td.basis_names[l]
        if l == td.fundamental_index:
            terms.append(render_rational(c))
        elif c == 1:
            terms.append(name)
        else:
            terms.append(f"{render_rational(c)} {name}")
    return " + ".join(terms) if terms else "0"


def _cmd_cache(args) -> int:
    pairs = load_records(args.path)
    engines: dict[int, Reconstructor] = {}
    for lineno, recd in pairs:
        eng = engines.get(recd.b)
        if eng is None:
            eng = Reconstructor(_target_for(recd.b))
            engines[recd.b] = eng
        try:
            eng.preload([(recd.d, recd.insertions, recd.value)])
        except ValueError as exc:
            raise _FileFailure(f"{args.path}:{lineno}: {exc}") from None
    if args.emit:
        ordered = sorted(
            (recd for _, recd in pairs),
            key=lambda r: (r.b, r.d, len(r.insertions), r.insertions),
        )
        for recd in ordered:
            print(recd.render())
    else:
        print(f"{len(pairs)} records ok")
    return EXIT_OK
