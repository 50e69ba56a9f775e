"""Command-line front end.

Exit codes: 0 pass, 1 property failure, 2 usage or parse error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .combiner import build, plan, render_size_table, size_table
from .designs import certify_design, check_selection, design_lower_bound, read_selection
from .perm_core import MATERIALIZATION_CAP, CapExceeded, FormatError, read_family, write_family
from .verifier import WORK_CAP, check_uniform, sampled_check

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


def _positive(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw}")
    return value


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twise", description="Build and verify t-wise uniform permutation families.")
    ap.add_argument("--cap", type=_positive, default=MATERIALIZATION_CAP, help="max family size to enumerate")
    ap.add_argument("--workers", type=_positive, default=os.cpu_count() or 1, help="verifier parallelism")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a family from the recursive plan")
    p.add_argument("n", type=int)
    p.add_argument("t", type=int)
    p.add_argument("--catalog", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--selection", help="selection file replacing the complete selection at the top step")
    p.add_argument("--out", help="write the family here ('-' for stdout)")

    p = sub.add_parser("info", help="print the plan tree and exact size")
    p.add_argument("n", type=int)
    p.add_argument("t", type=int)
    p.add_argument("--catalog", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("verify", help="check t-wise uniformity of a family file")
    p.add_argument("file")
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=_positive, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=Fraction, default=Fraction(1, 100))

    p = sub.add_parser("design", help="certify a selection file as a t-design")
    p.add_argument("file")
    p.add_argument("--t", type=_positive, required=True)

    p = sub.add_parser("bound", help="lower bound on the size of a t-(2n, n, λ) design")
    p.add_argument("two_n", type=_positive)
    p.add_argument("t", type=_positive)

    p = sub.add_parser("sizes", help="improved vs naive recursion sizes")
    p.add_argument("--max-m", type=_positive, default=4)
    p.add_argument("--max-l", type=_positive, default=3)
    return ap


def _read(path: str, reader):
    with open(path) as fh:
        return reader(fh)


def _cmd_build(args, out) -> int:
    selection = _read(args.selection, read_selection) if args.selection else None
    p = plan(args.n, args.t, use_catalog=args.catalog, selection=selection)
    print(p.render(), file=out)
    print(f"size={p.size} bound={args.t ** (2 * args.n)}", file=out)
    try:
        fam = build(p, cap=args.cap if args.out else None, base_cap=args.cap)
    except CapExceeded as exc:
        print(f"error: {exc}; size={p.size} bound={args.t ** (2 * args.n)}", file=sys.stderr)
        return EXIT_CAP
    if args.out == "-":
        write_family(fam, out, args.cap)
    elif args.out:
        with open(args.out, "w") as fh:
            write_family(fam, fh, args.cap)
    return EXIT_PASS


def _cmd_verify(args, out) -> int:
    fam = _read(args.file, read_family)
    if args.t > fam.degree:
        print(f"error: t={args.t} exceeds the degree {fam.degree}", file=sys.stderr)
        return EXIT_USAGE
    if args.mode == "exact":
        rep = check_uniform(fam, args.t, work_cap=WORK_CAP, workers=args.workers, cap=args.cap)
    else:
        rep = sampled_check(fam, args.t, args.samples, args.seed, float(args.tol))
    print(rep.render(), file=out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _cmd_design(args, out) -> int:
    sel = _read(args.file, read_selection)
    if args.t > sel.k:
        print(f"error: t={args.t} exceeds the block size {sel.k}", file=sys.stderr)
        return EXIT_USAGE
    cert = certify_design(sel, args.t, args.cap)
    rep = check_selection(sel, args.t, args.cap)
    print(cert.render(), file=out)
    print(rep.render(), file=out)
    return EXIT_PASS if cert.passed and rep.passed else EXIT_FAIL


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = _parser().parse_args(argv)
    try:
        if args.command == "build":
            return _cmd_build(args, out)
        if args.command == "info":
            p = plan(args.n, args.t, use_catalog=args.catalog)
            print(p.render(), file=out)
            print(f"size={p.size} bound={args.t ** (2 * args.n)}", file=out)
            return EXIT_PASS
        if args.command == "verify":
            return _cmd_verify(args, out)
        if args.command == "design":
            return _cmd_design(args, out)
        if args.command == "bound":
            print(design_lower_bound(args.two_n, args.t), file=out)
            return EXIT_PASS
        if args.command == "sizes":
            print(render_size_table(size_table(args.max_m, args.max_l)), file=out)
            return EXIT_PASS
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
