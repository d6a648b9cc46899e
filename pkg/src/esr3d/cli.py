"""Command-line front end: ``esr3d generate | register | reproduce``.

Exit codes: 0 success, 2 argument error, 3 parse or I/O error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .errors import (
    DegenerateSurface,
    DimensionMismatch,
    ESRError,
    NonFiniteValue,
    ParseError,
    PartitionMismatch,
    UnknownCase,
)
from .experiments import CASES, get_case
from .generators import Family, GammaWarp, SurfaceFamily, apply_gamma, generate
from .grid import Partition
from .registration import RegistrationConfig, register_surfaces
from .surface_io import (
    build_report,
    format_surface,
    read_surface,
    write_report,
    write_surface,
    write_warp_table,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _min3(text):
    v = int(text)
    if v < 3:
        raise argparse.ArgumentTypeError(f"must be >= 3 (got {v})")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive (got {text})")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1 (got {v})")
    return v


def _exponent(text):
    v = float(text)
    if v < 1.0:
        raise argparse.ArgumentTypeError(f"warp exponent must be >= 1 (got {text})")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="esr3d", description="Elastic shape registration of surfaces in 3D.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample an analytic test surface")
    g.add_argument("--family", required=True, choices=[f.value for f in Family])
    g.add_argument("--k", type=_positive_int, default=2)
    g.add_argument("--m", type=_min3, default=101)
    g.add_argument("--n", type=_min3, default=101)
    g.add_argument("--gamma-a", type=_exponent, default=1.0, help="exponent of r in gamma")
    g.add_argument("--gamma-b", type=_exponent, default=1.0, help="exponent of t in gamma")
    g.add_argument("--out", default="-", help="output path ('-' for stdout)")

    def add_run_flags(sp):
        sp.add_argument("--tol", type=_positive_float, default=1e-6)
        sp.add_argument("--iten", type=_positive_int, default=10)
        sp.add_argument("--threads", type=_positive_int, default=None,
                        help="row-level worker threads (ESR3D_THREADS overrides)")
        sp.add_argument("--emit-warp", metavar="PATH", help="write the row warps h_j as a table")
        sp.add_argument("--emit-registered", metavar="PREFIX",
                        help="write PREFIX_first.txt and PREFIX_second.txt")
        sp.add_argument("--json", metavar="PATH", help="write the report here ('-' for stdout)")

    r = sub.add_parser("register", help="register the second surface onto the first")
    r.add_argument("first")
    r.add_argument("second")
    r.add_argument("--corner-search", action="store_true")
    add_run_flags(r)

    x = sub.add_parser("reproduce", help="rerun a published experiment")
    x.add_argument("case_id", help=f"one of: {', '.join(CASES)}")
    x.add_argument("--m", type=_min3, default=101)
    x.add_argument("--n", type=_min3, default=101)
    add_run_flags(x)
    return p


def _threads(args):
    env = os.environ.get("ESR3D_THREADS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise argparse.ArgumentTypeError(f"ESR3D_THREADS must be an integer, got {env!r}") from None
        if v < 1:
            raise argparse.ArgumentTypeError("ESR3D_THREADS must be >= 1")
        return v
    return args.threads


def _run(args, c1, c2, corner_search, extra):
    cfg = RegistrationConfig(tol=args.tol, iten=args.iten, threads=_threads(args))
    t0 = time.perf_counter()
    result, idx = register_surfaces(c1, c2, cfg, corner_search=corner_search)
    extra = dict(extra, seconds=round(time.perf_counter() - t0, 3))
    if corner_search:
        extra["candidate_index"] = idx
    if args.emit_warp:
        write_warp_table(args.emit_warp, result.warp, result.field_first.r, result.field_first.t)
        extra["warp_table"] = str(args.emit_warp)
    if args.emit_registered:
        first = Path(f"{args.emit_registered}_first.txt")
        second = Path(f"{args.emit_registered}_second.txt")
        write_surface(first, result.registered_first)
        write_surface(second, result.registered_second)
        extra["registered_first"] = str(first)
        extra["registered_second"] = str(second)
    report = build_report(result, **extra)
    if args.json and args.json != "-":
        write_report(args.json, report)
    else:
        print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_generate(args):
    fam = SurfaceFamily(Family(args.family), args.k)
    r, t = Partition.uniform(args.m), Partition.uniform(args.n)
    g = generate(fam, r, t)
    w = GammaWarp(args.gamma_a, args.gamma_b)
    if not w.is_identity:
        g = apply_gamma(g, w, fam)
    if args.out == "-":
        sys.stdout.write(format_surface(g))
    else:
        write_surface(args.out, g)
    return EXIT_OK


def cmd_register(args):
    c1 = read_surface(args.first)
    c2 = read_surface(args.second)
    if c1.shape != c2.shape:
        raise DimensionMismatch(f"surface sizes differ: {c1.shape} vs {c2.shape}")
    return _run(args, c1, c2, args.corner_search, {"first": args.first, "second": args.second})


def cmd_reproduce(args):
    case = get_case(args.case_id)
    c1, c2 = case.build(args.m, args.n)
    extra = {
        "case_id": case.case_id,
        "reference_distance": case.reference_distance,
        "reference_iterations": case.reference_iterations,
        "reference_seconds": case.reference_seconds,
        "reference_rotation": [x for row in case.reference_rotation for x in row],
    }
    return _run(args, c1, c2, False, extra)


_COMMANDS = {"generate": cmd_generate, "register": cmd_register, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as e:
        print(f"esr3d: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownCase as e:
        print(f"esr3d: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError, DimensionMismatch, PartitionMismatch) as e:
        print(f"esr3d: error: {e}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateSurface, NonFiniteValue, ArithmeticError, ESRError) as e:
        print(f"esr3d: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
