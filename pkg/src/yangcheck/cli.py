"""Command-line driver: ``verify <suite> [options]`` or ``verify --all``."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .report import USAGE_EXIT, SuiteSpec, emit_report
from .suites import REGISTRY, run_suite
from .twisted import TwistData
from .young import StandardTableau, YoungDiagram


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like lo:hi, got {text!r}") from None


def _level(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"level must be a rational p/q, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="verify", description="Exact verification suites for R-matrix and "
                "twisted Yangian identities.")
    p.add_argument("suite", nargs="?", help="suite name; one of: " + ", ".join(REGISTRY))
    p.add_argument("--all", action="store_true", help="run every registered suite")
    p.add_argument("--list", action="store_true", help="list suites and exit")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--twist", help="orthogonal, symplectic or file:<path> (default: both)")
    p.add_argument("--level", type=_level, help="level c as p/q (default: per suite)")
    p.add_argument("--h-order", type=int, default=3, dest="K", help="work modulo h^K")
    p.add_argument("--degree", type=int, default=2, help="basis degree bound D")
    p.add_argument("--modes", type=int, help="mode bound R of basis vectors (default: per suite)")
    p.add_argument("--window", type=_window, default=(-6, 6), help="spectral window lo:hi")
    p.add_argument("--nu", help="partition, e.g. 2,1")
    p.add_argument("--tableau", help="standard tableau rows, e.g. 1,2/3")
    p.add_argument("--r-max", type=int, default=6, help="bound of the r searches")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1)
    return p


def _spec(name: str, args: argparse.Namespace) -> SuiteSpec:
    if args.twist is not None:
        TwistData.by_name(args.twist, args.N)
    nu = YoungDiagram.parse(args.nu) if args.nu else None
    tab = StandardTableau.parse(args.tableau) if args.tableau else None
    return SuiteSpec(name=name, N=args.N, twist=args.twist, level=args.level, K=args.K,
                     D=args.degree, R=args.modes, window=args.window, nu=nu, tableau=tab,
                     r_max=args.r_max)


def _run(spec: SuiteSpec):
    return run_suite(spec)


def combined_exit(codes) -> int:
    # a failure outranks an inconclusive run
    codes = set(codes)
    return 1 if 1 in codes else max(codes, default=0)


def _join_window(argv: list[str]) -> list[str]:
    # "--window -6:6" would otherwise read -6:6 as an option
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a == "--window":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--window={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_window(argv))
    if args.list:
        for name, (_, anchor) in REGISTRY.items():
            print(f"{name:22s} {anchor}")
        return 0
    if args.all == bool(args.suite):
        print("verify: give exactly one suite name or --all", file=sys.stderr)
        return USAGE_EXIT
    names = list(REGISTRY) if args.all else [args.suite]
    try:
        specs = [_spec(n, args) for n in names]
        if args.jobs > 1 and len(specs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(_run, specs))
        else:
            reports = [run_suite(s) for s in specs]
    except (ValueError, OSError) as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return USAGE_EXIT
    for r in reports:
        print(emit_report(r, args.format))
    return combined_exit(r.exit_code for r in reports)


if __name__ == "__main__":
    sys.exit(main())
