"""The eleven acceptance criteria, each run at its stated parameters and
time limit.  One PASS/FAIL line per criterion is printed in the summary."""
from __future__ import annotations

import time
from fractions import Fraction


from conftest import ACCEPTANCE
from yangcheck import SuiteSpec, run_suite
from yangcheck.exact import solve_g_series


def _run(number: int, title: str, limit: float, specs: list[SuiteSpec], extra=None) -> None:
    start = time.perf_counter()
    reports = [run_suite(s) for s in specs]
    elapsed = time.perf_counter() - start
    problems = [f"{r.suite}: {r.status} {r.residual}" for r in reports if r.status != "verified"]
    if extra is not None:
        problems += extra(reports)
    if elapsed > limit:
        problems.append(f"took {elapsed:.1f} s, limit {limit:.0f} s")
    verdict = "PASS" if not problems else "FAIL"
    line = f"criterion {number:2d} {verdict}  {title} ({elapsed:.1f} s / {limit:.0f} s)"
    if problems:
        line += "  " + "; ".join(problems)
    ACCEPTANCE.append(line)
    print(line)
    assert not problems, line


def test_criterion_01_ybe():
    _run(1, "YBE exact, N in {2, 3}", 5, [SuiteSpec("ybe", N=N) for N in (2, 3)])


def test_criterion_02_g_unitarity_crossing():
    def g1(_):
        return [f"g_1 != 1/{N}" for N in (2, 3, 4) if solve_g_series(N, 3)[1] != Fraction(1, N)]

    specs = [SuiteSpec("g-series", N=N) for N in (2, 3, 4)]
    specs += [SuiteSpec(name, N=N, K=6) for name in ("unitarity", "crossing") for N in (2, 3)]
    _run(2, "g_1 = 1/N, functional equation to u^-8, unitarity and crossing mod h^6",
         30, specs, g1)


def test_criterion_03_fusion():
    _run(3, "fusion for <= 4 boxes, N in {2, 3}", 60, [SuiteSpec("fusion", N=N) for N in (2, 3)])


def test_criterion_04_rtt():
    _run(4, "rtt1-rtt3 mod h^3 on V_c words, c in {0, -2}", 300,
         [SuiteSpec("rtt-series", N=2, K=3, D=2, R=3, window=(-6, 6))])


def test_criterion_05_reflection():
    specs = [SuiteSpec(name, N=2, K=3, D=2) for name in ("srel", "usflg", "rsrs")]
    specs.append(SuiteSpec("rsrs-multi", N=2, K=3, D=2, shapes=((1, 1),)))
    _run(5, "srel, usflg, RSRS1-3, rsrs12/22/32 (n = m = 1) mod h^3", 600, specs)


def test_criterion_06_centrality():
    _run(6, "centrality at N = 2, c = -1, nu in {(1), (2), (1,1)}", 1200,
         [SuiteSpec("centrality-critical", N=2, level=-1, K=3, D=2, R=2)])


def test_criterion_07_invariants():
    names = ("invariants", "commute-invariants", "center-commute", "invariant-generation")
    _run(7, "invariants and commuting families at the critical level", 600,
         [SuiteSpec(name, N=2) for name in names])


def test_criterion_08_gamma_and_sdet():
    _run(8, "gamma at c = 0 and the sdet identity on the vacuum", 600,
         [SuiteSpec("gamma-factorization", N=2, level=0), SuiteSpec("sdet-identity", N=2)])


def test_criterion_09_quasi_associativity():
    def minimal_r(reports):
        notes = [n for r in reports for n in r.notes if n.startswith("minimal r")]
        return [] if notes else ["no minimal r recorded"]

    _run(9, "quasi-associativity with p = x1^r (x1 + x2)^r, r <= 6", 600,
         [SuiteSpec("quasi-assoc", N=2, r_max=6)], minimal_r)


def test_criterion_10_classical_limit():
    _run(10, "classical limit and parity for r <= 3", 60,
         [SuiteSpec("classical-limit", N=N, R=3) for N in (2, 3)])


def test_criterion_11_confluence():
    _run(11, "rewrite confluence over 100 seeds and the swap involution", 120,
         [SuiteSpec("rewrite-confluence", N=2, K=3)])
