"""Suite registry and the runner that turns a SuiteSpec into a report."""
from __future__ import annotations

import gc
import time
from typing import Callable

from . import checks
from .report import INCONCLUSIVE, SuiteSpec, Tally, VerificationReport, emit_report
from .series import TruncationError

# name -> (body, anchor identity)
REGISTRY: dict[str, tuple[Callable, str]] = {
    "ybe": (checks.ybe, "ybe"),
    "unitarity": (checks.unitarity, "uni"),
    "crossing": (checks.crossing, "csym/csym2"),
    "g-series": (checks.g_series, "functional equation of g"),
    "rtt-series": (checks.rtt_series, "rtt1-rtt3"),
    "srel": (checks.srel, "srel1/srel2"),
    "usflg": (checks.usflg, "usflg"),
    "rsrs": (checks.rsrs, "RSRS1-RSRS3"),
    "rsrs-multi": (checks.rsrs_multi, "rsrs12/rsrs22/rsrs32"),
    "shuffle": (checks.shuffle, "prf2/prfx"),
    "fusion": (checks.fusion, "fusion"),
    "welldef": (checks.welldef, "exprr3/exprr4"),
    "quasi-assoc": (checks.quasi_assoc, "mod2"),
    "quantum-current": (checks.quantum_current, "quantum current relation"),
    "centrality-critical": (checks.centrality_critical, "central elements A_nu"),
    "lemma31": (checks.lemma31, "xxx1-xxx5"),
    "invariants": (checks.invariants, "invariance of M_nu"),
    "commute-invariants": (checks.commute_invariants, "commuting M_nu coefficients"),
    "center-commute": (checks.center_commute, "commuting A_nu images"),
    "invariant-generation": (checks.invariant_generation, "invariants from central vectors"),
    "sdet-identity": (checks.sdet_identity, "quasi-module image of qdet"),
    "gamma-factorization": (checks.gamma_factorization, "A(u) = gamma(u) qdet factors"),
    "classical-limit": (checks.classical_limit, "img64"),
    "rewrite-confluence": (checks.rewrite_confluence, "engine self-check"),
}


def suite_names() -> list[str]:
    return list(REGISTRY)


def run_suite(spec: SuiteSpec) -> VerificationReport:
    """Run one suite.  Invalid parameters raise ValueError; running out of
    truncation room is reported as inconclusive."""
    if spec.name not in REGISTRY:
        raise ValueError(f"unknown suite {spec.name!r}")
    body, _ = REGISTRY[spec.name]
    tally = Tally()
    start = time.perf_counter()
    extra = ""
    # the series code allocates millions of acyclic dicts and tuples; cyclic
    # collection during a run only rescans the long-lived caches
    paused = gc.isenabled()
    gc.disable()
    try:
        extra = body(spec, tally) or ""
    except TruncationError as exc:
        tally.inconclusive(f"truncation: {exc}")
    finally:
        if paused:
            gc.enable()
        gc.collect()
    elapsed = int((time.perf_counter() - start) * 1000)
    report = VerificationReport.from_tally(spec, tally, elapsed, extra)
    if report.status == INCONCLUSIVE and not tally.checks:
        report.residual = {"incomplete_checks": ["no checks ran"]}
    return report


__all__ = ["REGISTRY", "run_suite", "emit_report", "suite_names"]
