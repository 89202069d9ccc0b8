"""Exact verification of R-matrix, double Yangian and twisted Yangian identities."""
from __future__ import annotations

from .report import SuiteSpec, VerificationReport, emit_report
from .suites import REGISTRY, run_suite

__version__ = "0.1.0"

__all__ = ["REGISTRY", "SuiteSpec", "VerificationReport", "emit_report", "run_suite"]
