"""Suite parameters, residual bookkeeping and verification reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .ncpoly import format_word
from .series import INF
from .twisted import TwistData
from .young import StandardTableau, YoungDiagram

SCHEMA_VERSION = 1

VERIFIED = "verified"
FAILED = "failed"
INCONCLUSIVE = "inconclusive-truncation"

EXIT_CODES = {VERIFIED: 0, FAILED: 1, INCONCLUSIVE: 2}
USAGE_EXIT = 64


@dataclass(frozen=True)
class SuiteSpec:
    """Parameters of one suite run.  ``twist`` and ``level`` may be None, in
    which case the suite uses its own defaults (both twists, suite levels)."""

    name: str
    N: int = 2
    twist: str | None = None
    level: Fraction | None = None
    K: int = 3
    D: int = 2
    R: int | None = None
    window: tuple[int, int] = (-6, 6)
    nu: YoungDiagram | None = None
    tableau: StandardTableau | None = None
    r_max: int = 6
    shapes: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.K < 1 or self.D < 0 or (self.R is not None and self.R < 1) or self.r_max < 0:
            raise ValueError("truncation parameters must be positive")
        lo, hi = self.window
        if lo > hi:
            raise ValueError("window lower end exceeds upper end")
        if self.level is not None:
            object.__setattr__(self, "level", Fraction(self.level))
        if self.tableau is not None and self.nu is not None and self.tableau.shape != self.nu:
            raise ValueError("tableau shape differs from nu")
        if self.shapes is not None:
            shapes = tuple(tuple(x) for x in self.shapes)
            if not shapes or any(x not in ((1, 1), (2, 1), (1, 2)) for x in shapes):
                raise ValueError("shapes must be drawn from (1, 1), (2, 1), (1, 2)")
            object.__setattr__(self, "shapes", shapes)

    def twists(self) -> list[TwistData]:
        if self.twist is not None:
            return [TwistData.by_name(self.twist, self.N)]
        out = [TwistData.orthogonal(self.N)]
        if self.N % 2 == 0:
            out.append(TwistData.symplectic(self.N))
        return out

    def levels(self, default) -> list[Fraction]:
        if self.level is not None:
            return [self.level]
        return [Fraction(c) for c in default]

    def modes(self, default: int = 3) -> int:
        return default if self.R is None else self.R

    def params(self) -> dict:
        out = {
            "N": self.N,
            "twist": self.twist or "both",
            "level": str(self.level) if self.level is not None else "default",
            "h_order": self.K,
            "degree": self.D,
            "modes": self.R if self.R is not None else "default",
            "window": list(self.window),
            "r_max": self.r_max,
        }
        if self.nu is not None:
            out["nu"] = list(self.nu.partition)
        if self.tableau is not None:
            out["tableau"] = str(self.tableau)
        if self.shapes is not None:
            out["shapes"] = [list(x) for x in self.shapes]
        return out


@dataclass
class Tally:
    """Accumulates exact residual checks of one suite run."""

    K: int | None = None
    windows: dict = field(default_factory=dict)
    checks: int = 0
    failures: list = field(default_factory=list)
    incomplete: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    exact_region: dict = field(default_factory=dict)

    def record(self, label: str, resid: list, caps: tuple | None = None,
               complete: bool = True, names: tuple | None = None) -> bool:
        """Record one comparison from ``series.compare``; returns True if clean."""
        self.checks += 1
        if caps is not None and names is not None:
            for name, cap in zip(names[1:], caps[1:]):
                if cap < INF:
                    prev = self.exact_region.get(name)
                    self.exact_region[name] = cap if prev is None else min(prev, cap)
        if resid:
            key, e, w, c = sorted(resid, key=lambda t: (t[1], str(t[0]), t[2]))[0]
            where = _location(key, e, w, names)
            self.failures.append((label, where, str(c), len(resid)))
            return False
        if not complete:
            self.incomplete.append(label)
        return True

    def exact(self, label: str, ok: bool, where: str = "", value: str = "", count: int = 1) -> bool:
        """Record a check that is exact (no truncation involved)."""
        self.checks += 1
        if not ok:
            self.failures.append((label, where, value, count))
        return ok

    def inconclusive(self, label: str) -> None:
        self.checks += 1
        self.incomplete.append(label)

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def status(self) -> str:
        if self.failures:
            return FAILED
        if self.incomplete or not self.checks:
            return INCONCLUSIVE
        return VERIFIED

    def precision(self, extra: str = "") -> str:
        parts = []
        if self.K is not None:
            parts.append(f"mod h^{self.K}")
        for name, (lo, hi) in sorted(self.windows.items()):
            parts.append(f"{name} in [{lo}, {hi}]")
        if self.exact_region:
            region = ", ".join(f"{n} <= {c}" for n, c in sorted(self.exact_region.items()))
            parts.append(f"exact region {region}")
        if extra:
            parts.append(extra)
        return "; ".join(parts) if parts else "exact"


def _location(key, e, w, names) -> str:
    exps = ""
    if names is not None:
        exps = " ".join(f"{n}^{x}" for n, x in zip(names, e) if x)
    else:
        exps = str(e)
    entry = "" if key == ((), ()) else f"entry {key} "
    return f"{entry}{exps or '1'} {format_word(w)}".strip()


@dataclass
class VerificationReport:
    suite: str
    params: dict
    status: str
    precision: str
    residual: dict | None
    elapsed_ms: int
    checks: int = 0
    notes: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    @classmethod
    def from_tally(cls, spec: SuiteSpec, tally: Tally, elapsed_ms: int,
                   extra: str = "") -> VerificationReport:
        residual = None
        if tally.failures:
            label, where, value, count = tally.failures[0]
            residual = {
                "check": label,
                "location": where,
                "value": value,
                "nonzero_terms": sum(f[3] for f in tally.failures),
                "failed_checks": len(tally.failures),
            }
        elif tally.incomplete:
            residual = {"incomplete_checks": sorted(set(tally.incomplete))}
        return cls(spec.name, spec.params(), tally.status, tally.precision(extra), residual,
                   elapsed_ms, tally.checks, list(tally.notes))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "params": self.params,
            "status": self.status,
            "precision": self.precision,
            "residual": self.residual,
            "checks": self.checks,
            "notes": self.notes,
            "elapsed_ms": self.elapsed_ms,
        }


def emit_report(report: VerificationReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"{report.suite}: {report.status} ({report.checks} checks, {report.elapsed_ms} ms)",
             f"  precision: {report.precision}"]
    if report.residual:
        for k, v in sorted(report.residual.items()):
            lines.append(f"  {k}: {v}")
    for n in report.notes:
        lines.append(f"  note: {n}")
    return "\n".join(lines)

