"""Each suite must notice a deliberately broken ingredient."""
from __future__ import annotations

import pytest

from yangcheck import SuiteSpec, run_suite
from yangcheck import checks
from yangcheck.twisted import Twisted


def test_welldef_needs_the_swap(monkeypatch):
    spec = SuiteSpec("welldef", twist="orthogonal", level=0, K=2, window=(-3, 3))
    assert run_suite(spec).status == "verified"
    monkeypatch.setattr(checks, "mat_swap_rows", lambda M, a, b: M)
    assert run_suite(spec).status == "failed"


def test_module_xxx5_needs_the_reversal(monkeypatch):
    real = Twisted.bracket_factors
    monkeypatch.setattr(checks, "_lemma31_exact", lambda N, n, t: None)
    spec = SuiteSpec("lemma31", twist="orthogonal", window=(-3, 3))
    assert run_suite(spec).status == "verified"
    monkeypatch.setattr(Twisted, "bracket_factors",
                        lambda self, plus, us, z=(), reverse=False: real(self, plus, us, z, False))
    assert run_suite(spec).status == "failed"


@pytest.mark.parametrize("delta", [1, -1])
def test_rtt3_detects_a_wrong_shift(monkeypatch, delta):
    real = checks.vacuum
    spec = SuiteSpec("rtt-series", K=3, D=1, R=1, window=(-3, 3), level=-2)
    assert run_suite(spec).status == "verified"
    monkeypatch.setattr(checks, "vacuum", lambda N, c, K: real(N, c + delta, K))
    rep = run_suite(spec)
    assert rep.status == "failed"
    assert rep.residual["check"].startswith("rtt3")


def test_ybe_detects_a_wrong_matrix(monkeypatch):
    from yangcheck import tensor
    real = tensor.yang_R
    # R(u^2) has the right shape but does not solve the equation
    monkeypatch.setattr(tensor, "yang_R", lambda arg, N: real(arg * arg, N))
    assert run_suite(SuiteSpec("ybe")).status == "failed"
