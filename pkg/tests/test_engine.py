from __future__ import annotations

from fractions import Fraction

import pytest

from yangcheck import SuiteSpec, run_suite
from yangcheck.engine import VacuumModule
from yangcheck.ncpoly import ONE, NormalOrderer


def test_rejects_small_N():
    with pytest.raises(ValueError):
        VacuumModule(1, 0)


@pytest.mark.parametrize("N", [2, 3])
def test_vacuum_is_annihilated(N):
    V = VacuumModule(N, Fraction(-1), NormalOrderer(4))
    act = V.t_on_word((), 3)
    assert act == {(a, a): {(0, 0, ()): ONE} for a in range(N)}


@pytest.mark.parametrize("c", [0, Fraction(-2), Fraction(1, 2)])
def test_identity_mod_h(c):
    # T(u) = 1 + O(h) on every word
    V = VacuumModule(2, c, NormalOrderer(4))
    word = ((1, 0, 1), (2, 1, 1))
    act = V.t_on_word(word, 1)
    assert {(0, 0), (1, 1)} <= set(act)
    for (a, b), st in act.items():
        assert all(k == 0 and p == 0 for (k, p, _) in st)
        assert st == ({(0, 0, word): ONE} if a == b else {})


def test_level_enters_only_beyond_h0():
    word = ((1, 0, 1),)
    lo = [VacuumModule(2, c, NormalOrderer(5)).t_on_word(word, 1) for c in (0, 3)]
    assert lo[0] == lo[1]
    hi = [VacuumModule(2, c, NormalOrderer(5)).t_on_word(word, 3) for c in (0, 3)]
    assert hi[0] != hi[1]


def test_small_rtt_series_verifies():
    rep = run_suite(SuiteSpec("rtt-series", N=2, K=2, D=1, R=1, window=(-3, 3)))
    assert rep.status == "verified", rep.residual
