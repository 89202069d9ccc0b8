from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from yangcheck.series import Ctx, TruncationError, form, mat_from_state, mat_state

small = st.fractions(min_value=-3, max_value=3, max_denominator=3).filter(lambda x: x != 0)


@given(small, small, st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_negative_power_matches_sympy(b, c, e):
    # (u + b v + c h)^-e expanded in u, compared with sympy's series
    ctx = Ctx(["u", "v"], 4, {"v": 3})
    got = ctx.power(form("u", ("v", b), ("h", c)), -e)
    u, v, h, t = sympy.symbols("u v h t")
    expr = (u + sympy.Rational(b.numerator, b.denominator) * v
            + sympy.Rational(c.numerator, c.denominator) * h) ** (-e)
    # scale the subleading variables by t and expand in t
    ser = sympy.series(expr.subs({v: t * v, h: t * h}), t, 0, 7).removeO().subs(t, 1)
    poly = sympy.Poly(sympy.expand(ser * u ** (e + 6)), u, v, h)
    want = {}
    for (pu, pv, ph), coef in poly.terms():
        if pv <= 3 and ph <= 3:
            want[(ph, pu - e - 6, pv)] = Fraction(int(coef.p), int(coef.q))
    caps = ctx.power_caps(form("u", ("v", b), ("h", c)), -e)
    got = {k: Fraction(int(x.numerator), int(x.denominator))
           for k, x in got.items() if all(a <= m for a, m in zip(k, caps))}
    assert got == want


def test_positive_power_is_exact():
    ctx = Ctx(["u"], 3)
    assert ctx.power_caps(form("u", "h"), 2) == ctx.exact
    p = ctx.power(form("u", "h"), 2)
    assert p == {(0, 2): 1, (1, 1): 2, (2, 0): 1}


def test_uncapped_expansion_raises():
    ctx = Ctx(["u", "v"], 3)
    with pytest.raises(TruncationError):
        ctx.power(form("u", "v"), -1)


def test_state_roundtrip():
    ctx = Ctx(["u"], 3)
    state = {(0, ()): 1, (1, ((1, 0, 1),)): Fraction(1, 2)}
    M = mat_from_state(ctx, 0, 2, state)
    back = {(e[0], w): x for (e, w), x in mat_state(M).items()}
    assert back == state
