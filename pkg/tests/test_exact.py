from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yangcheck.exact import (
    FIELD,
    TruncatedSeries,
    as_ratfunc,
    const,
    evaluate,
    expand_inverse_linear,
    g_residual,
    ratfunc_arith,
    ratfunc_to_series,
    series_invert,
    solve_g_series,
    var,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_ratfunc_cancels_to_canonical_form():
    u, h = var("u"), var("h")
    f = (u ** 2 - h ** 2) / (u - h)
    assert f == u + h
    assert ratfunc_arith(u, u, "-") == FIELD.zero


def test_division_by_zero_ratfunc():
    with pytest.raises(ZeroDivisionError):
        ratfunc_arith(var("u"), 0, "/")


def test_unknown_variable():
    with pytest.raises(ValueError):
        var("t9")


@given(rationals, rationals, rationals)
def test_field_axioms_at_points(a, b, x):
    u = var("u")
    f = as_ratfunc(a) * u + const(b)
    g = u * u + const(1)
    point = {"u": x}
    assert evaluate(f * g, point) == evaluate(f, point) * evaluate(g, point)
    assert evaluate(f + g, point) == evaluate(f, point) + evaluate(g, point)


def test_series_invert_geometric():
    s = TruncatedSeries((Fraction(1), Fraction(-1)), 6)
    inv = series_invert(s)
    assert inv.coeffs == tuple(Fraction(1) for _ in range(6))
    assert (s * inv) == TruncatedSeries.constant(Fraction(1), 6)


@given(st.lists(rationals, min_size=1, max_size=5), st.integers(1, 6))
def test_series_inverse_property(cs, prec):
    if cs[0] == 0:
        cs[0] = Fraction(1)
    s = TruncatedSeries(tuple(cs), prec)
    assert s * series_invert(s) == TruncatedSeries.constant(Fraction(1), prec)


def test_precision_is_min_of_operands():
    a = TruncatedSeries((1, 2, 3), 3)
    b = TruncatedSeries((1, 1), 2)
    assert (a + b).precision == 2
    assert (a * b).precision == 2


def test_ratfunc_to_series_inverts_h_denominator():
    u, h = var("u"), var("h")
    s = ratfunc_to_series(1 / (u - h), 4)
    for k in range(4):
        assert s.coeff(k) == 1 / u ** (k + 1)


def test_expand_inverse_linear_binomial():
    # (u + h)^-1 = sum (-h)^m u^(-1-m)
    exp = expand_inverse_linear((("u", 1), ("h", 1)), -1, "u", (-5, 5), precision=5)
    for m in range(4):
        c = exp.coefficient(-1 - m)
        assert c.coeff(m) == const((-1) ** m)


def test_expand_inverse_linear_rejects_positive_power():
    with pytest.raises(ValueError):
        expand_inverse_linear((("u", 1),), 1, "u", (-3, 3))


@pytest.mark.parametrize("N", [2, 3, 4])
def test_g_first_coefficient(N):
    assert solve_g_series(N, 4)[1] == Fraction(1, N)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_g_functional_equation_residual(N):
    assert not any(g_residual(solve_g_series(N, 12), 10))


def test_g_invalid():
    with pytest.raises(ValueError):
        solve_g_series(1, 3)
