from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yangcheck.exact import FIELD, var
from yangcheck.tensor import (
    LegSpace,
    TensorOperator,
    antisymmetrizer,
    crossing_residuals,
    embed,
    identity,
    lr_product,
    multiply,
    multiply_all,
    partial_trace,
    permutation_P,
    product_R_nm,
    rl_product,
    trace,
    transpose_leg,
    unitarity_residual,
    yang_R,
    ybe_residual,
)


@st.composite
def operators(draw, n=2, N=2):
    sp = LegSpace(n, N)
    idx = list(sp.indices())
    entries = draw(st.dictionaries(
        st.tuples(st.sampled_from(idx), st.sampled_from(idx)),
        st.fractions(min_value=-5, max_value=5, max_denominator=4), max_size=8))
    return TensorOperator(sp, entries)


@pytest.mark.parametrize("N", [2, 3])
def test_ybe_exact(N):
    assert ybe_residual(N).is_zero()


def test_ybe_detects_wrong_shift():
    # R12(u) R13(u) R23(v) is not a solution: the middle argument must be u + v
    u, v = var("u"), var("v")
    r12 = embed(yang_R(u, 2), (0, 1), 3, FIELD.one)
    r13 = embed(yang_R(u, 2), (0, 2), 3, FIELD.one)
    r23 = embed(yang_R(v, 2), (1, 2), 3, FIELD.one)
    assert not (multiply_all([r12, r13, r23]) - multiply_all([r23, r13, r12])).is_zero()


@pytest.mark.parametrize("N,K", [(2, 4), (3, 3)])
def test_unitarity(N, K):
    assert unitarity_residual(N, K).is_zero()


@pytest.mark.parametrize("N", [2, 3])
def test_crossing_all_forms(N):
    res = crossing_residuals(N, 4)
    assert set(res) == {"transpose", "lr", "rl"}
    assert all(r.is_zero() for r in res.values())


def test_antisymmetrizer_n2():
    A = antisymmetrizer(2)
    half = Fraction(1, 2)
    assert A == (identity(2, 2) - permutation_P(2)).scale(half)
    assert multiply(A, A) == A


def test_antisymmetrizer_trace_one():
    assert trace(antisymmetrizer(3)) == 1


def test_permutation_squared_identity():
    P = permutation_P(3)
    assert multiply(P, P) == identity(2, 3)


def test_yang_R_zero_argument():
    with pytest.raises(ValueError):
        yang_R(0, 2)


def test_leg_space_validation():
    with pytest.raises(ValueError):
        LegSpace(1, 1)
    with pytest.raises(ValueError):
        TensorOperator(LegSpace(1, 2), {((2,), (0,)): 1})


@given(operators(), operators())
def test_transpose_is_antimultiplicative_on_full_transpose(a, b):
    # (ab)^t = b^t a^t for the transpose on all legs
    def full(x):
        return transpose_leg(transpose_leg(x, 0), 1)
    assert full(multiply(a, b)) == multiply(full(b), full(a))


@given(operators())
def test_transpose_involution(a):
    assert transpose_leg(transpose_leg(a, 1), 1) == a


@given(operators(), operators())
def test_embed_is_multiplicative(a, b):
    ea = embed(a, (0, 2), 3)
    eb = embed(b, (0, 2), 3)
    assert multiply(ea, eb) == embed(multiply(a, b), (0, 2), 3)


@given(operators())
def test_partial_trace_of_embedding(a):
    # tracing out an identity leg multiplies by N
    e = embed(a, (0, 1), 3)
    assert partial_trace(e, (2,)) == a.scale(2)


@given(operators(), operators())
def test_trace_cyclic(a, b):
    assert trace(multiply(a, b)) == trace(multiply(b, a))


def _pure(x, y):
    return multiply(embed(x, (0,), 2), embed(y, (1,), 2))


@given(operators(n=1), operators(n=1), operators(n=1), operators(n=1))
def test_lr_rl_on_pure_tensors(x, y, z, w):
    a, b = _pure(x, y), _pure(z, w)
    assert lr_product(a, b) == _pure(multiply(x, z), multiply(w, y))
    assert rl_product(a, b) == _pure(multiply(z, x), multiply(y, w))


def test_product_R_nm_single_factor():
    u, v = var("u"), var("v")
    assert product_R_nm(2, [u], [v]) == yang_R(u - v, 2)


def test_product_R_nm_order():
    # plain: inner product over j runs backward
    u, v1, v2 = var("u"), var("v1"), var("v2")
    r1 = embed(yang_R(u - v1, 2), (0, 1), 3, FIELD.one)
    r2 = embed(yang_R(u - v2, 2), (0, 2), 3, FIELD.one)
    assert product_R_nm(2, [u], [v1, v2]) == multiply(r2, r1)
    assert product_R_nm(2, [u], [v1, v2], variant="underline") == \
        multiply(embed(yang_R(u + v1, 2), (0, 1), 3, FIELD.one),
                 embed(yang_R(u + v2, 2), (0, 2), 3, FIELD.one))


def test_product_R_nm_invalid_variant():
    with pytest.raises(ValueError):
        product_R_nm(2, [var("u")], [var("v")], variant="weird")
