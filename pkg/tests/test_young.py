from __future__ import annotations

from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yangcheck.tensor import antisymmetrizer, multiply
from yangcheck.young import (
    GroupAlgebraElement,
    StandardTableau,
    YoungDiagram,
    act_on_tensor,
    contents,
    diagrams_up_to,
    enumerate_standard_tableaux,
    fuse,
    fuse_group_algebra,
    hook_product,
    jucys_murphy,
    seminormal_idempotent,
)


def test_contents_of_hook():
    U = StandardTableau.parse("1 2/3")
    assert contents(U) == (0, 1, -1)


def test_parse_roundtrip():
    U = StandardTableau.parse("1,2;3")
    assert str(U) == "1 2/3"
    assert U.shape == YoungDiagram((2, 1))


def test_invalid_tableau():
    with pytest.raises(ValueError):
        StandardTableau(((2, 1),))
    with pytest.raises(ValueError):
        YoungDiagram((1, 2))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_standard_tableaux_count_matches_hook_formula(n):
    for nu in diagrams_up_to(n):
        if nu.n != n:
            continue
        assert len(enumerate_standard_tableaux(nu)) == factorial(n) // hook_product(nu)


def test_diagrams_respect_row_bound():
    assert all(d.rows <= 2 for d in diagrams_up_to(4, 2))


@pytest.mark.parametrize("N", [2, 3])
def test_fusion_matches_seminormal(N):
    for nu in diagrams_up_to(3, N):
        for U in enumerate_standard_tableaux(nu):
            E = fuse(U, N)
            assert E == act_on_tensor(seminormal_idempotent(U), N)
            assert multiply(E, E) == E


@pytest.mark.parametrize("N", [2, 3])
def test_column_tableau_is_antisymmetrizer(N):
    col = StandardTableau(tuple((k,) for k in range(1, N + 1)))
    assert fuse(col, N) == antisymmetrizer(N)


def test_fuse_rejects_too_many_rows():
    with pytest.raises(ValueError):
        fuse(StandardTableau(((1,), (2,), (3,))), 2)


@given(st.sampled_from([U for nu in diagrams_up_to(4) for U in enumerate_standard_tableaux(nu)]))
def test_seminormal_idempotents_are_orthogonal_and_eigen(U):
    n = U.n
    E = seminormal_idempotent(U)
    assert E * E == E
    for k, c in enumerate(contents(U)):
        assert jucys_murphy(n, k) * E == E * c
    for V in enumerate_standard_tableaux(U.shape):
        if V != U:
            assert (E * seminormal_idempotent(V)).is_zero()


def test_group_algebra_fusion_sums_to_identity():
    n = 3
    total = GroupAlgebraElement(n, {})
    for nu in diagrams_up_to(n):
        if nu.n == n:
            for U in enumerate_standard_tableaux(nu):
                total = total + fuse_group_algebra(U)
    assert total == GroupAlgebraElement.identity(n)
