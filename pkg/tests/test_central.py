from __future__ import annotations

from itertools import product
from math import comb

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from yangcheck.central import (
    generator_family,
    img64,
    leading_symbol,
    mc_basis,
    s_generator,
    sigma,
)
from yangcheck.ncpoly import NormalOrderer, is_sorted
from yangcheck.twisted import TwistData

TWISTS = [TwistData.orthogonal(2), TwistData.symplectic(2), TwistData.orthogonal(3),
          TwistData.symplectic(4)]


def _clean(d):
    return {k: v for k, v in d.items() if v}


@pytest.mark.parametrize("i", [0, 1, 2])
def test_orthogonal_diagonal_generator(i):
    tw = TwistData.orthogonal(3)
    assert leading_symbol(tw, 1, i, i) == {(i, i): 2}


def test_orthogonal_r1_is_symmetric():
    tw = TwistData.orthogonal(3)
    for i, j in product(range(3), range(3)):
        assert _clean(img64(tw, 1, i, j)) == _clean(img64(tw, 1, j, i))


@given(st.sampled_from(TWISTS), st.integers(1, 5), st.data())
def test_leading_symbol_and_parity(tw, r, data):
    i = data.draw(st.integers(0, tw.N - 1))
    j = data.draw(st.integers(0, tw.N - 1))
    img = _clean(img64(tw, r, i, j))
    assert leading_symbol(tw, r, i, j) == img
    assert _clean(sigma(tw, img)) == {k: (-1) ** r * v for k, v in img.items()}


def _eigenspace_dim(tw, eps):
    # dimension of {A in gl_N : sigma(A) = eps A}, from the matrix of sigma
    N = tw.N
    units = list(product(range(N), range(N)))
    cols = []
    for ab in units:
        img = sigma(tw, {ab: 1})
        cols.append([sympy.Rational(str(img.get(k, 0))) for k in units])
    S = sympy.Matrix(cols).T
    return len(units) - (S - eps * sympy.eye(len(units))).rank()


@pytest.mark.parametrize("tw", TWISTS, ids=lambda t: f"{t.name}{t.N}")
def test_generator_family_spans_sigma_eigenspaces(tw):
    fam = generator_family(tw, 2)
    for r in (1, 2):
        n = sum(1 for g in fam if g[0] == r)
        assert n == _eigenspace_dim(tw, (-1) ** r)


def test_s_generator_h_correction():
    tw = TwistData.orthogonal(2)
    s = s_generator(tw, 1, 0, 0)
    assert s[(0, ((1, 0, 0),))] == 2
    assert s[(1, ((1, 0, 0), (1, 0, 0)))] == -1


@pytest.mark.parametrize("tw", TWISTS[:2], ids=lambda t: t.name)
def test_mc_basis_shape(tw):
    no = NormalOrderer(3)
    vecs = mc_basis(tw, no, 2, 2, 3)
    n = len(generator_family(tw, 2))
    assert len(vecs) == sum(comb(n + k - 1, k) for k in range(3))
    assert vecs[0][0] == "1"
    for _, v in vecs:
        assert all(is_sorted(w) for (_, w) in v)
    labels = [lab for lab, _ in vecs]
    assert len(set(labels)) == len(labels)
