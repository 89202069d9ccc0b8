from __future__ import annotations

from fractions import Fraction

import pytest

from yangcheck.engine import VacuumModule
from yangcheck.ncpoly import ONE, NormalOrderer
from yangcheck.series import Ctx, Module, compare, form, mat_from_state, mat_left_const
from yangcheck.twisted import Twisted, TwistData

VAC = {(0, ()): ONE}


def test_standard_twists():
    o = TwistData.orthogonal(3)
    assert o.sign == 1 and o.name == "orthogonal"
    s = TwistData.symplectic(4)
    assert s.sign == -1 and s.name == "symplectic"
    assert s.G[0][2] == 1 and s.G[2][0] == -1


def test_inverse():
    tw = TwistData.symplectic(2)
    Gi = tw.inverse()
    prod = [[sum(tw.G[i][k] * Gi[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert prod == [[1, 0], [0, 1]]


@pytest.mark.parametrize("G,sign", [
    (((1, 0), (0, 0)), 1),
    (((1, 2), (3, 1)), 1),
    (((0, 1, 0), (-1, 0, 0), (0, 0, 0)), -1),
    (((1,),), 1),
])
def test_invalid_twist(G, sign):
    with pytest.raises(ValueError):
        TwistData(G, sign)


def test_symplectic_needs_even_N():
    with pytest.raises(ValueError):
        TwistData.symplectic(3)


def test_parse_and_file(tmp_path):
    text = "2\n0 1\n-1 0\n"
    tw = TwistData.parse(text)
    assert tw == TwistData.symplectic(2)
    p = tmp_path / "g.txt"
    p.write_text("2\n2 1/2\n1/2 1\n")
    tw = TwistData.by_name(f"file:{p}", 2)
    assert tw.sign == 1 and tw.G[0][1] == Fraction(1, 2)
    with pytest.raises(ValueError):
        TwistData.by_name(f"file:{p}", 3)
    with pytest.raises(ValueError):
        TwistData.by_name("unitary", 2)
    with pytest.raises(ValueError):
        TwistData.parse("2\n1 0\n")


@pytest.mark.parametrize("name", ["orthogonal", "symplectic"])
@pytest.mark.parametrize("c", [0, -1, Fraction(1, 2)])
def test_s_on_vacuum_is_G(name, c):
    N = 2
    ctx = Ctx(["u"], 3, {"u": 6})
    T = Twisted(Module(ctx, VacuumModule(N, c, NormalOrderer(7))), TwistData.by_name(name, N))
    I = mat_from_state(ctx, 1, N, VAC)
    resid, caps, complete = compare(ctx, T.s(I, 0, form("u")), mat_left_const(I, T.G, (0,)))
    assert not resid


def test_s_inverse_roundtrip():
    N = 2
    ctx = Ctx(["u"], 3, {"u": 6})
    T = Twisted(Module(ctx, VacuumModule(N, 0, NormalOrderer(7))), TwistData.orthogonal(N))
    state = {(0, ((1, 0, 1),)): ONE}
    M = mat_from_state(ctx, 1, N, state)
    back = T.splus_inv(T.splus(M, 0, form("u")), 0, form("u"))
    resid, _, _ = compare(ctx, back, M)
    assert not resid


def test_twist_size_mismatch():
    ctx = Ctx(["u"], 2)
    with pytest.raises(ValueError):
        Twisted(Module(ctx, VacuumModule(2, 0)), TwistData.orthogonal(3))
