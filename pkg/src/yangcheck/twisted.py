"""Twist data, the series S^+(u) and S(u), the operators S_[n] and the
vertex and quasi-module maps, all acting on truncated matrix states."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import sympy

from .series import (
    Ctx,
    Form,
    Mat,
    Module,
    ScalarOp,
    form,
    form_add,
    form_scale,
    mat_left_const,
    mat_left_scalarop,
    matrix_op,
    rbar_op,
    scalarop_inverse,
    t_inverse,
)


@dataclass(frozen=True)
class TwistData:
    """Nonsingular G with G^t = sign * G."""

    G: tuple[tuple[Fraction, ...], ...]
    sign: int

    def __post_init__(self) -> None:
        rows = tuple(tuple(Fraction(x) for x in r) for r in self.G)
        object.__setattr__(self, "G", rows)
        N = len(rows)
        if N < 2 or any(len(r) != N for r in rows):
            raise ValueError("G must be a square matrix of size at least 2")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for i in range(N):
            for j in range(N):
                if rows[j][i] != self.sign * rows[i][j]:
                    raise ValueError("G^t must equal sign * G")
        if self.sign == -1 and N % 2:
            raise ValueError("symplectic twist needs even N")
        if sympy.Matrix(rows).det() == 0:
            raise ValueError("G is singular")

    @property
    def N(self) -> int:
        return len(self.G)

    @property
    def name(self) -> str:
        return "orthogonal" if self.sign == 1 else "symplectic"

    def inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        inv = sympy.Matrix(self.G).inv()
        return tuple(tuple(Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1]))
                           for x in inv.row(i)) for i in range(self.N))

    @classmethod
    def orthogonal(cls, N: int) -> TwistData:
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(N)) for i in range(N)), 1)

    @classmethod
    def symplectic(cls, N: int) -> TwistData:
        if N % 2:
            raise ValueError("symplectic twist needs even N")
        k = N // 2
        G = [[Fraction(0)] * N for _ in range(N)]
        for i in range(k):
            G[i][i + k] = Fraction(1)
            G[i + k][i] = Fraction(-1)
        return cls(tuple(map(tuple, G)), -1)

    @classmethod
    def parse(cls, text: str) -> TwistData:
        """Plain text: N, then N rows of rationals."""
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or len(lines[0]) != 1:
            raise ValueError("first line must hold N")
        N = int(lines[0][0])
        rows = lines[1:]
        if len(rows) != N or any(len(r) != N for r in rows):
            raise ValueError(f"expected {N} rows of {N} entries")
        G = tuple(tuple(Fraction(x) for x in r) for r in rows)
        sym = all(G[i][j] == G[j][i] for i in range(N) for j in range(N))
        return cls(G, 1 if sym else -1)

    @classmethod
    def from_file(cls, path: str | Path) -> TwistData:
        return cls.parse(Path(path).read_text())

    @classmethod
    def by_name(cls, name: str, N: int) -> TwistData:
        if name == "orthogonal":
            return cls.orthogonal(N)
        if name == "symplectic":
            return cls.symplectic(N)
        if name.startswith("file:"):
            tw = cls.from_file(name[5:])
            if tw.N != N:
                raise ValueError(f"twist file has N={tw.N}, expected {N}")
            return tw
        raise ValueError(f"unknown twist {name!r}")


def neg(f: Form) -> Form:
    return form_scale(f, -1)


def hshift(f: Form, s) -> Form:
    return form_add(f, form(("h", Fraction(s))))


class Twisted:
    """S-series on a vacuum module of level c."""

    def __init__(self, module: Module, twist: TwistData):
        if twist.N != module.N:
            raise ValueError("twist size differs from N")
        self.m = module
        self.ctx: Ctx = module.ctx
        self.tw = twist
        self.N = module.N
        self.c = module.V.level
        self.G = matrix_op(twist.G)
        self.Ginv = matrix_op(twist.inverse())
        self._rbt: dict = {}

    # -- single series -----------------------------------------------------
    def splus(self, M: Mat, leg: int, f: Form) -> Mat:
        """S^+(f) = T^+(f) G T^+t(-f) applied from the left."""
        m = self.m
        M = m.apply_T(M, leg, neg(f), plus=True, transposed=True)
        M = mat_left_const(M, self.G, (leg,))
        return m.apply_T(M, leg, f, plus=True)

    def s(self, M: Mat, leg: int, f: Form) -> Mat:
        """S(f) = T(f + hc) G T^t(-f)."""
        m = self.m
        M = m.apply_T(M, leg, neg(f), transposed=True)
        M = mat_left_const(M, self.G, (leg,))
        return m.apply_T(M, leg, hshift(f, self.c))

    def s_inv(self, M: Mat, leg: int, f: Form) -> Mat:
        m = self.m
        M = t_inverse(m, M, leg, hshift(f, self.c))
        M = mat_left_const(M, self.Ginv, (leg,))
        return t_inverse(m, M, leg, neg(f), transposed=True)

    def splus_inv(self, M: Mat, leg: int, f: Form) -> Mat:
        m = self.m
        M = t_inverse(m, M, leg, f, plus=True)
        M = mat_left_const(M, self.Ginv, (leg,))
        return t_inverse(m, M, leg, neg(f), plus=True, transposed=True)

    def rbar_t(self, f: Form, inverse: bool = False) -> ScalarOp:
        key = (f, inverse)
        if key not in self._rbt:
            op = rbar_op(self.ctx, f, self.N, transposed=True)
            self._rbt[key] = scalarop_inverse(self.ctx, op, self.N) if inverse else op
        return self._rbt[key]

    # -- S_[n] -------------------------------------------------------------
    def bracket_factors(self, plus: bool, us: Sequence[Form], z: Form = (),
                        reverse: bool = False) -> list:
        """Factors of S^+_[n](u|z) or S_[n](u|z), left to right."""
        out = []
        n = len(us)
        shift = Fraction(0) if plus else -self.c
        for i in range(n):
            out.append(("S+" if plus else "S", i, form_add(z, us[i])))
            for j in range(i + 1, n):
                arg = form_add(form_scale(z, -2), neg(us[i]), neg(us[j]), form(("h", shift)))
                out.append(("R", (i, j), arg))
        return out[::-1] if reverse else out

    def apply_factors(self, M: Mat, factors: list, offset: int = 0,
                      inverse: bool = False) -> Mat:
        """(product of factors) M, or (product)^-1 M."""
        seq = factors if inverse else factors[::-1]
        for kind, legs, arg in seq:
            if kind == "R":
                op = self.rbar_t(arg, inverse)
                M = mat_left_scalarop(self.ctx, op, (legs[0] + offset, legs[1] + offset), M)
            else:
                leg = legs + offset
                if kind == "S+":
                    M = self.splus_inv(M, leg, arg) if inverse else self.splus(M, leg, arg)
                else:
                    M = self.s_inv(M, leg, arg) if inverse else self.s(M, leg, arg)
        return M

    def s_bracket(self, M: Mat, plus: bool, us: Sequence[Form], z: Form = (),
                  offset: int = 0, inverse: bool = False, reverse: bool = False) -> Mat:
        return self.apply_factors(M, self.bracket_factors(plus, us, z, reverse), offset, inverse)

    def quasi_Y(self, M: Mat, us: Sequence[Form], z: Form, offset: int = 0,
                reverse: bool = False) -> Mat:
        """Y_M(T^+_[n](u) 1, z) = S^+_[n](u|z) S_[n](u|z + hc/2)^-1 applied to M."""
        zs = hshift(z, self.c / 2)
        M = self.s_bracket(M, False, us, zs, offset, inverse=True, reverse=reverse)
        return self.s_bracket(M, True, us, z, offset, reverse=reverse)


def vertex_Y(m: Module, M: Mat, us: Sequence[Form], z: Form, offset: int = 0) -> Mat:
    """Y(T^+_[n](u) 1, z) = T^+_[n](u|z) T_[n](u|z + hc/2)^-1 on V_c applied to M."""
    c = m.V.level
    n = len(us)
    for i in range(n):
        M = t_inverse(m, M, i + offset, hshift(form_add(z, us[i]), c / 2))
    for i in reversed(range(n)):
        M = m.apply_T(M, i + offset, form_add(z, us[i]), plus=True)
    return M
