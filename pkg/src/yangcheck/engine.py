"""Action of the annihilation series T(u) on the vacuum module V_c.

States are normal-ordered NCPolys.  For a PBW word w = x^(s)_kl w' the
relation

    T_1(u) T^+_2(v) = Rbar(u-v+hc/2)^-1 T^+_2(v) T_1(u) Rbar(u-v-hc/2)

applied to w' and read off at v^(s-1) gives t_ab(u) w in terms of the
action on the shorter word w'.  Unitarity supplies the inverse
Rbar(x)^-1 = Rbar(-x).  Each level of the recursion divides by h once, so
the inner word is processed at one more order of h.

The result of t_ab(u) on a word is a dict {(k, p, word): c} meaning
sum c h^k u^-p word.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

from gmpy2 import mpq

from .exact import solve_g_series
from .ncpoly import ONE, NormalOrderer, Word

State = dict  # {(k, word): c}
UState = dict  # {(k, p, word): c}


def _add(d: dict, key, v) -> None:
    x = d.get(key, 0) + v
    if x:
        d[key] = x
    else:
        d.pop(key, None)


class VacuumModule:
    """Truncated vacuum module V_c over the double Yangian of gl_N."""

    def __init__(self, N: int, level, orderer: NormalOrderer | None = None):
        if N < 2:
            raise ValueError("N must be at least 2")
        self.N = N
        self.level = Fraction(level)
        self.c = mpq(self.level.numerator, self.level.denominator)
        self.no = orderer or NormalOrderer(64)
        self._t: dict[tuple[Word, int], dict] = {}
        self._scal: dict[tuple[int, int], dict] = {}
        self._g: list[mpq] = []

    def g(self, P: int) -> list[mpq]:
        if len(self._g) < P:
            gs = solve_g_series(self.N, P)
            self._g = [mpq(x.numerator, x.denominator) for x in gs.coeffs]
        return self._g

    # -- scalar series from the normalized R-matrix ---------------------
    def _inv_pow(self, j: int, alpha: mpq, P: int, qmax: int) -> dict:
        """(u - v + alpha h)^-j as {(k, p, q): c} for h^k u^-p v^q."""
        if j == 0:
            return {(0, 0, 0): ONE}
        out: dict = {}
        for m in range(0, P + qmax):
            cm = comb(j + m - 1, m)
            for i in range(0, min(m, qmax) + 1):
                k = m - i
                if k >= P:
                    continue
                c = cm * comb(m, i) * (-alpha) ** k
                if c:
                    _add(out, (k, j + m, i), mpq(c))
        return out

    @staticmethod
    def _mul(a: dict, b: dict, P: int, qmax: int) -> dict:
        out: dict = {}
        for (k1, p1, q1), c1 in a.items():
            for (k2, p2, q2), c2 in b.items():
                k, q = k1 + k2, q1 + q2
                if k < P and q <= qmax:
                    _add(out, (k, p1 + p2, q), c1 * c2)
        return out

    def _phi_psi(self, sigma: int, alpha: mpq, P: int, qmax: int) -> tuple[dict, dict]:
        g = self.g(P + 1)
        phi: dict = {}
        psi: dict = {}
        for j in range(0, P):
            base = self._inv_pow(j, alpha, P, qmax)
            f = g[j] * sigma ** j
            for (k, p, q), c in base.items():
                if k + j < P:
                    _add(phi, (k + j, p, q), f * c)
        for j in range(0, P):
            base = self._inv_pow(j + 1, alpha, P, qmax)
            f = g[j] * sigma ** (j + 1)
            for (k, p, q), c in base.items():
                if k + j + 1 < P:
                    _add(psi, (k + j + 1, p, q), f * c)
        return phi, psi

    def _scalars(self, P: int, qmax: int) -> dict:
        key = (P, qmax)
        if key not in self._scal:
            half = self.c / 2
            phi_m, psi_m = self._phi_psi(-1, half, P, qmax)
            phi_p, psi_p = self._phi_psi(1, -half, P, qmax)
            m = self._mul
            self._scal[key] = {
                "pp": m(phi_m, phi_p, P, qmax),
                "ps": m(phi_m, psi_p, P, qmax),
                "sp": m(psi_m, phi_p, P, qmax),
                "ss": m(psi_m, psi_p, P, qmax),
            }
        return self._scal[key]

    # -- the recursion ----------------------------------------------------
    def t_on_word(self, word: Word, P: int) -> dict:
        """{(a, b): UState} for t_ab(u) word, modulo h^P."""
        key = (word, P)
        hit = self._t.get(key)
        if hit is not None:
            return hit
        N = self.N
        if P <= 0:
            res = {}
        elif not word:
            res = {(a, a): {(0, 0, ()): ONE} for a in range(N)}
        else:
            res = self._recurse(word, P)
        self._t[key] = res
        return res

    def _recurse(self, word: Word, P: int) -> dict:
        N = self.N
        s, kk, ll = word[0]
        rest = word[1:]
        P1 = P + 1
        qmax = s - 1
        inner = self.t_on_word(rest, P1)
        scal = self._scalars(P1, qmax)
        tt_cache: dict = {}

        def tt(p: int, q: int, i: int, j: int) -> dict:
            """t+_pq(v) t_ij(u) rest as {q_v: {(k, pu, w): c}}."""
            key = (p, q, i, j)
            if key in tt_cache:
                return tt_cache[key]
            y = inner.get((i, j), {})
            out: dict = {}
            if p == q and y:
                out[0] = dict(y)
            for r in range(1, qmax + 2):
                sym = (r, p, q)
                bucket = out.setdefault(r - 1, {})
                for (k, pu, w), c in y.items():
                    if k + 1 >= P1:
                        continue
                    for (k2, w2), c2 in self.no.normal_order((sym,) + w, P1 - k - 1).items():
                        _add(bucket, (k + 1 + k2, pu, w2), -c * c2)
            tt_cache[key] = out
            return out

        res: dict = {}
        for a in range(N):
            for b in range(N):
                E: dict = {}
                combos = (
                    ("pp", (kk, ll, a, b), ONE),
                    ("ps", (kk, b, a, ll), -ONE),
                    ("sp", (a, ll, kk, b), -ONE),
                    ("ss", (a, b, kk, ll), ONE),
                )
                for name, idx, sign in combos:
                    T = tt(*idx)
                    if not T:
                        continue
                    for (k1, p1, q1), c1 in scal[name].items():
                        bucket = T.get(qmax - q1)
                        if not bucket:
                            continue
                        f = sign * c1
                        for (k2, p2, w), c2 in bucket.items():
                            if k1 + k2 < P1:
                                _add(E, (k1 + k2, p1 + p2, w), f * c2)
                if kk == ll and s == 1:
                    for key, c in inner.get((a, b), {}).items():
                        _add(E, key, -c)
                out: dict = {}
                for (k, p, w), c in E.items():
                    if k == 0:
                        raise ArithmeticError(
                            f"nonzero h^0 remainder in the annihilation recursion for {word}")
                    out[(k - 1, p, w)] = -c
                if out:
                    res[(a, b)] = out
        return res

    def t_on_state(self, a: int, b: int, state: State, P: int) -> UState:
        """t_ab(u) applied to a normal-ordered state, modulo h^P."""
        out: dict = {}
        for (k, w), c in state.items():
            if k >= P:
                continue
            for (k2, p, w2), c2 in self.t_on_word(w, P - k).get((a, b), {}).items():
                _add(out, (k + k2, p, w2), c * c2)
        return out
