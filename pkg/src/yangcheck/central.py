"""Generators of the twisted dual Yangian, the vacuum module M_c, quantum
determinants, the quasi-module map on PBW words and the central series."""
from __future__ import annotations

from itertools import permutations, product
from typing import Sequence

from .engine import VacuumModule, _add
from .ncpoly import ONE, NormalOrderer, Word, add_into
from .series import (
    INF,
    Ctx,
    Mat,
    Module,
    Q,
    Scalar,
    TruncationError,
    form,
    lo_of,
    mat_extend,
    mat_from_state,
    mat_partial_trace,
    mat_state,
    scalar_add,
    scalar_const,
    scalar_mul,
)
from .tensor import antisymmetrizer
from .twisted import Twisted, TwistData
from .young import StandardTableau, act_on_tensor, contents, seminormal_idempotent

# ---------------------------------------------------------------------------
# generators s^(-r)_ij and the basis of M_c


def s_generator(tw: TwistData, r: int, i: int, j: int) -> dict:
    """s^(-r)_ij as an NCPoly, read off from S^+(u) = T^+(u) G T^+t(-u)."""
    G = tw.G
    N = tw.N
    out: dict = {}
    for k in range(N):
        if G[k][j]:
            _add(out, (0, ((r, i, k),)), Q(G[k][j]))
    sign = (-1) ** (r - 1)
    for l in range(N):
        if G[i][l]:
            _add(out, (0, ((r, j, l),)), sign * Q(G[i][l]))
    for p in range(1, r + 1):
        q = r + 1 - p
        sg = (-1) ** (q - 1)
        for k in range(N):
            for l in range(N):
                if G[k][l]:
                    _add(out, (1, ((p, i, k), (q, j, l))), -sg * Q(G[k][l]))
    return out


def generator_family(tw: TwistData, r_max: int) -> list[tuple[int, int, int]]:
    """Indices (r, i, j) of the generating set of Y^+(g_N) with r <= r_max."""
    N = tw.N
    out = []
    for r in range(1, r_max + 1):
        even = r % 2 == 0
        strict = even if tw.sign == 1 else not even
        for i in range(N):
            for j in range(N):
                if i > j or (i == j and not strict):
                    out.append((r, i, j))
    return out


def mc_basis(tw: TwistData, orderer: NormalOrderer, degree: int, r_max: int,
             K: int) -> list[tuple[str, dict]]:
    """Ordered products of at most ``degree`` generators applied to the vacuum."""
    gens = generator_family(tw, r_max)
    polys = {g: orderer.order_poly(s_generator(tw, *g), K) for g in gens}
    out: list[tuple[str, dict]] = [("1", {(0, ()): ONE})]

    def rec(prefix: tuple, start: int, poly: dict) -> None:
        if len(prefix) == degree:
            return
        for idx in range(start, len(gens)):
            g = gens[idx]
            nxt = orderer.multiply(poly, polys[g], K)
            label = "*".join(f"s{a + 1}{b + 1}(-{r})" for r, a, b in prefix + (g,))
            out.append((label, nxt))
            rec(prefix + (g,), idx, nxt)

    rec((), 0, {(0, ()): ONE})
    return out


def leading_symbol(tw: TwistData, r: int, i: int, j: int) -> dict:
    """Top-degree part of s^(-r)_ij mapped to gl_N (x) t^-r: {(a, b): c} for e_ab."""
    out: dict = {}
    for (k, w), c in s_generator(tw, r, i, j).items():
        if k == 0 and len(w) == 1:
            _, a, b = w[0]
            _add(out, (a, b), c)
    return out


def img64(tw: TwistData, r: int, i: int, j: int) -> dict:
    """sum_k g_kj e_ik + (-1)^(r-1) sum_k g_ik e_jk."""
    G = tw.G
    out: dict = {}
    for k in range(tw.N):
        _add(out, (i, k), Q(G[k][j]))
        _add(out, (j, k), (-1) ** (r - 1) * Q(G[i][k]))
    return out


def sigma(tw: TwistData, A: dict) -> dict:
    """sigma(A) = -G^-1 A^t G for A = {(a, b): c}."""
    G = tw.G
    Gi = tw.inverse()
    N = tw.N
    out: dict = {}
    for (a, b), c in A.items():
        # A^t has entry c at (b, a)
        for x in range(N):
            for y in range(N):
                v = Gi[x][b] * G[a][y]
                if v:
                    _add(out, (x, y), -c * Q(v))
    return out


# ---------------------------------------------------------------------------
# vectors of V_c built from T^+ at h-multiples


def tplus_at(orderer: NormalOrderer, a: int, b: int, kappa, K: int) -> dict:
    """t^+_ab(kappa h) = d_ab - sum_r kappa^(r-1) h^r t^(-r)_ab, mod h^K."""
    kappa = Q(kappa)
    out: dict = {(0, ()): ONE} if a == b else {}
    for r in range(1, K):
        c = kappa ** (r - 1)
        if c:
            _add(out, (r, ((r, a, b),)), -c)
    return out


def _tplus_product(orderer: NormalOrderer, rows: Sequence[int], cols: Sequence[int],
                   kappas: Sequence, K: int) -> dict:
    poly: dict = {(0, ()): ONE}
    for a, b, kap in zip(rows, cols, kappas):
        poly = orderer.multiply(poly, tplus_at(orderer, a, b, kap, K), K)
    return poly


def qdet_vector(orderer: NormalOrderer, N: int, K: int, shift=0) -> dict:
    """qdet T^+(shift h) 1: sum sgn(s) t+_{s(1)1}(u) ... t+_{s(N)N}(u - (N-1)h)."""
    out: dict = {}
    kappas = [Q(shift) - k for k in range(N)]
    for perm in permutations(range(N)):
        sgn = _perm_sign(perm)
        add_into(out, _tplus_product(orderer, perm, range(N), kappas, K), sgn, 0, K)
    return out


def _perm_sign(perm: Sequence[int]) -> int:
    s = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


def idempotent_op(U: StandardTableau, N: int) -> dict:
    """E_U as a constant operator {(row, col): Fraction}."""
    return dict(act_on_tensor(seminormal_idempotent(U), N).entries)


def t_nu_vector(orderer: NormalOrderer, U: StandardTableau, N: int, K: int) -> dict:
    """tr E_U T^+_1(h c_1) ... T^+_n(h c_n) 1."""
    E = idempotent_op(U, N)
    cs = contents(U)
    out: dict = {}
    for (row, col), e in E.items():
        # tr(E X) = sum E[row, col] X[col, row]
        add_into(out, _tplus_product(orderer, col, row, cs, K), Q(e), 0, K)
    return out


# ---------------------------------------------------------------------------
# the quasi-module map


class QuasiModule:
    """Y_M on M_c for a fixed twist and level, with spectral variable z."""

    def __init__(self, V: VacuumModule, tw: TwistData, K: int, zbox: int, z: str = "z"):
        self.V = V
        self.tw = tw
        self.N = V.N
        self.K = K
        self.zbox = zbox
        self.z = z
        self.ctx = Ctx([z], K, {z: zbox})
        self._gen: dict = {}
        self._word: dict = {}

    def _generating(self, rows: tuple, cols: tuple, modes: tuple, state_key, state: dict, P: int):
        """Coefficient of S^+_[n](u|z) S_[n](u|z+hc/2)^-1 state at prod u_k^(r_k - 1)."""
        n = len(modes)
        names = [self.z] + [f"u{k}" for k in range(n)]
        # negative z powers from the inverse factors eat into the cap of the
        # creation factors, so the generating function gets extra room
        caps = {self.z: self.zbox + 2 * P}
        for k, r in enumerate(modes):
            caps[f"u{k}"] = r - 1
        key = (modes, state_key, P)
        if key not in self._gen:
            ctx = Ctx(names, P, caps)
            T = Twisted(Module(ctx, self.V), self.tw)
            M = mat_from_state(ctx, n, self.N, state)
            us = [form(f"u{k}") for k in range(n)]
            self._gen[key] = (ctx, T.quasi_Y(M, us, form(self.z)))
        ctx, M = self._gen[key]
        target = tuple(r - 1 for r in modes)
        for k, t in enumerate(target):
            if M.caps[2 + k] < t:
                raise TruncationError("generating function truncated below the requested mode")
        out: dict = {}
        for (e, w), c in M.entries.get((rows, cols), {}).items():
            if tuple(e[2:]) == target:
                _add(out, ((e[0], e[1]), w), c)
        return out, (M.caps[0], M.caps[1])

    def on_word(self, word: Word, state_key, state: dict, P: int) -> tuple[dict, tuple]:
        """Y_M(word 1, z) state mod h^P as {((h, z), word'): c} with caps."""
        key = (word, state_key, P)
        if key in self._word:
            return self._word[key]
        n = len(word)
        if n == 0:
            res = ({((k, 0), w): Q(c) for (k, w), c in state.items() if k < P}, (P - 1, INF))
            self._word[key] = res
            return res
        modes = tuple(s[0] for s in word)
        rows = tuple(s[1] for s in word)
        cols = tuple(s[2] for s in word)
        gen, caps = self._generating(rows, cols, modes, state_key, state, P + n)
        acc: dict = dict(gen)
        zcap = caps[1]
        forced = [k for k, (r, i, j) in enumerate(word) if r >= 2 or i != j]
        free = [k for k in range(n) if k not in forced]
        for mask in product((0, 1), repeat=len(free)):
            S = sorted(forced + [f for f, b in zip(free, mask) if b])
            if len(S) == n:
                continue
            sub = tuple(word[k] for k in S)
            val, sc = self.on_word(sub, state_key, state, P + n - len(S))
            zcap = min(zcap, sc[1])
            coef = (-1) ** len(S)
            for (e, w), c in val.items():
                _add(acc, ((e[0] + len(S), e[1]), w), -coef * c)
        sign = (-1) ** n
        out: dict = {}
        for (e, w), c in acc.items():
            if e[1] > zcap:
                continue
            if e[0] < n:
                raise ArithmeticError(f"Y_M({word}) has a term below h^{n}")
            if e[0] - n < P:
                out[((e[0] - n, e[1]), w)] = sign * c
        res = (out, (P - 1, zcap))
        self._word[key] = res
        return res

    def apply(self, vector: dict, state: dict, state_key="w") -> Mat:
        """Y_M(vector, z) state for an NCPoly vector in V_2c, as a zero-leg Mat."""
        K = self.K
        total: dict = {}
        zcap = INF
        for (k, word), c in vector.items():
            if k >= K:
                continue
            val, caps = self.on_word(word, state_key, state, K - k)
            zcap = min(zcap, caps[1])
            for ((hk, ze), w), cc in val.items():
                _add(total, ((hk + k, ze), w), Q(c) * cc)
        total = {k: v for k, v in total.items() if k[0][1] <= zcap}
        return Mat(0, {((), ()): total}, (K - 1, zcap))


# ---------------------------------------------------------------------------
# traced operators


def traced_quasi_Y(T: Twisted, M: Mat, E: dict, shifts: Sequence, z) -> Mat:
    """tr_{new legs} E S^+_[n](u|z) S_[n](u|z+hc/2)^-1 M with u_k = h shifts[k]."""
    n = len(shifts)
    L = M.n
    X = mat_extend(M, n, T.N)
    us = [form(("h", s)) for s in shifts]
    X = T.quasi_Y(X, us, z, offset=L)
    return mat_partial_trace(X, E, L)


def traced_bracket(T: Twisted, M: Mat, E: dict, shifts: Sequence, z, plus: bool) -> Mat:
    """tr E S^+_[n](u|z) M or tr E S_[n](u|z) M."""
    n = len(shifts)
    L = M.n
    X = mat_extend(M, n, T.N)
    us = [form(("h", s)) for s in shifts]
    X = T.s_bracket(X, plus, us, z, offset=L)
    return mat_partial_trace(X, E, L)


def a_nu(T: Twisted, M: Mat, U: StandardTableau, z) -> Mat:
    """A_nu(z) M = tr E_U S^+_[n](z_nu) S_[n](z_nu + hc/2)^-1 M.

    At the critical level c = -N/2 the shift hc/2 equals -hN/4."""
    return traced_quasi_Y(T, M, idempotent_op(U, T.N), contents(U), z)


def a_noncrit(T: Twisted, M: Mat, z) -> Mat:
    N = T.N
    A = dict(antisymmetrizer(N).entries)
    return traced_quasi_Y(T, M, A, [-k for k in range(N)], z)


def sdet(T: Twisted, M: Mat, z, plus: bool) -> Mat:
    N = T.N
    A = dict(antisymmetrizer(N).entries)
    return traced_bracket(T, M, A, [-k for k in range(N)], z, plus)


def qdet_operator(m: Module, M: Mat, z, plus: bool = True) -> Mat:
    """qdet T^+(z) M (or qdet T(z) M) from the column expansion."""
    N = m.N
    L = M.n
    X = mat_extend(M, N, N)
    for k in reversed(range(N)):
        X = m.apply_T(X, L + k, form(*z, ("h", -k)) if k else z, plus=plus)
    out: dict = {}
    cols = tuple(range(N))
    for (r, c), v in X.entries.items():
        if c[L:] != cols:
            continue
        tail = r[L:]
        if sorted(tail) != list(cols):
            continue
        sgn = _perm_sign(tail)
        d = out.setdefault((r[:L], c[:L]), {})
        for t, x in v.items():
            _add(d, t, sgn * x)
    return Mat(L, out, X.caps)


# ---------------------------------------------------------------------------
# scalar helpers


def scalar_inverse(ctx: Ctx, s: Scalar) -> Scalar:
    """1/s for s = 1 + O(h)."""
    one = scalar_const(ctx, 1)
    delta = scalar_add(one, s, -ONE)
    if any(e[0] == 0 for e in delta.terms):
        raise ValueError("h^0 part is not 1")
    result, power = one, one
    for _ in range(1, ctx.K):
        power = scalar_mul(ctx, power, delta)
        if not power.terms:
            break
        result = scalar_add(result, power)
    return result


def vacuum_component(M: Mat) -> Scalar:
    """The coefficient of the vacuum in a zero-leg matrix."""
    st = mat_state(M)
    return Scalar({e: c for (e, w), c in st.items() if w == ()}, M.caps)


def split_vacuum(M: Mat) -> tuple[Scalar, dict]:
    st = mat_state(M)
    vac = {e: c for (e, w), c in st.items() if w == ()}
    rest = {k: c for k, c in st.items() if k[1] != ()}
    return Scalar(vac, M.caps), rest


def scalar_lo(s: Scalar, n: int) -> tuple:
    return lo_of(s.terms, n)
