"""Multivariable truncated series with module-valued coefficients.

A computation context fixes the variables (``h`` first) and a box of caps.
A series is a dict {(exps, word): c}; its ``caps`` say up to which exponent,
per variable, the stored coefficients are exact.  Variables that only ever
occur with bounded-below exponents need no cap for their negative
direction; infinite positive directions (from T^+ and from expanding
(a x + rest)^-k in the non-dominant variables) are cut at the box.

Products follow the usual rule cap = min(cap_a + lo_b, cap_b + lo_a), and
annihilation operators in a variable x are refused on inputs truncated in x,
where dropped high powers could feed back into the box.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from operator import add, le
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .engine import VacuumModule, _add
from .exact import binom, solve_g_series
from .ncpoly import ONE, Word

INF = 10 ** 9


class TruncationError(RuntimeError):
    """Raised when a requested operation would read unknown coefficients."""


def Q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


Form = tuple  # ((name, mpq), ...)


def form(*terms) -> Form:
    """Linear form from names or (name, coefficient) pairs, order preserved."""
    out = []
    for t in terms:
        if isinstance(t, str):
            name, c = t, ONE
        else:
            name, c = t
        c = Q(c)
        if not c:
            continue
        for idx, (n, d) in enumerate(out):
            if n == name:
                out[idx] = (n, d + c)
                break
        else:
            out.append((name, c))
    return tuple((n, c) for n, c in out if c)


def form_add(*forms: Form) -> Form:
    return form(*[t for f in forms for t in f])


def form_scale(f: Form, s) -> Form:
    s = Q(s)
    return tuple((n, c * s) for n, c in f)


def dominant(f: Form) -> str:
    for n, _ in f:
        if n != "h":
            return n
    raise ValueError("linear form has no spectral variable")


class Ctx:
    """Variables, h-precision and box caps of one computation."""

    def __init__(self, names: Sequence[str], K: int, caps: Mapping[str, int] | None = None):
        self.names = ("h",) + tuple(names)
        self.K = K
        caps = dict(caps or {})
        self.box = tuple([K - 1] + [caps.get(n, INF) for n in names])
        self.exact = (K - 1,) + (INF,) * len(names)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.nvars = len(self.names)
        self.zero = (0,) * self.nvars
        self._pow_cache: dict = {}

    def unit(self, name: str, e: int = 1) -> tuple:
        x = [0] * self.nvars
        x[self.index[name]] = e
        return tuple(x)

    def in_box(self, exps: tuple, caps: tuple) -> bool:
        return all(e <= c for e, c in zip(exps, caps))

    # -- powers of linear forms ------------------------------------------
    def power_caps(self, f: Form, e: int) -> tuple:
        """Caps of ``power(f, e)``: only negative powers are truncated, in the
        non-dominant variables."""
        if e >= 0:
            return self.exact
        x = dominant(f)
        caps = list(self.exact)
        for n, _ in f:
            if n != x and n != "h":
                caps[self.index[n]] = self.box[self.index[n]]
        return tuple(caps)

    def power(self, f: Form, e: int) -> dict:
        """f**e as {exps: c}, exact inside ``power_caps`` (e < 0 expands in
        the dominant variable)."""
        key = (f, e)
        hit = self._pow_cache.get(key)
        if hit is not None:
            return hit
        out = self._power_pos(f, e, False) if e >= 0 else self._power_neg(f, e)
        self._pow_cache[key] = out
        return out

    def _power_pos(self, f: Form, e: int, truncate: bool = True) -> dict:
        out: dict = {self.zero: ONE}
        for _ in range(e):
            nxt: dict = {}
            for ex, c in out.items():
                for name, a in f:
                    i = self.index[name]
                    ex2 = ex[:i] + (ex[i] + 1,) + ex[i + 1:]
                    if not truncate or ex2[i] <= self.box[i]:
                        _add(nxt, ex2, c * a)
            out = nxt
        return out

    def _power_neg(self, f: Form, e: int) -> dict:
        x = dominant(f)
        xi = self.index[x]
        a = dict(f)[x]
        rest = tuple((n, c) for n, c in f if n != x)
        for n, _ in rest:
            if self.box[self.index[n]] >= INF:
                raise TruncationError(f"expansion of a power of {f} needs a cap on {n}")
        mmax = sum(self.box[self.index[n]] for n, _ in rest)
        out: dict = {}
        for m in range(0, mmax + 1):
            rp = self._power_pos(rest, m)
            if not rp:
                continue
            coef = binom(e, m) * a ** (e - m)
            for ex, c in rp.items():
                ex2 = ex[:xi] + (ex[xi] + e - m,) + ex[xi + 1:]
                _add(out, ex2, coef * c)
        return out


def lo_of(terms: Iterable[tuple], n: int) -> tuple:
    lo = [INF] * n
    for ex in terms:
        for i, e in enumerate(ex):
            if e < lo[i]:
                lo[i] = e
    return tuple(lo)


def combine_caps(capA: tuple, loA: tuple, capB: tuple, loB: tuple) -> tuple:
    out = []
    for ca, la, cb, lb in zip(capA, loA, capB, loB):
        x = min(ca + lb if ca < INF and lb < INF else INF,
                cb + la if cb < INF and la < INF else INF)
        if (ca < INF and lb >= INF) or (cb < INF and la >= INF):
            # an empty factor: the product is exactly zero, keep the other cap
            x = min(x, ca, cb)
        out.append(x)
    return tuple(out)


def min_caps(a: tuple, b: tuple) -> tuple:
    return tuple(min(x, y) for x, y in zip(a, b))


@dataclass
class Scalar:
    """Scalar series {exps: c} with caps."""

    terms: dict
    caps: tuple

    def lo(self, n: int) -> tuple:
        return lo_of(self.terms, n)


def scalar_mul(ctx: Ctx, a: Scalar, b: Scalar) -> Scalar:
    caps = combine_caps(a.caps, a.lo(ctx.nvars), b.caps, b.lo(ctx.nvars))
    out: dict = {}
    for e1, c1 in a.terms.items():
        for e2, c2 in b.terms.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            if all(x <= c for x, c in zip(e, caps)):
                _add(out, e, c1 * c2)
    return Scalar(out, caps)


def scalar_add(a: Scalar, b: Scalar, sb=ONE) -> Scalar:
    out = dict(a.terms)
    for e, c in b.terms.items():
        _add(out, e, sb * c)
    caps = min_caps(a.caps, b.caps)
    return Scalar({e: c for e, c in out.items() if all(x <= y for x, y in zip(e, caps))}, caps)


def scalar_const(ctx: Ctx, c) -> Scalar:
    c = Q(c)
    return Scalar({ctx.zero: c} if c else {}, ctx.exact)


class ScalarOp:
    """Operator on k legs with Scalar entries, stored as {(row, col): {exps: c}}."""

    def __init__(self, k: int, entries: dict, caps: tuple):
        self.k = k
        self.entries = {key: v for key, v in entries.items() if v}
        self.caps = caps

    def lo(self, n: int) -> tuple:
        return lo_of((e for v in self.entries.values() for e in v), n)


def scalarop_identity(ctx: Ctx, k: int, N: int) -> ScalarOp:
    from itertools import product
    return ScalarOp(k, {(i, i): {ctx.zero: ONE} for i in product(range(N), repeat=k)}, ctx.exact)


def scalarop_mul(ctx: Ctx, A: ScalarOp, B: ScalarOp) -> ScalarOp:
    caps = combine_caps(A.caps, A.lo(ctx.nvars), B.caps, B.lo(ctx.nvars))
    rows: dict = {}
    for (r, c), v in B.entries.items():
        rows.setdefault(r, []).append((c, v))
    out: dict = {}
    for (r, m), x in A.entries.items():
        for c, y in rows.get(m, ()):
            d = out.setdefault((r, c), {})
            for e1, c1 in x.items():
                for e2, c2 in y.items():
                    e = tuple(p + q for p, q in zip(e1, e2))
                    if all(p <= q for p, q in zip(e, caps)):
                        _add(d, e, c1 * c2)
    return ScalarOp(A.k, out, caps)


def scalarop_sub(A: ScalarOp, B: ScalarOp) -> ScalarOp:
    caps = min_caps(A.caps, B.caps)
    out = {k: dict(v) for k, v in A.entries.items()}
    for key, v in B.entries.items():
        d = out.setdefault(key, {})
        for e, c in v.items():
            _add(d, e, -c)
    return ScalarOp(A.k, out, caps)


def scalarop_add(A: ScalarOp, B: ScalarOp) -> ScalarOp:
    caps = min_caps(A.caps, B.caps)
    out = {k: dict(v) for k, v in A.entries.items()}
    for key, v in B.entries.items():
        d = out.setdefault(key, {})
        for e, c in v.items():
            _add(d, e, c)
    return ScalarOp(A.k, out, caps)


def scalarop_transpose(A: ScalarOp, leg: int) -> ScalarOp:
    out = {}
    for (r, c), v in A.entries.items():
        r2, c2 = list(r), list(c)
        r2[leg], c2[leg] = c[leg], r[leg]
        out[(tuple(r2), tuple(c2))] = v
    return ScalarOp(A.k, out, A.caps)


def scalarop_inverse(ctx: Ctx, A: ScalarOp, N: int) -> ScalarOp:
    """Inverse of an operator with identity h^0 part (Neumann series)."""
    one = scalarop_identity(ctx, A.k, N)
    delta = scalarop_sub(one, A)
    for v in delta.entries.values():
        if any(e[0] == 0 for e in v):
            raise ValueError("h^0 part is not the identity")
    result, power = one, one
    for _ in range(1, ctx.K):
        power = scalarop_mul(ctx, power, delta)
        if not power.entries:
            break
        result = scalarop_add(result, power)
    return result


def r_scalars(ctx: Ctx, f: Form, N: int) -> tuple[dict, dict]:
    """phi = g(f/h) and psi = h g(f/h)/f as {exps: c}."""
    K = ctx.K
    g = solve_g_series(N, K + 1)
    phi: dict = {}
    psi: dict = {}
    hi = ctx.index["h"]
    for j in range(0, K):
        gj = Q(g[j])
        for target, sh in ((phi, j), (psi, j + 1)):
            if sh >= K:
                continue
            for ex, c in ctx.power(f, -sh).items():
                e2 = ex[:hi] + (ex[hi] + sh,) + ex[hi + 1:]
                if e2[hi] < K:
                    _add(target, e2, gj * c)
    return phi, psi


def rbar_op(ctx: Ctx, f: Form, N: int, transposed: bool = False) -> ScalarOp:
    """Normalized R-matrix Rbar(f) on two legs (transposed on the first leg)."""
    phi, psi = r_scalars(ctx, f, N)
    out: dict = {}
    for a in range(N):
        for b in range(N):
            key = ((a, b), (a, b))
            out[key] = dict(phi)
    for a in range(N):
        for b in range(N):
            key = ((a, b), (b, a))
            d = out.setdefault(key, {})
            for e, c in psi.items():
                _add(d, e, -c)
    op = ScalarOp(2, out, ctx.power_caps(f, -1))
    return scalarop_transpose(op, 0) if transposed else op


def r_op(ctx: Ctx, f: Form, N: int, transposed: bool = False,
         cleared: bool = False) -> ScalarOp:
    """Yang R-matrix 1 - h f^-1 P on two legs (transposed on the first leg).

    With ``cleared`` the scalar denominator is multiplied out: f - h P.
    """
    hi = ctx.index["h"]
    if cleared:
        ident = ctx.power(f, 1)
        inv = {ctx.unit("h"): ONE} if ctx.K > 1 else {}
    else:
        ident = {ctx.zero: ONE}
        inv = {}
        for ex, c in ctx.power(f, -1).items():
            e2 = ex[:hi] + (ex[hi] + 1,) + ex[hi + 1:]
            if e2[hi] < ctx.K:
                inv[e2] = c
    out: dict = {}
    for a in range(N):
        for b in range(N):
            out[((a, b), (a, b))] = dict(ident)
    for a in range(N):
        for b in range(N):
            d = out.setdefault(((a, b), (b, a)), {})
            for e, c in inv.items():
                _add(d, e, -c)
    op = ScalarOp(2, out, ctx.exact if cleared else ctx.power_caps(f, -1))
    return scalarop_transpose(op, 0) if transposed else op


# ---------------------------------------------------------------------------
# Matrix-valued states


def _h_buckets(v: Mapping) -> list:
    """Terms {(exps, word): c} grouped by their h power (exps[0])."""
    out: list = []
    for (e, w), c in v.items():
        k = e[0]
        while len(out) <= k:
            out.append([])
        out[k].append((e, w, c))
    return out


def _mul_into(d: dict, scal: Mapping, buckets: list, caps: tuple) -> None:
    """d += scal * state, keeping products inside caps.  Only the h buckets
    that can stay below the h cap are visited."""
    hcap = caps[0]
    for e1, c1 in scal.items():
        for bucket in buckets[:max(0, hcap - e1[0] + 1)]:
            for e2, w, c2 in bucket:
                e = tuple(map(add, e1, e2))
                if all(map(le, e, caps)):
                    tk = (e, w)
                    d[tk] = d.get(tk, 0) + c1 * c2


def _strip(entries: dict) -> dict:
    """Drop coefficients that cancelled to zero during accumulation."""
    for v in entries.values():
        zeros = [t for t, c in v.items() if not c]
        for t in zeros:
            del v[t]
    return entries


class Mat:
    """Element of (End C^N)^{(x)n} (x) module: {(row, col): {(exps, word): c}}."""

    def __init__(self, n: int, entries: dict, caps: tuple):
        self.n = n
        self.entries = {k: v for k, v in entries.items() if v}
        self.caps = caps

    def lo(self, nv: int) -> tuple:
        return lo_of((e for v in self.entries.values() for (e, _) in v), nv)

    def copy(self) -> Mat:
        return Mat(self.n, {k: dict(v) for k, v in self.entries.items()}, self.caps)

    def is_zero(self) -> bool:
        return not self.entries


def mat_from_state(ctx: Ctx, n: int, N: int, state: Mapping, op: ScalarOp | None = None) -> Mat:
    """op (x) state, with op the identity by default.  ``state`` is an NCPoly
    {(k, word): c} (k = h power) or {(exps, word): c}."""
    from itertools import product
    terms: dict = {}
    for key, c in state.items():
        a, w = key
        ex = a if isinstance(a, tuple) else ctx.unit("h", a)
        if ex[0] < ctx.K:
            terms[(ex, w)] = Q(c)
    entries: dict = {}
    caps = ctx.exact
    if op is None:
        for i in product(range(N), repeat=n):
            entries[(i, i)] = dict(terms)
    else:
        caps = combine_caps(op.caps, op.lo(ctx.nvars), ctx.exact, lo_of((e for e, _ in terms), ctx.nvars))
        for (r, c), v in op.entries.items():
            d: dict = {}
            for e1, c1 in v.items():
                for (e2, w), c2 in terms.items():
                    e = tuple(map(add, e1, e2))
                    if all(map(le, e, caps)):
                        tk = (e, w)
                        d[tk] = d.get(tk, 0) + c1 * c2
            entries[(r, c)] = d
    return Mat(n, _strip(entries), caps)


def mat_add(A: Mat, B: Mat, sb=ONE) -> Mat:
    caps = min_caps(A.caps, B.caps)
    out = {k: dict(v) for k, v in A.entries.items()}
    for key, v in B.entries.items():
        d = out.setdefault(key, {})
        for t, c in v.items():
            _add(d, t, sb * c)
    for key in list(out):
        out[key] = {t: c for t, c in out[key].items() if all(x <= y for x, y in zip(t[0], caps))}
    return Mat(A.n, out, caps)


def mat_scale(A: Mat, s) -> Mat:
    s = Q(s)
    return Mat(A.n, {k: {t: c * s for t, c in v.items()} for k, v in A.entries.items()}, A.caps)


def mat_left_scalarop(ctx: Ctx, S: ScalarOp, legs: Sequence[int], M: Mat) -> Mat:
    """(S on the given legs) * M."""
    legs = tuple(legs)
    caps = combine_caps(S.caps, S.lo(ctx.nvars), M.caps, M.lo(ctx.nvars))
    by_col: dict = {}
    for (r, c), v in S.entries.items():
        by_col.setdefault(c, []).append((r, v))
    out: dict = {}
    for (row, col), v in M.entries.items():
        sub = tuple(row[l] for l in legs)
        buckets = _h_buckets(v)
        for r, sv in by_col.get(sub, ()):
            nrow = list(row)
            for l, i in zip(legs, r):
                nrow[l] = i
            d = out.setdefault((tuple(nrow), col), {})
            _mul_into(d, sv, buckets, caps)
    return Mat(M.n, _strip(out), caps)


def mat_left_const(M: Mat, op: Mapping, legs: Sequence[int]) -> Mat:
    """Left multiplication by a constant operator {(row, col): c} on legs."""
    legs = tuple(legs)
    by_col: dict = {}
    for (r, c), x in op.items():
        if x:
            by_col.setdefault(tuple(c), []).append((tuple(r), Q(x)))
    out: dict = {}
    for (row, col), v in M.entries.items():
        sub = tuple(row[l] for l in legs)
        for r, x in by_col.get(sub, ()):
            nrow = list(row)
            for l, i in zip(legs, r):
                nrow[l] = i
            d = out.setdefault((tuple(nrow), col), {})
            for t, c in v.items():
                _add(d, t, x * c)
    return Mat(M.n, out, M.caps)


def matrix_op(G: Sequence[Sequence]) -> dict:
    N = len(G)
    return {((i,), (j,)): Q(G[i][j]) for i in range(N) for j in range(N) if G[i][j]}


def mat_trace_with(M: Mat, E: Mapping) -> dict:
    """tr(E M) over all legs: sum E[c, r] M[r, c]; returns {(exps, word): c}."""
    out: dict = {}
    for (r, c), v in M.entries.items():
        x = E.get((c, r))
        if not x:
            continue
        x = Q(x)
        for t, cc in v.items():
            _add(out, t, x * cc)
    return out


class Module:
    """Operators T(f), T^+(f) on a vacuum module inside a context."""

    def __init__(self, ctx: Ctx, V: VacuumModule):
        self.ctx = ctx
        self.V = V
        self.N = V.N
        self.no = V.no
        self._tcache: dict = {}

    # t_ab(f) applied to one word: {(exps, word'): c}
    def _t_word(self, f: Form, a: int, b: int, word: Word, P: int) -> dict:
        key = ("T", f, a, b, word, P)
        hit = self._tcache.get(key)
        if hit is not None:
            return hit
        ctx = self.ctx
        hi = ctx.index["h"]
        out: dict = {}
        for (k, p, w), c in self.V.t_on_word(word, P).get((a, b), {}).items():
            for ex, c2 in ctx.power(f, -p).items():
                e = ex[:hi] + (ex[hi] + k,) + ex[hi + 1:]
                if e[hi] < P and all(x <= y for x, y in zip(e, ctx.box)):
                    _add(out, (e, w), c * c2)
        self._tcache[key] = out
        return out

    def _tplus_word(self, f: Form, a: int, b: int, word: Word, P: int) -> dict:
        key = ("T+", f, a, b, word, P)
        hit = self._tcache.get(key)
        if hit is not None:
            return hit
        ctx = self.ctx
        hi = ctx.index["h"]
        out: dict = {}
        if a == b:
            out[(ctx.zero, word)] = ONE
        budget = 0
        for name, _ in f:
            cap = ctx.box[ctx.index[name]]
            if cap >= INF:
                raise TruncationError(f"T^+ argument {f} needs a cap on {name}")
            budget += cap
        for r in range(1, budget + 2):
            pw = ctx.power(f, r - 1)
            if not pw:
                continue
            created = self.no.normal_order(((r, a, b),) + word, P - 1) if P > 1 else {}
            for (k2, w2), c2 in created.items():
                for ex, c in pw.items():
                    e = ex[:hi] + (ex[hi] + 1 + k2,) + ex[hi + 1:]
                    if e[hi] < P and all(x <= y for x, y in zip(e, ctx.box)):
                        _add(out, (e, w2), -c * c2)
        self._tcache[key] = out
        return out

    def apply_T(self, M: Mat, leg: int, f: Form, plus: bool = False,
                transposed: bool = False) -> Mat:
        """T_leg(f) M (or T^+, or with the matrix transposed)."""
        ctx = self.ctx
        nv = ctx.nvars
        lo_in = M.lo(nv)
        caps = list(M.caps)
        names_in_f = [n for n, _ in f]
        if plus:
            for name in names_in_f:
                i = ctx.index[name]
                caps[i] = min(caps[i], ctx.box[i] + lo_in[i] if lo_in[i] < INF else caps[i])
        else:
            x = dominant(f)
            xi = ctx.index[x]
            if M.caps[xi] < INF:
                raise TruncationError(f"annihilation in {x} applied to an input truncated in {x}")
            for name in names_in_f:
                i = ctx.index[name]
                if i != xi:
                    caps[i] = min(caps[i], ctx.box[i] + lo_in[i] if lo_in[i] < INF else caps[i])
        hcap = ctx.K - 1
        caps[0] = min(caps[0], hcap)
        caps = tuple(caps)
        N = self.N
        K = ctx.K
        word_op = self._tplus_word if plus else self._t_word
        out: dict = {}
        for (row, col), v in M.entries.items():
            j = row[leg]
            by_word: dict = {}
            for (e1, w), c1 in v.items():
                P = K - e1[0]
                if P > 0:
                    by_word.setdefault((w, P), []).append((e1, c1))
            for i in range(N):
                a, b = (j, i) if transposed else (i, j)
                nrow = row[:leg] + (i,) + row[leg + 1:]
                d = out.setdefault((nrow, col), {})
                for (w, P), terms in by_word.items():
                    for (e2, w2), c2 in word_op(f, a, b, w, P).items():
                        for e1, c1 in terms:
                            e = tuple(map(add, e1, e2))
                            if all(map(le, e, caps)):
                                tk = (e, w2)
                                d[tk] = d.get(tk, 0) + c1 * c2
        return Mat(M.n, _strip(out), caps)

    def apply_symbol(self, M: Mat, sym) -> Mat:
        """Left multiplication by one creation symbol (normal ordered)."""
        K = self.ctx.K
        out: dict = {}
        for key, v in M.entries.items():
            d: dict = {}
            for (e, w), c in v.items():
                P = K - e[0]
                for (k2, w2), c2 in self.no.normal_order((sym,) + w, P).items():
                    e2 = (e[0] + k2,) + e[1:]
                    _add(d, (e2, w2), c * c2)
            out[key] = d
        return Mat(M.n, out, M.caps)


def state_to_mat(ctx: Ctx, state: dict, caps: tuple | None = None) -> Mat:
    """A scalar (zero-leg) matrix holding a state series {(exps, word): c}."""
    return Mat(0, {((), ()): dict(state)}, caps or ctx.exact)


def mat_state(M: Mat) -> dict:
    """The state of a zero-leg matrix."""
    return M.entries.get(((), ()), {})


def compare(ctx: Ctx, A: Mat, B: Mat, windows: Mapping[str, tuple[int, int]] | None = None):
    """Residual of A - B restricted to the region where both are exact.

    Returns (residual_terms, caps, complete) where ``complete`` says whether
    the requested windows lie inside the exact region.
    """
    D = mat_add(A, B, -ONE)
    caps = D.caps
    complete = True
    lo_win = [None] * ctx.nvars
    hi_win = list(caps)
    for name, (lo, hi) in (windows or {}).items():
        i = ctx.index[name]
        if hi > caps[i]:
            complete = False
        hi_win[i] = min(hi, caps[i])
        lo_win[i] = lo
    resid = []
    for key, v in D.entries.items():
        for (e, w), c in v.items():
            if all(x <= y for x, y in zip(e, hi_win)) and all(
                    l is None or x >= l for x, l in zip(e, lo_win)):
                resid.append((key, e, w, c))
    return resid, caps, complete


def mat_right_scalarop(ctx: Ctx, M: Mat, S: ScalarOp, legs: Sequence[int]) -> Mat:
    """M * (S on the given legs); scalars commute with the module part."""
    legs = tuple(legs)
    caps = combine_caps(S.caps, S.lo(ctx.nvars), M.caps, M.lo(ctx.nvars))
    by_row: dict = {}
    for (r, c), v in S.entries.items():
        by_row.setdefault(r, []).append((c, v))
    out: dict = {}
    for (row, col), v in M.entries.items():
        sub = tuple(col[l] for l in legs)
        buckets = _h_buckets(v)
        for c, sv in by_row.get(sub, ()):
            ncol = list(col)
            for l, i in zip(legs, c):
                ncol[l] = i
            d = out.setdefault((row, tuple(ncol)), {})
            _mul_into(d, sv, buckets, caps)
    return Mat(M.n, _strip(out), caps)


def mat_transpose_leg(M: Mat, leg: int) -> Mat:
    out = {}
    for (r, c), v in M.entries.items():
        r2, c2 = list(r), list(c)
        r2[leg], c2[leg] = c[leg], r[leg]
        out[(tuple(r2), tuple(c2))] = v
    return Mat(M.n, out, M.caps)


def mat_swap_rows(M: Mat, a: int, b: int) -> Mat:
    """Left multiplication by the permutation operator on legs a, b."""
    out = {}
    for (r, c), v in M.entries.items():
        r2 = list(r)
        r2[a], r2[b] = r[b], r[a]
        out[(tuple(r2), c)] = v
    return Mat(M.n, out, M.caps)


def mat_swap_cols(M: Mat, a: int, b: int) -> Mat:
    """Right multiplication by the permutation operator on legs a, b."""
    out = {}
    for (r, c), v in M.entries.items():
        c2 = list(c)
        c2[a], c2[b] = c[b], c[a]
        out[(r, tuple(c2))] = v
    return Mat(M.n, out, M.caps)


def mat_extend(M: Mat, k: int, N: int) -> Mat:
    """M (x) identity on k new trailing legs."""
    from itertools import product
    out = {}
    for (r, c), v in M.entries.items():
        for i in product(range(N), repeat=k):
            out[(r + i, c + i)] = v
    return Mat(M.n + k, out, M.caps)


def mat_partial_trace(M: Mat, E: Mapping, first: int) -> Mat:
    """tr over legs first.. of (E on those legs) * M."""
    out: dict = {}
    for (r, c), v in M.entries.items():
        x = E.get((c[first:], r[first:]))
        if not x:
            continue
        x = Q(x)
        d = out.setdefault((r[:first], c[:first]), {})
        for t, cc in v.items():
            _add(d, t, x * cc)
    return Mat(first, out, M.caps)


def mat_mul_scalar(ctx: Ctx, M: Mat, s: Mapping, s_caps: tuple | None = None) -> Mat:
    """Multiply every entry by a scalar series {exps: c}."""
    s_caps = s_caps or ctx.exact
    caps = combine_caps(s_caps, lo_of(s, ctx.nvars), M.caps, M.lo(ctx.nvars))
    out: dict = {}
    for key, v in M.entries.items():
        d: dict = {}
        _mul_into(d, s, _h_buckets(v), caps)
        out[key] = d
    return Mat(M.n, _strip(out), caps)


def mat_restrict(M: Mat, caps: tuple) -> Mat:
    caps = min_caps(caps, M.caps)
    out = {k: {t: c for t, c in v.items() if all(x <= y for x, y in zip(t[0], caps))}
           for k, v in M.entries.items()}
    return Mat(M.n, out, caps)


def t_inverse(m: Module, M: Mat, leg: int, f: Form, plus: bool = False,
              transposed: bool = False) -> Mat:
    """T(f)^-1 M by the Neumann series around the identity."""
    total = M
    X = M
    for _ in range(1, m.ctx.K):
        Y = mat_add(X, m.apply_T(X, leg, f, plus=plus, transposed=transposed), -ONE)
        if Y.is_zero():
            break
        total = mat_add(total, Y)
        X = Y
    return total
