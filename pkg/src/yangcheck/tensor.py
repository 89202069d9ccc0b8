"""Sparse operators on (C^N)^{(x)n} and the Yang R-matrix family.

Multi-indices are 0-based tuples.  Entries may be any ring elements that
support +, -, * and a zero test (rationals, RatFunc, TruncatedSeries).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Iterable, Mapping, Sequence

from .exact import (
    FIELD,
    TruncatedSeries,
    as_ratfunc,
    const,
    ratfunc_to_series,
    solve_g_series,
    var,
)


@dataclass(frozen=True)
class LegSpace:
    n: int
    N: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("number of legs must be nonnegative")
        if self.N < 2:
            raise ValueError("leg dimension N must be at least 2")

    def indices(self) -> Iterable[tuple[int, ...]]:
        return product(range(self.N), repeat=self.n)


class TensorOperator:
    __slots__ = ("space", "entries")

    def __init__(self, space: LegSpace, entries: Mapping[tuple, object]):
        clean = {}
        for (r, c), x in entries.items():
            if len(r) != space.n or len(c) != space.n:
                raise ValueError("multi-index length does not match the leg count")
            if any(not 0 <= i < space.N for i in r + c):
                raise ValueError("index out of range")
            if x:
                clean[(tuple(r), tuple(c))] = x
        self.space = space
        self.entries = clean

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def N(self) -> int:
        return self.space.N

    def __getitem__(self, key):
        return self.entries.get(key, 0)

    def map(self, fn: Callable) -> TensorOperator:
        return TensorOperator(self.space, {k: fn(x) for k, x in self.entries.items()})

    def _check(self, other: TensorOperator) -> None:
        if self.space != other.space:
            raise ValueError(f"shape mismatch: {self.space} vs {other.space}")

    def __add__(self, other: TensorOperator) -> TensorOperator:
        self._check(other)
        out = dict(self.entries)
        for k, x in other.entries.items():
            out[k] = out[k] + x if k in out else x
        return TensorOperator(self.space, out)

    def __neg__(self) -> TensorOperator:
        return self.map(lambda x: -x)

    def __sub__(self, other: TensorOperator) -> TensorOperator:
        return self + (-other)

    def scale(self, s) -> TensorOperator:
        return self.map(lambda x: x * s)

    def __matmul__(self, other: TensorOperator) -> TensorOperator:
        return multiply(self, other)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorOperator):
            return NotImplemented
        return self.space == other.space and (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"TensorOperator(n={self.n}, N={self.N}, nnz={len(self.entries)})"


def identity(n: int, N: int, one=1) -> TensorOperator:
    sp = LegSpace(n, N)
    return TensorOperator(sp, {(i, i): one for i in sp.indices()})


def zero(n: int, N: int) -> TensorOperator:
    return TensorOperator(LegSpace(n, N), {})


def from_matrix(mat: Sequence[Sequence], N: int | None = None) -> TensorOperator:
    """One-leg operator from a square matrix."""
    N = N or len(mat)
    return TensorOperator(LegSpace(1, N), {((i,), (j,)): mat[i][j]
                                           for i in range(N) for j in range(N)})


def permutation_operator(perm: Sequence[int], N: int, one=1) -> TensorOperator:
    """Operator moving the tensor factor in position k to position perm[k]."""
    n = len(perm)
    sp = LegSpace(n, N)
    entries = {}
    for i in sp.indices():
        o = [0] * n
        for k in range(n):
            o[perm[k]] = i[k]
        entries[(tuple(o), i)] = one
    return TensorOperator(sp, entries)


def permutation_P(N: int, one=1) -> TensorOperator:
    return permutation_operator((1, 0), N, one)


def multiply(a: TensorOperator, b: TensorOperator) -> TensorOperator:
    a._check(b)
    rows: dict[tuple, list] = {}
    for (r, c), y in b.entries.items():
        rows.setdefault(r, []).append((c, y))
    out: dict = {}
    for (r, m), x in a.entries.items():
        for c, y in rows.get(m, ()):
            key = (r, c)
            v = x * y
            out[key] = out[key] + v if key in out else v
    return TensorOperator(a.space, out)


def multiply_all(ops: Sequence[TensorOperator]) -> TensorOperator:
    result = ops[0]
    for op in ops[1:]:
        result = multiply(result, op)
    return result


def transpose_leg(op: TensorOperator, leg: int) -> TensorOperator:
    if not 0 <= leg < op.n:
        raise ValueError(f"invalid leg {leg}")
    out = {}
    for (r, c), x in op.entries.items():
        r2, c2 = list(r), list(c)
        r2[leg], c2[leg] = c[leg], r[leg]
        out[(tuple(r2), tuple(c2))] = x
    return TensorOperator(op.space, out)


def embed(op: TensorOperator, legs: Sequence[int], n: int, one=1) -> TensorOperator:
    """Place a k-leg operator on the given legs of an n-leg space."""
    legs = tuple(legs)
    if len(legs) != op.n or len(set(legs)) != len(legs) or any(not 0 <= l < n for l in legs):
        raise ValueError("invalid leg assignment")
    rest = [l for l in range(n) if l not in legs]
    out = {}
    for (r, c), x in op.entries.items():
        for other in product(range(op.N), repeat=len(rest)):
            R, C = [0] * n, [0] * n
            for l, i, j in zip(legs, r, c):
                R[l], C[l] = i, j
            for l, i in zip(rest, other):
                R[l] = C[l] = i
            out[(tuple(R), tuple(C))] = x
    return TensorOperator(LegSpace(n, op.N), out)


def partial_trace(op: TensorOperator, legs: Sequence[int]) -> TensorOperator:
    legs = set(legs)
    if any(not 0 <= l < op.n for l in legs):
        raise ValueError("invalid leg")
    keep = [l for l in range(op.n) if l not in legs]
    out: dict = {}
    for (r, c), x in op.entries.items():
        if all(r[l] == c[l] for l in legs):
            key = (tuple(r[l] for l in keep), tuple(c[l] for l in keep))
            out[key] = out[key] + x if key in out else x
    return TensorOperator(LegSpace(len(keep), op.N), out)


def trace(op: TensorOperator):
    total = 0
    for (r, c), x in op.entries.items():
        if r == c:
            total = total + x
    return total


def _arg(arg):
    a = as_ratfunc(arg)
    if not a:
        raise ValueError("R-matrix argument is the zero form")
    return a


def yang_R(arg, N: int) -> TensorOperator:
    """R(arg) = 1 - (h/arg) P with exact RatFunc entries."""
    a = _arg(arg)
    x = var("h") / a
    one = FIELD.one
    return identity(2, N, one) - permutation_P(N, one).scale(x)


def normalized_R(arg, N: int, K: int) -> TensorOperator:
    """g(arg/h) R(arg) mod h^K, entries TruncatedSeries with RatFunc coefficients."""
    a = _arg(arg)
    phi, psi = r_scalars(a, N, K)
    return identity(2, N, phi) - permutation_P(N, psi)


def r_scalars(arg, N: int, K: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """The scalar series phi = g(arg/h) and psi = h g(arg/h)/arg."""
    a = as_ratfunc(arg)
    g = solve_g_series(N, K + 1)
    h = var("h")
    phi_f = sum((const(g[k]) * h ** k / a ** k for k in range(K)), FIELD.zero)
    psi_f = sum((const(g[k]) * h ** (k + 1) / a ** (k + 1) for k in range(K)), FIELD.zero)
    return ratfunc_to_series(phi_f, K), ratfunc_to_series(psi_f, K)


def to_series(op: TensorOperator, K: int) -> TensorOperator:
    """Convert exact RatFunc entries (h inside) to h-series mod h^K."""
    return op.map(lambda x: x if isinstance(x, TruncatedSeries) else ratfunc_to_series(x, K))


def series_identity(n: int, N: int, K: int) -> TensorOperator:
    return identity(n, N, TruncatedSeries.constant(FIELD.one, K))


def invert_series_operator(op: TensorOperator, K: int) -> TensorOperator:
    """Inverse of an operator whose h^0 part is the identity (Neumann series)."""
    one = series_identity(op.n, op.N, K)
    delta = one - op
    if any(x.coeffs and x.coeffs[0] for x in delta.entries.values()):
        raise ValueError("h^0 part is not the identity")
    result, power = one, one
    for _ in range(1, K):
        power = multiply(power, delta)
        if power.is_zero():
            break
        result = result + power
    return result


def lr_product(a: TensorOperator, b: TensorOperator) -> TensorOperator:
    """sum a1 b1 (x) b2 a2 for two-leg a, b."""
    return transpose_leg(multiply(transpose_leg(a, 1), transpose_leg(b, 1)), 1)


def rl_product(a: TensorOperator, b: TensorOperator) -> TensorOperator:
    """sum b1 a1 (x) a2 b2 for two-leg a, b."""
    return transpose_leg(multiply(transpose_leg(a, 0), transpose_leg(b, 0)), 0)


def antisymmetrizer(N: int, n: int | None = None) -> TensorOperator:
    """(1/n!) sum sgn(s) P_s on n legs (n = N by default)."""
    n = N if n is None else n
    total = zero(n, N)
    count = 0
    for perm in permutations(range(n)):
        count += 1
        total = total + permutation_operator(perm, N, Fraction(_sign(perm)))
    return total.scale(Fraction(1, count))


def _sign(perm: Sequence[int]) -> int:
    s = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def crossing_residuals(N: int, K: int, u: str = "u") -> dict[str, TensorOperator]:
    """Residuals of the crossing relation in its transposed and ordered-product forms."""
    x = var(u)
    h = var("h")
    rbar = normalized_R(x, N, K)
    rbar_inv = invert_series_operator(rbar, K)
    shifted = normalized_R(x + N * h, N, K)
    one = series_identity(2, N, K)
    return {
        "transpose": multiply(transpose_leg(rbar_inv, 0), transpose_leg(shifted, 0)) - one,
        "lr": lr_product(rbar_inv, shifted) - one,
        "rl": rl_product(rbar_inv, shifted) - one,
    }


def crossing_check(N: int, K: int) -> TensorOperator:
    res = crossing_residuals(N, K)
    return res["transpose"] + res["lr"] + res["rl"]


def unitarity_residual(N: int, K: int, u: str = "u") -> TensorOperator:
    x = var(u)
    return multiply(normalized_R(x, N, K), normalized_R(-x, N, K)) - series_identity(2, N, K)


def ybe_residual(N: int, u: str = "u", v: str = "v") -> TensorOperator:
    x, y = var(u), var(v)
    r12 = embed(yang_R(x, N), (0, 1), 3, FIELD.one)
    r13 = embed(yang_R(x + y, N), (0, 2), 3, FIELD.one)
    r23 = embed(yang_R(y, N), (1, 2), 3, FIELD.one)
    return multiply_all([r12, r13, r23]) - multiply_all([r23, r13, r12])


def product_R_nm(N: int, u: Sequence, v: Sequence, z=None, shift=0, variant: str = "plain",
                 K: int | None = None, transposed: bool = False,
                 reverse: bool = False) -> TensorOperator:
    """Ordered product of two-leg R-matrices R_ij, leg i < n <= j on n + m legs.

    variant: "plain" (R), "bar" (normalized R), "underline" and
    "underline-bar" (argument z + u_i + v_j instead of z + u_i - v_j).  The
    outer product over i runs forward; the inner product over j runs backward
    for plain and bar, forward for the underlined variants.  ``transposed``
    transposes each factor on its first leg and ``reverse`` reverses the
    complete factor order.
    """
    if variant not in ("plain", "bar", "underline", "underline-bar"):
        raise ValueError(f"invalid variant {variant!r}")
    return _product_R(u, v, z, shift, variant, K, transposed, N, reverse)


def _product_R(u, v, z, shift, variant, K, transposed, N, reverse=False):
    n, m = len(u), len(v)
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    if N is None:
        raise ValueError("N is required")
    bar = variant in ("bar", "underline-bar")
    under = variant.startswith("underline")
    if bar and K is None:
        raise ValueError("normalized variants need a precision K")
    zz = as_ratfunc(z) if z is not None else FIELD.zero
    sh = as_ratfunc(shift)
    factors = []
    for i in range(n):
        js = range(m) if under else range(m - 1, -1, -1)
        for j in js:
            vj = as_ratfunc(v[j])
            arg = zz + as_ratfunc(u[i]) + (vj if under else -vj) + sh
            r = normalized_R(arg, N, K) if bar else yang_R(arg, N)
            if transposed:
                r = transpose_leg(r, 0)
            factors.append(embed(r, (i, n + j), n + m, _one_like(r)))
    if reverse:
        factors.reverse()
    return multiply_all(factors)


def _one_like(op: TensorOperator):
    for x in op.entries.values():
        if isinstance(x, TruncatedSeries):
            return TruncatedSeries.constant(FIELD.one, x.precision)
        return FIELD.one
    return 1
