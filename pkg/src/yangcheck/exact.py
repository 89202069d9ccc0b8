"""Exact scalar layer: rationals, rational functions, h-truncated series and
directed Laurent expansions.

Rational functions live in one sympy sparse fraction field with a fixed
graded-lex variable order (``h`` last), so every value has a canonical
gcd-reduced form and values from different computations can be mixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

from sympy import QQ
from sympy.polys.fields import field
from sympy.polys.orderings import grlex

Rational = Fraction

SPECTRAL_NAMES: tuple[str, ...] = (
    "u", "v", "w", "x", "y", "z", "z0", "z1", "z2", "p", "q",
    "u1", "u2", "u3", "u4", "v1", "v2", "v3", "v4",
)
VARIABLE_NAMES: tuple[str, ...] = SPECTRAL_NAMES + ("h",)

FIELD, *_GENS = field(",".join(VARIABLE_NAMES), QQ, grlex)
RING = FIELD.ring
_GEN_BY_NAME = dict(zip(VARIABLE_NAMES, _GENS))
_RING_GEN_BY_NAME = dict(zip(VARIABLE_NAMES, RING.gens))

RatFunc = type(FIELD.one)


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = "spectral"

    def __post_init__(self) -> None:
        if self.name not in _GEN_BY_NAME:
            raise ValueError(f"unknown variable {self.name!r}")
        expected = "deformation" if self.name == "h" else "spectral"
        if self.kind != expected:
            raise ValueError(f"variable {self.name!r} must have kind {expected}")


H = Variable("h", "deformation")


def var(name: str) -> RatFunc:
    """The rational function consisting of a single variable."""
    try:
        return _GEN_BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}") from None


def const(q: int | Fraction) -> RatFunc:
    q = Fraction(q)
    return FIELD(q.numerator) / FIELD(q.denominator)


def as_ratfunc(value) -> RatFunc:
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, (int, Fraction)):
        return const(value)
    if isinstance(value, str):
        return var(value)
    raise TypeError(f"cannot convert {type(value).__name__} to RatFunc")


def ratfunc_arith(a, b, op: str) -> RatFunc:
    a, b = as_ratfunc(a), as_ratfunc(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if not b:
            raise ZeroDivisionError("division by the zero rational function")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def variables_of(f: RatFunc) -> set[str]:
    names = set()
    for poly in (f.numer, f.denom):
        for monom in poly.monoms():
            names.update(n for n, e in zip(VARIABLE_NAMES, monom) if e)
    return names


def evaluate(f: RatFunc, point: Mapping[str, Fraction]) -> Fraction:
    """Evaluate at a rational point; every variable of ``f`` must be assigned."""
    vals = [Fraction(point.get(n, 0)) for n in VARIABLE_NAMES]

    def ev(poly) -> Fraction:
        total = Fraction(0)
        for monom, coeff in poly.terms():
            term = Fraction(int(coeff.numerator), int(coeff.denominator))
            for v, e in zip(vals, monom):
                if e:
                    term *= v ** e
            total += term
        return total

    den = ev(f.denom)
    if den == 0:
        raise ZeroDivisionError("point lies on the pole set")
    return ev(f.numer) / den


def cancel_and_eval(f: RatFunc, x: str, point) -> RatFunc:
    """Value of ``f`` at ``x = point`` after cancelling common factors.

    ``point`` is a polynomial (typically a linear form) not involving ``x``.
    Since ``f`` is stored gcd-reduced, a vanishing denominator after
    substitution means a genuine pole.
    """
    point = as_ratfunc(point)
    if point.denom != RING.one:
        raise ValueError("evaluation point must be a polynomial")
    if x in variables_of(point):
        raise ValueError("evaluation point must not involve the variable itself")
    gen = _RING_GEN_BY_NAME[x]
    num = f.numer.compose(gen, point.numer)
    den = f.denom.compose(gen, point.numer)
    if not den:
        raise ZeroDivisionError(f"genuine pole at {x} = {point}")
    return FIELD(num) / FIELD(den)


def _is_zero(c) -> bool:
    return not c


@dataclass(frozen=True)
class TruncatedSeries:
    """A power series in h known modulo h**precision.

    Coefficients may be rationals or rational functions in the spectral
    variables; they must not contain h themselves.
    """

    coeffs: tuple
    precision: int

    def __post_init__(self) -> None:
        if self.precision < 1:
            raise ValueError("precision must be positive")
        cs = list(self.coeffs[: self.precision])
        while cs and _is_zero(cs[-1]):
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c, precision: int) -> TruncatedSeries:
        return cls((c,), precision)

    @classmethod
    def from_ratfunc(cls, f: RatFunc, precision: int) -> TruncatedSeries:
        """Split a rational function polynomial in h into h-coefficients."""
        f = as_ratfunc(f)
        hidx = VARIABLE_NAMES.index("h")
        if any(m[hidx] for m in f.denom.monoms()):
            raise ValueError("denominator depends on h; expand it first")
        buckets: dict[int, object] = {}
        for monom, coeff in f.numer.terms():
            k = monom[hidx]
            if k >= precision:
                continue
            m = list(monom)
            m[hidx] = 0
            buckets[k] = buckets.get(k, RING.zero) + RING({tuple(m): coeff})
        cs = [FIELD(buckets.get(k, RING.zero)) / FIELD(f.denom) for k in range(precision)]
        return cls(tuple(cs), precision)

    def coeff(self, k: int):
        if k >= self.precision:
            raise IndexError(f"h^{k} is beyond precision {self.precision}")
        return self.coeffs[k] if k < len(self.coeffs) else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return not self.is_zero()

    def _coerce(self, other) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries((other,), self.precision)

    def __add__(self, other) -> TruncatedSeries:
        other = self._coerce(other)
        prec = min(self.precision, other.precision)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return TruncatedSeries(tuple(x + y for x, y in zip(a, b)), prec)

    __radd__ = __add__

    def __neg__(self) -> TruncatedSeries:
        return TruncatedSeries(tuple(-c for c in self.coeffs), self.precision)

    def __sub__(self, other) -> TruncatedSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> TruncatedSeries:
        return self._coerce(other) - self

    def __mul__(self, other) -> TruncatedSeries:
        other = self._coerce(other)
        prec = min(self.precision, other.precision)
        out: list = [0] * prec
        for i, a in enumerate(self.coeffs):
            if i >= prec:
                break
            for j, b in enumerate(other.coeffs):
                if i + j >= prec:
                    break
                out[i + j] = out[i + j] + a * b
        return TruncatedSeries(tuple(out), prec)

    __rmul__ = __mul__

    def shift(self, k: int) -> TruncatedSeries:
        """Multiply by h**k."""
        return TruncatedSeries((0,) * k + self.coeffs, self.precision)

    def map(self, fn) -> TruncatedSeries:
        return TruncatedSeries(tuple(fn(c) for c in self.coeffs), self.precision)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries((other,), self.precision)
        return (self - other).is_zero()

    def __hash__(self) -> int:
        return hash((self.coeffs, self.precision))

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"0 + O(h^{self.precision})"
        parts = [f"({c})*h^{k}" for k, c in enumerate(self.coeffs) if not _is_zero(c)]
        return " + ".join(parts) + f" + O(h^{self.precision})"


def series_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def series_invert(a: TruncatedSeries) -> TruncatedSeries:
    c0 = a.coeff(0) if a.coeffs else 0
    if _is_zero(c0):
        raise ZeroDivisionError("constant term is not invertible")
    inv0 = 1 / c0 if not isinstance(c0, int) else Fraction(1, c0)
    out = [inv0]
    for n in range(1, a.precision):
        acc = 0
        for k in range(1, n + 1):
            if k < len(a.coeffs):
                acc = acc + a.coeffs[k] * out[n - k]
        out.append(-acc * inv0)
    return TruncatedSeries(tuple(out), a.precision)


@dataclass(frozen=True)
class GSeries:
    N: int
    coeffs: tuple[Fraction, ...]  # g_0 .. g_{K-1}
    precision: int

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]


@lru_cache(maxsize=None)
def solve_g_series(N: int, K: int) -> GSeries:
    """Solve g(u+N) = g(u)(1 - u^-2) for g in 1 + u^-1 Q[[u^-1]].

    The coefficient of u^-n reads
        -(n-1) N g_{n-1} + sum_{k<=n-2} g_k binom(-k, n-k) N^(n-k) = -g_{n-2},
    which fixes g_{n-1}.
    """
    if N < 2 or K < 1:
        raise ValueError("need N >= 2 and K >= 1")
    g = [Fraction(1)]
    for n in range(2, K + 1):
        acc = Fraction(0)
        for k in range(0, n - 1):
            acc += g[k] * _binom(-k, n - k) * Fraction(N) ** (n - k)
        g.append((acc + g[n - 2]) / ((n - 1) * N))
    return GSeries(N, tuple(g[:K]), K)


def g_residual(gs: GSeries, order: int) -> list[Fraction]:
    """Coefficients of u^-1 .. u^-order in g(u+N) - g(u)(1 - u^-2), using the
    stored g_k (unknown g_k treated as zero, so only orders <= precision are
    meaningful)."""
    N = gs.N
    g = list(gs.coeffs) + [Fraction(0)] * (order + 2)
    out = []
    for n in range(1, order + 1):
        lhs = Fraction(0)
        for k in range(0, n + 1):
            m = n - k
            lhs += g[k] * _binom(-k, m) * Fraction(N) ** m
        rhs = g[n] - (g[n - 2] if n >= 2 else 0)
        out.append(lhs - rhs)
    return out


def _binom(a: int, m: int) -> int:
    """Generalized binomial coefficient binom(a, m) for integer a, m >= 0."""
    if m < 0:
        return 0
    if a >= 0:
        return comb(a, m)
    return (-1) ** m * comb(-a + m - 1, m)


binom = _binom


@dataclass(frozen=True)
class LaurentExpansion:
    variable: str
    window: tuple[int, int]
    coefficients: Mapping[int, TruncatedSeries] = dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        lo, hi = self.window
        for e, c in self.coefficients.items():
            if not lo <= e <= hi:
                raise ValueError(f"exponent {e} outside window {self.window}")
            for k in c.coeffs:
                if k and self.variable in variables_of(as_ratfunc(k)):
                    raise ValueError("coefficient involves the dominant variable")

    def coefficient(self, e: int) -> TruncatedSeries:
        lo, hi = self.window
        if not lo <= e <= hi:
            raise IndexError(f"exponent {e} outside window {self.window}")
        return self.coefficients.get(e, TruncatedSeries((), self._precision()))

    def _precision(self) -> int:
        precs = [c.precision for c in self.coefficients.values()]
        return min(precs) if precs else 1

    def to_ratfunc(self) -> RatFunc:
        """Sum of the stored terms as a rational function (h included)."""
        x = var(self.variable)
        h = var("h")
        total = FIELD.zero
        for e, c in self.coefficients.items():
            for k, a in enumerate(c.coeffs):
                total += as_ratfunc(a) * h ** k * x ** e
        return total


def linear_form(terms: Sequence[tuple[str, int | Fraction]] | Mapping[str, int | Fraction]) -> tuple:
    """Normalize a linear form to an ordered tuple of (variable, coefficient)."""
    items = terms.items() if isinstance(terms, Mapping) else terms
    out = []
    for name, c in items:
        var(name)
        c = Fraction(c)
        if c:
            out.append((name, c))
    return tuple(out)


def expand_inverse_linear(form, power: int, dominant: str, window: tuple[int, int],
                          precision: int | None = None) -> LaurentExpansion:
    """Expand form**power (power < 0) in negative powers of ``dominant``.

    ``form`` is an ordered sequence of (variable, coefficient); ``h`` may
    appear and ends up in the TruncatedSeries coefficients.
    """
    if power >= 0:
        raise ValueError("power must be negative")
    form = linear_form(form)
    coeffs = dict(form)
    if dominant not in coeffs:
        raise ValueError(f"dominant variable {dominant!r} absent from form")
    a = coeffs[dominant]
    rest = FIELD.zero
    for name, c in form:
        if name != dominant:
            rest += const(c) * var(name)
    lo, hi = window
    k = -power
    m_max = -k - lo
    prec = precision if precision is not None else max(m_max, 0) + 1
    out: dict[int, TruncatedSeries] = {}
    for m in range(0, m_max + 1):
        e = -k - m
        if e > hi:
            continue
        c = const(Fraction(_binom(power, m)) * a ** (power - m)) * rest ** m
        s = TruncatedSeries.from_ratfunc(c, prec)
        if s:
            out[e] = s
    return LaurentExpansion(dominant, (lo, hi), out)


def field_elements(values: Iterable) -> list[RatFunc]:
    return [as_ratfunc(v) for v in values]


def h_split(poly, precision: int) -> list:
    """Split a polynomial into its h-coefficients (polynomials free of h)."""
    hidx = VARIABLE_NAMES.index("h")
    buckets = [RING.zero] * precision
    for monom, coeff in poly.terms():
        k = monom[hidx]
        if k < precision:
            m = list(monom)
            m[hidx] = 0
            buckets[k] += RING({tuple(m): coeff})
    return buckets


def ratfunc_to_series(f, precision: int) -> TruncatedSeries:
    """Expand a rational function in powers of h.

    Denominators depending on h are inverted h-adically, which matches the
    convention that a spectral variable written to the left dominates h.
    """
    f = as_ratfunc(f)
    num = TruncatedSeries(tuple(FIELD(p) for p in h_split(f.numer, precision)), precision)
    den_parts = h_split(f.denom, precision)
    if not den_parts[0]:
        raise ZeroDivisionError("denominator vanishes at h = 0")
    if all(not p for p in den_parts[1:]):
        inv = FIELD.one / FIELD(den_parts[0])
        return num.map(lambda c: c * inv)
    den = TruncatedSeries(tuple(FIELD(p) for p in den_parts), precision)
    return num * series_invert(den)
