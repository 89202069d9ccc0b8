"""Young diagrams, standard tableaux, the symmetric group algebra and the
fusion procedure for the Yang R-matrix."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterator, Mapping, Sequence

from .exact import FIELD, cancel_and_eval, const, var, variables_of
from .tensor import TensorOperator, permutation_operator, zero

Perm = tuple[int, ...]


@dataclass(frozen=True)
class YoungDiagram:
    partition: tuple[int, ...]

    def __post_init__(self) -> None:
        p = tuple(int(x) for x in self.partition)
        if any(x <= 0 for x in p) or any(a < b for a, b in zip(p, p[1:])):
            raise ValueError(f"not a partition: {self.partition}")
        object.__setattr__(self, "partition", p)

    @property
    def n(self) -> int:
        return sum(self.partition)

    @property
    def rows(self) -> int:
        return len(self.partition)

    def boxes(self) -> Iterator[tuple[int, int]]:
        for i, length in enumerate(self.partition):
            for j in range(length):
                yield i, j

    def conjugate(self) -> tuple[int, ...]:
        if not self.partition:
            return ()
        return tuple(sum(1 for x in self.partition if x > j) for j in range(self.partition[0]))

    @classmethod
    def parse(cls, text: str) -> YoungDiagram:
        return cls(tuple(int(x) for x in text.replace(" ", "").split(",") if x))


@dataclass(frozen=True)
class StandardTableau:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        YoungDiagram(tuple(len(r) for r in rows))
        entries = sorted(x for r in rows for x in r)
        if entries != list(range(1, len(entries) + 1)):
            raise ValueError("entries must be 1..n")
        for r in rows:
            if any(a >= b for a, b in zip(r, r[1:])):
                raise ValueError("rows must increase")
        for i in range(1, len(rows)):
            for j, x in enumerate(rows[i]):
                if rows[i - 1][j] >= x:
                    raise ValueError("columns must increase")

    @property
    def shape(self) -> YoungDiagram:
        return YoungDiagram(tuple(len(r) for r in self.rows))

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.rows)

    def position(self, p: int) -> tuple[int, int]:
        for i, r in enumerate(self.rows):
            if p in r:
                return i, r.index(p)
        raise KeyError(p)

    def restrict(self) -> StandardTableau:
        """Remove the largest entry."""
        n = self.n
        rows = [tuple(x for x in r if x != n) for r in self.rows]
        return StandardTableau(tuple(r for r in rows if r))

    @classmethod
    def parse(cls, text: str) -> StandardTableau:
        """Rows separated by '/' or ';', entries by ',' or spaces."""
        rows = []
        for chunk in text.replace(";", "/").split("/"):
            chunk = chunk.replace(",", " ").strip()
            if chunk:
                rows.append(tuple(int(x) for x in chunk.split()))
        return cls(tuple(rows))

    def __str__(self) -> str:
        return "/".join(" ".join(map(str, r)) for r in self.rows)


def enumerate_standard_tableaux(nu: YoungDiagram | Sequence[int]) -> list[StandardTableau]:
    """All standard tableaux of shape nu, in lexicographic order of row reading."""
    if not isinstance(nu, YoungDiagram):
        nu = YoungDiagram(tuple(nu))
    shape = nu.partition
    out: list[StandardTableau] = []

    def rec(filled: list[list[int]], k: int) -> None:
        if k > nu.n:
            out.append(StandardTableau(tuple(tuple(r) for r in filled)))
            return
        for i in range(len(shape)):
            j = len(filled[i])
            if j < shape[i] and (i == 0 or len(filled[i - 1]) > j):
                filled[i].append(k)
                rec(filled, k + 1)
                filled[i].pop()

    rec([[] for _ in shape], 1)
    out.sort(key=lambda t: [x for r in t.rows for x in r])
    return out


def contents(U: StandardTableau) -> tuple[int, ...]:
    out = []
    for p in range(1, U.n + 1):
        i, j = U.position(p)
        out.append(j - i)
    return tuple(out)


def hook_product(nu: YoungDiagram | Sequence[int]) -> int:
    if not isinstance(nu, YoungDiagram):
        nu = YoungDiagram(tuple(nu))
    conj = nu.conjugate()
    prod = 1
    for i, j in nu.boxes():
        prod *= (nu.partition[i] - j - 1) + (conj[j] - i - 1) + 1
    return prod


def addable_contents(partition: Sequence[int]) -> list[int]:
    p = list(partition)
    out = []
    for i in range(len(p) + 1):
        length = p[i] if i < len(p) else 0
        if i == 0 or p[i - 1] > length:
            out.append(length - i)
    return out


class GroupAlgebraElement:
    """Finite formal combination of permutations of {0..n-1}."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Mapping[Perm, object]):
        self.n = n
        self.coeffs = {tuple(p): c for p, c in coeffs.items() if c}

    @classmethod
    def identity(cls, n: int, one=1) -> GroupAlgebraElement:
        return cls(n, {tuple(range(n)): one})

    @classmethod
    def transposition(cls, n: int, i: int, j: int, coeff=1) -> GroupAlgebraElement:
        p = list(range(n))
        p[i], p[j] = p[j], p[i]
        return cls(n, {tuple(p): coeff})

    def __add__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out[p] + c if p in out else c
        return GroupAlgebraElement(self.n, out)

    def __neg__(self) -> GroupAlgebraElement:
        return self.map(lambda c: -c)

    def __sub__(self, other: GroupAlgebraElement) -> GroupAlgebraElement:
        return self + (-other)

    def __mul__(self, other) -> GroupAlgebraElement:
        if not isinstance(other, GroupAlgebraElement):
            return self.map(lambda c: c * other)
        out: dict = {}
        for p, a in self.coeffs.items():
            for q, b in other.coeffs.items():
                r = tuple(p[q[k]] for k in range(self.n))
                v = a * b
                out[r] = out[r] + v if r in out else v
        return GroupAlgebraElement(self.n, out)

    __rmul__ = None

    def map(self, fn) -> GroupAlgebraElement:
        return GroupAlgebraElement(self.n, {p: fn(c) for p, c in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        terms = ", ".join(f"{p}: {c}" for p, c in sorted(self.coeffs.items()))
        return f"GroupAlgebraElement(n={self.n}, {{{terms}}})"


def jucys_murphy(n: int, k: int) -> GroupAlgebraElement:
    """J_k = sum_{i<k} (i k), with 0-based k."""
    out = GroupAlgebraElement(n, {})
    for i in range(k):
        out = out + GroupAlgebraElement.transposition(n, i, k, Fraction(1))
    return out


def seminormal_idempotent(U: StandardTableau) -> GroupAlgebraElement:
    """Primitive idempotent e_U of the Young seminormal form.

    Built from the branching recursion
        e_U = e_{U'} prod_{c} (J_n - c)/(c_n - c),
    c running over the addable contents of the shape of U' other than c_n.
    """
    return _seminormal(U.rows)


@lru_cache(maxsize=None)
def _seminormal(rows: tuple[tuple[int, ...], ...]) -> GroupAlgebraElement:
    U = StandardTableau(rows)
    n = U.n
    if n == 1:
        return GroupAlgebraElement.identity(1, Fraction(1))
    prev = _seminormal(U.restrict().rows)
    e = GroupAlgebraElement(n, {p + (n - 1,): c for p, c in prev.coeffs.items()})
    cn = contents(U)[-1]
    J = jucys_murphy(n, n - 1)
    one = GroupAlgebraElement.identity(n, Fraction(1))
    for c in addable_contents(U.restrict().shape.partition):
        if c == cn:
            continue
        e = e * ((J - one * Fraction(c)) * Fraction(1, cn - c))
    return e


def act_on_tensor(a: GroupAlgebraElement, N: int) -> TensorOperator:
    """Image of a group algebra element permuting the tensor factors."""
    total = zero(a.n, N)
    for p, c in a.coeffs.items():
        total = total + permutation_operator(p, N, c)
    return total


def r_product_group_algebra(n: int, names: Sequence[str] | None = None) -> GroupAlgebraElement:
    """prod_{i<j} (1 - h/(u_i - u_j) (i j)) in lexicographic pair order."""
    names = list(names or [f"u{k}" for k in range(1, n + 1)])
    h = var("h")
    one = FIELD.one
    result = GroupAlgebraElement.identity(n, one)
    for i in range(n):
        for j in range(i + 1, n):
            f = -h / (var(names[i]) - var(names[j]))
            factor = GroupAlgebraElement.identity(n, one) + GroupAlgebraElement.transposition(n, i, j, f)
            result = result * factor
    return result


def fuse_group_algebra(U: StandardTableau) -> GroupAlgebraElement:
    """Consecutive evaluation u_k = h c_k of the R-matrix product, divided by
    the hook product.  The result is checked to be free of all variables."""
    n = U.n
    names = [f"u{k}" for k in range(1, n + 1)]
    if n > len(names) or n > 4:
        raise ValueError("fusion is supported for at most 4 boxes")
    c = contents(U)
    h = var("h")
    elt = r_product_group_algebra(n, names)
    for k in range(n):
        point = const(c[k]) * h
        elt = elt.map(lambda f, k=k, point=point: cancel_and_eval(f, names[k], point))
    pi = hook_product(U.shape)
    out = {}
    for p, f in elt.coeffs.items():
        f = f / pi
        if variables_of(f):
            raise ArithmeticError(f"fusion result depends on {sorted(variables_of(f))}")
        num, den = f.numer.LC if f.numer else 0, f.denom.LC
        out[p] = Fraction(int(num.numerator), int(num.denominator)) / Fraction(
            int(den.numerator), int(den.denominator)) if f else Fraction(0)
    return GroupAlgebraElement(n, out)


def fuse(U: StandardTableau, N: int) -> TensorOperator:
    if U.shape.rows > N:
        raise ValueError("diagram has more than N rows")
    return act_on_tensor(fuse_group_algebra(U), N)


def diagrams_up_to(n_max: int, max_rows: int | None = None) -> list[YoungDiagram]:
    out = []

    def parts(n: int, largest: int) -> Iterator[tuple[int, ...]]:
        if n == 0:
            yield ()
            return
        for k in range(min(n, largest), 0, -1):
            for rest in parts(n - k, k):
                yield (k,) + rest

    for n in range(1, n_max + 1):
        for p in parts(n, n):
            if max_rows is None or len(p) <= max_rows:
                out.append(YoungDiagram(p))
    return out


def all_permutations(n: int) -> list[Perm]:
    return list(permutations(range(n)))
