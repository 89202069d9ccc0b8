"""Normal ordering in the dual Yangian.

A creation symbol x^(r)_ij = t^(-r)_ij is the tuple (r, i, j) with 0-based
indices; tuple comparison gives the canonical order (mode, then i, then j).
An NCPoly is a dict {(k, word): coefficient} standing for
sum coefficient * h^k * word, known modulo h^K.

Clearing denominators in the RTT relation for T^+ gives the mode relation

    [x^r_ij, x^s_kl] = d_kj x^(r+s)_il - d_il x^(r+s)_kj
        + h sum_{a=max(0,s-r)}^{s-1} (x^(r+a+1)_kj x^(s-a)_il - x^(s-a)_kj x^(r+a+1)_il).

Rewriting an inversion ``a b`` (a > b) as ``b a + [a, b]`` terminates: the
first two correction terms are shorter words, the rest carry an extra h.
"""
from __future__ import annotations

import random
from typing import Iterable, Mapping

from gmpy2 import mpq

Symbol = tuple[int, int, int]
Word = tuple[Symbol, ...]
NCPoly = dict  # {(k, word): mpq}

ONE = mpq(1)


def commutator_terms(a: Symbol, b: Symbol) -> list[tuple[mpq, int, Word]]:
    """[a, b] as a list of (coefficient, h-power, word)."""
    r, i, j = a
    s, k, l = b
    out: list[tuple[mpq, int, Word]] = []
    if k == j:
        out.append((ONE, 0, ((r + s, i, l),)))
    if i == l:
        out.append((-ONE, 0, ((r + s, k, j),)))
    for t in range(max(0, s - r), s):
        p, q = r + t + 1, s - t
        out.append((ONE, 1, ((p, k, j), (q, i, l))))
        out.append((-ONE, 1, ((q, k, j), (p, i, l))))
    return out


def derive_mode_swap(a: Symbol, b: Symbol, K: int, N: int | None = None) -> NCPoly:
    """The word ``a b`` rewritten as ``b a`` plus its normal-ordered correction."""
    orderer = NormalOrderer(K)
    result: NCPoly = {(0, (b, a)): ONE}
    if a == b:
        return result
    correction: NCPoly = {}
    for coeff, k, word in commutator_terms(a, b):
        if k < K:
            add_into(correction, orderer.normal_order(word, K - k), coeff, k, K)
    add_into(result, correction, ONE, 0, K)
    return result


def add_into(target: dict, source: Mapping, coeff, shift: int, K: int) -> None:
    for (k, w), c in source.items():
        kk = k + shift
        if kk >= K:
            continue
        key = (kk, w)
        v = target.get(key, 0) + coeff * c
        if v:
            target[key] = v
        else:
            target.pop(key, None)


def first_descent(word: Word) -> int:
    for i in range(len(word) - 1):
        if word[i] > word[i + 1]:
            return i
    return -1


def is_sorted(word: Word) -> bool:
    return first_descent(word) < 0


class NormalOrderer:
    """Memoized normal ordering modulo h^K (level independent).

    Each result is cached per (word, precision); a correction carrying h^k is
    computed at precision reduced by k, which bounds the recursion.
    """

    def __init__(self, K: int):
        self.K = K
        self._cache: dict[tuple[Word, int], NCPoly] = {}

    def normal_order(self, word: Word, P: int | None = None) -> NCPoly:
        P = self.K if P is None else P
        if P <= 0:
            return {}
        key = (word, P)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        i = first_descent(word)
        if i < 0:
            res = {(0, word): ONE}
        else:
            res = self._rewrite(word, i, P, self.normal_order)
        self._cache[key] = res
        return res

    @staticmethod
    def _rewrite(word: Word, i: int, P: int, recurse) -> NCPoly:
        a, b = word[i], word[i + 1]
        pre, post = word[:i], word[i + 2:]
        res: NCPoly = {}
        add_into(res, recurse(pre + (b, a) + post, P), ONE, 0, P)
        for coeff, k, letters in commutator_terms(a, b):
            if k < P:
                add_into(res, recurse(pre + letters + post, P - k), coeff, k, P)
        return res

    def normal_order_random(self, word: Word, rng: random.Random, P: int | None = None) -> NCPoly:
        """Uncached rewriting that resolves a randomly chosen inversion each step."""
        P = self.K if P is None else P
        if P <= 0:
            return {}
        descents = [i for i in range(len(word) - 1) if word[i] > word[i + 1]]
        if not descents:
            return {(0, word): ONE}
        i = rng.choice(descents)
        return self._rewrite(word, i, P, lambda w, p: self.normal_order_random(w, rng, p))

    def order_poly(self, poly: Mapping, P: int | None = None) -> NCPoly:
        P = self.K if P is None else P
        out: NCPoly = {}
        for (k, w), c in poly.items():
            if k < P:
                add_into(out, self.normal_order(w, P - k), c, k, P)
        return out

    def multiply(self, p: Mapping, q: Mapping, P: int | None = None) -> NCPoly:
        """Product of two NCPolys, normal ordered."""
        P = self.K if P is None else P
        out: NCPoly = {}
        for (k1, w1), c1 in p.items():
            for (k2, w2), c2 in q.items():
                k = k1 + k2
                if k < P:
                    add_into(out, self.normal_order(w1 + w2, P - k), c1 * c2, k, P)
        return out

    def create(self, sym: Symbol, state: Mapping, P: int | None = None) -> NCPoly:
        """Left multiplication of a normal-ordered state by one symbol."""
        P = self.K if P is None else P
        out: NCPoly = {}
        for (k, w), c in state.items():
            if k < P:
                add_into(out, self.normal_order((sym,) + w, P - k), c, k, P)
        return out


def poly_sub(p: Mapping, q: Mapping) -> NCPoly:
    out = dict(p)
    for key, c in q.items():
        v = out.get(key, 0) - c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


def word_modesum(word: Word) -> int:
    return sum(s[0] for s in word)


def symbols(N: int, max_mode: int) -> list[Symbol]:
    return [(r, i, j) for r in range(1, max_mode + 1) for i in range(N) for j in range(N)]


def sorted_words(N: int, max_len: int, max_mode: int) -> list[Word]:
    """All normal-ordered words of length <= max_len with modes <= max_mode."""
    syms = symbols(N, max_mode)
    out: list[Word] = [()]

    def rec(prefix: Word, start: int) -> None:
        if len(prefix) == max_len:
            return
        for idx in range(start, len(syms)):
            w = prefix + (syms[idx],)
            out.append(w)
            rec(w, idx)

    rec((), 0)
    return out


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(f"t{i + 1}{j + 1}(-{r})" for r, i, j in word)


def format_poly(poly: Mapping) -> str:
    if not poly:
        return "0"
    parts = []
    for (k, w), c in sorted(poly.items()):
        parts.append(f"({c})h^{k} {format_word(w)}")
    return " + ".join(parts)


def words_in(poly: Iterable) -> set:
    return {w for (_, w) in poly}
