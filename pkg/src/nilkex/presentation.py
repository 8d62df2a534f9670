"""Nilpotent presentations, collection to normal form, and the overlap checks.

A presentation on generators x1..xn is stored 0-based internally.  Elements
are exponent vectors (plain tuples of Python ints), the exponents of the
normal form x1^e1 ... xn^en.  Words are sequences of (generator, exponent)
pairs with 1-based generator indices, which is also how the text format and
every public function number generators.

Collection works from the left: the collected prefix is always a normal form
and each incoming syllable x_j^b is absorbed by

    (u . v) x_j^b = u x_j^b . v^(x_j^b)

where u = x1^e1..xj^ej and v is the tail on generators after j.  The tail is
moved across the syllable as a whole by applying the conjugation automorphism
of x_j (the ``conj`` table for b > 0, the ``conjinv`` table for b < 0) |b|
times, by repeated squaring, so exponents of any size cost O(log |b|).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

ExponentVector = Tuple[int, ...]
Word = Sequence[Tuple[int, int]]

INF = None


class PresentationError(ValueError):
    """Malformed presentation text or relation table."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col or 1}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class NilpotentPresentation:
    """Triangular power/conjugation presentation of a nilpotent group.

    ``orders[i]`` is the relative order of generator i (None for infinite).
    ``power[i]`` is the exponent vector of x_i^{s_i}; ``conj[(j, i)]`` the
    exponents w of x_j^-1 x_i x_j = x_i w and ``conjinv[(j, i)]`` those of
    x_j x_i x_j^-1 = x_i w, always with j < i and w on generators after i.
    Missing entries mean the trivial relation.  All indices are 0-based.
    """

    n: int
    orders: Tuple[Optional[int], ...]
    power: Dict[int, ExponentVector] = field(default_factory=dict)
    conj: Dict[Tuple[int, int], ExponentVector] = field(default_factory=dict)
    conjinv: Dict[Tuple[int, int], ExponentVector] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.n < 1:
            raise PresentationError("need at least one generator")
        if len(self.orders) != self.n:
            raise PresentationError("orders has wrong length")
        for s in self.orders:
            if s is not None and s < 1:
                raise PresentationError(f"relative order {s} must be positive")
        for i, rhs in self.power.items():
            if self.orders[i] is None:
                raise PresentationError(f"power relation for infinite generator {i + 1}")
            self._check_rhs(rhs, i, f"pow {i + 1}")
        for table, name in ((self.conj, "conj"), (self.conjinv, "conjinv")):
            for (j, i), rhs in table.items():
                if not 0 <= j < i < self.n:
                    raise PresentationError(f"non-triangular relation {name} {j + 1} {i + 1}")
                self._check_rhs(rhs, i, f"{name} {j + 1} {i + 1}")

    def _check_rhs(self, rhs: ExponentVector, i: int, what: str) -> None:
        if len(rhs) != self.n:
            raise PresentationError(f"{what}: right-hand side has wrong length")
        for k, e in enumerate(rhs):
            if e and k <= i:
                raise PresentationError(f"{what}: non-triangular (x{k + 1} on the right)")
            s = self.orders[k]
            if s is not None and not 0 <= e < s:
                raise PresentationError(f"{what}: exponent {e} of x{k + 1} out of range [0, {s})")

    def __hash__(self):
        return hash((self.n, self.orders, tuple(sorted(self.power.items())),
                     tuple(sorted(self.conj.items())), tuple(sorted(self.conjinv.items()))))

    @property
    def identity(self) -> ExponentVector:
        return (0,) * self.n

    def generator(self, i: int) -> ExponentVector:
        """Exponent vector of x_i (1-based)."""
        e = [0] * self.n
        e[i - 1] = 1
        return tuple(e)

    @property
    def is_finite(self) -> bool:
        return all(s is not None for s in self.orders)

    def order(self) -> Optional[int]:
        if not self.is_finite:
            return None
        total = 1
        for s in self.orders:
            total *= s
        return total

    def is_normal_form(self, e: Sequence[int]) -> bool:
        if len(e) != self.n:
            return False
        return all(s is None or 0 <= x < s for x, s in zip(e, self.orders))

    # -- collection ---------------------------------------------------------

    def _abelian_from(self) -> int:
        """Smallest t such that generators t..n-1 pairwise commute."""
        t = self._cache.get("abelian_from")
        if t is None:
            t = self.n
            while t > 0:
                j = t - 1
                if any(self.conj.get((j, i)) or self.conjinv.get((j, i))
                       for i in range(t, self.n)):
                    break
                t = j
            self._cache["abelian_from"] = t
        return t

    def _normalize_abelian(self, e: List[int], start: int) -> ExponentVector:
        # carries through power relations; only valid on a commuting tail
        for i in range(start, self.n):
            s = self.orders[i]
            if s is None or 0 <= e[i] < s:
                continue
            q, e[i] = divmod(e[i], s)
            rhs = self.power.get(i)
            if rhs:
                for k in range(i + 1, self.n):
                    if rhs[k]:
                        e[k] += q * rhs[k]
        return tuple(e)

    def _start(self, e: Sequence[int]) -> int:
        for i, x in enumerate(e):
            if x:
                return i
        return self.n

    def _mul(self, a: ExponentVector, b: ExponentVector) -> ExponentVector:
        t = self._abelian_from()
        if self._start(a) >= t and self._start(b) >= t:
            return self._normalize_abelian([x + y for x, y in zip(a, b)], t)
        res = a
        for j, bj in enumerate(b):
            if bj:
                res = self._mul_syllable(res, j, bj)
        return res

    def _mul_syllable(self, e: ExponentVector, j: int, b: int) -> ExponentVector:
        tail = (0,) * (j + 1) + tuple(e[j + 1:])
        if any(tail):
            tail = self._conj_power(tail, j, b)
        ej = e[j] + b
        s = self.orders[j]
        if s is None:
            q, r = 0, ej
        else:
            q, r = divmod(ej, s)
        if q and self.power.get(j):
            tail = self._mul(self._power(self.power[j], q), tail)
        return tuple(e[:j]) + (r,) + tuple(tail[j + 1:])

    def _power(self, a: ExponentVector, k: int) -> ExponentVector:
        if k == 0 or not any(a):
            return self.identity
        t = self._abelian_from()
        start = self._start(a)
        if start >= t:
            return self._normalize_abelian([k * x for x in a], t)
        if k < 0:
            a, k = self._inverse(a), -k
        result = self.identity
        base = a
        while k:
            if k & 1:
                result = self._mul(result, base)
            k >>= 1
            if k:
                base = self._mul(base, base)
        return result

    def _inverse(self, a: ExponentVector) -> ExponentVector:
        t = self._abelian_from()
        if self._start(a) >= t:
            return self._normalize_abelian([-x for x in a], t)
        res = self.identity
        for j in range(self.n - 1, -1, -1):
            if a[j]:
                res = self._mul_syllable(res, j, -a[j])
        return res

    def _aut_images(self, j: int, sign: int) -> List[ExponentVector]:
        """Images of x_{j+1}..x_{n-1} under conjugation by x_j^sign."""
        table = self.conj if sign > 0 else self.conjinv
        images = []
        for i in range(j + 1, self.n):
            w = table.get((j, i))
            img = [0] * self.n
            img[i] = 1
            if w:
                img = list(self._mul(tuple(img), w))
            images.append(tuple(img))
        return images

    def _is_trivial_aut(self, j: int, sign: int) -> bool:
        table = self.conj if sign > 0 else self.conjinv
        return not any(table.get((j, i)) for i in range(j + 1, self.n))

    def _apply(self, images: List[ExponentVector], v: ExponentVector, j: int) -> ExponentVector:
        res = self.identity
        for i in range(j + 1, self.n):
            if v[i]:
                res = self._mul(res, self._power(images[i - j - 1], v[i]))
        return res

    def _conj_power(self, v: ExponentVector, j: int, b: int) -> ExponentVector:
        """v^(x_j^b) = x_j^-b v x_j^b for v supported after j."""
        sign = 1 if b > 0 else -1
        if b == 0 or self._is_trivial_aut(j, sign):
            return v
        k = abs(b)
        if self._abelian_from() <= j + 1:
            return self._conj_power_linear(v, j, sign, k)
        key = ("aut2", j, sign)
        squares = self._cache.setdefault(key, [self._aut_images(j, sign)])
        bit = 0
        while k:
            if bit == len(squares):
                prev = squares[-1]
                squares.append([self._apply(prev, img, j) for img in prev])
            if k & 1:
                v = self._apply(squares[bit], v, j)
            k >>= 1
            bit += 1
        return v

    def _conj_power_linear(self, v: ExponentVector, j: int, sign: int, k: int) -> ExponentVector:
        # commuting tail: the automorphism lifts to a unipotent integer
        # matrix M, and M^k = sum_t C(k, t) (M - I)^t
        key = ("nilpart", j, sign)
        nil = self._cache.get(key)
        if nil is None:
            nil = []
            for i, img in zip(range(j + 1, self.n), self._aut_images(j, sign)):
                row = list(img)
                row[i] -= 1
                nil.append(row)
            self._cache[key] = nil
        total = list(v)
        w = list(v)
        t = 0
        while True:
            t += 1
            nxt = [0] * self.n
            for i in range(j + 1, self.n):
                if w[i]:
                    row = nil[i - j - 1]
                    for c in range(i + 1, self.n):
                        if row[c]:
                            nxt[c] += w[i] * row[c]
            if not any(nxt) or t > k:
                break
            coeff = comb(k, t)
            for c in range(self.n):
                total[c] += coeff * nxt[c]
            w = nxt
        return self._normalize_abelian(total, j + 1)


def _check_word(word: Word, pres: NilpotentPresentation) -> None:
    for g, _ in word:
        if not 1 <= g <= pres.n:
            raise ValueError(f"generator index {g} outside 1..{pres.n}")


def collect(word: Word, pres: NilpotentPresentation) -> ExponentVector:
    """Normal form of the product of a word of (generator, exponent) syllables."""
    _check_word(word, pres)
    res = pres.identity
    for g, e in word:
        if e:
            res = pres._mul_syllable(res, g - 1, int(e))
    return res


def multiply(a: Sequence[int], b: Sequence[int], pres: NilpotentPresentation) -> ExponentVector:
    return pres._mul(tuple(a), tuple(b))


def inverse(a: Sequence[int], pres: NilpotentPresentation) -> ExponentVector:
    return pres._inverse(tuple(a))


def power(a: Sequence[int], k: int, pres: NilpotentPresentation) -> ExponentVector:
    return pres._power(tuple(a), int(k))


def word_of(e: Sequence[int]) -> List[Tuple[int, int]]:
    """The normal-form word x1^e1 ... xn^en as syllables."""
    return [(i + 1, x) for i, x in enumerate(e) if x]


def _commutator(a, b, pres):
    return multiply(multiply(inverse(a, pres), inverse(b, pres), pres), multiply(a, b, pres), pres)


# -- text format ---------------------------------------------------------------

_TOKEN = re.compile(r"\S+")


def parse_presentation(text: str) -> NilpotentPresentation:
    """Parse the ``ngens`` / ``orders`` / ``pow`` / ``conj`` / ``conjinv`` format."""
    n = None
    orders = None
    power_rel: Dict[int, ExponentVector] = {}
    conj: Dict[Tuple[int, int], ExponentVector] = {}
    conjinv: Dict[Tuple[int, int], ExponentVector] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not tokens:
            continue
        head, col = tokens[0]

        def err(msg, c=col):
            return PresentationError(msg, lineno, c)

        def as_int(tok, c):
            try:
                return int(tok)
            except ValueError:
                raise err(f"expected an integer, got {tok!r}", c) from None

        if head == "ngens":
            if n is not None:
                raise err("duplicate ngens line")
            if len(tokens) != 2:
                raise err("usage: ngens <n>")
            n = as_int(*tokens[1])
            if n < 1:
                raise err("ngens must be positive", tokens[1][1])
            continue
        if n is None:
            raise err("ngens line must come first")
        if head == "orders":
            if orders is not None:
                raise err("duplicate orders line")
            if len(tokens) != n + 1:
                raise err(f"orders needs exactly {n} entries")
            orders = []
            for tok, c in tokens[1:]:
                if tok == "inf":
                    orders.append(None)
                else:
                    s = as_int(tok, c)
                    if s < 1:
                        raise err(f"relative order must be positive, got {s}", c)
                    orders.append(s)
            continue
        if head not in ("pow", "conj", "conjinv"):
            raise err(f"unknown directive {head!r}")
        if orders is None:
            raise err("orders line must precede relations")
        try:
            colon = [t for t, _ in tokens].index(":")
        except ValueError:
            raise err("missing ':'") from None
        idx = [(as_int(t, c), c) for t, c in tokens[1:colon]]
        want = 1 if head == "pow" else 2
        if len(idx) != want:
            raise err(f"{head} takes {want} generator index(es) before ':'")
        for i, c in idx:
            if not 1 <= i <= n:
                raise err(f"generator index {i} outside 1..{n}", c)
        if head == "pow":
            i = idx[0][0] - 1
            lhs_owner = i
            if orders[i] is None:
                raise err(f"pow relation for infinite generator x{i + 1}")
        else:
            j, i = idx[0][0] - 1, idx[1][0] - 1
            lhs_owner = i
            if j >= i:
                raise err(f"non-triangular relation: {head} {j + 1} {i + 1} needs j < i", idx[0][1])
        rhs = [0] * n
        for tok, c in tokens[colon + 1:]:
            gen, _, exp = tok.partition("^")
            k = as_int(gen, c) - 1
            e = as_int(exp, c) if exp else 1
            if not 0 <= k < n:
                raise err(f"generator index {k + 1} outside 1..{n}", c)
            if k <= lhs_owner:
                raise err(f"non-triangular: x{k + 1} may not appear on the right of a relation for x{lhs_owner + 1}", c)
            if rhs[k]:
                raise err(f"x{k + 1} repeated on the right-hand side", c)
            s = orders[k]
            if s is not None and not 0 <= e < s:
                raise err(f"exponent {e} of x{k + 1} out of range [0, {s})", c)
            rhs[k] = e
        key = i if head == "pow" else (j, i)
        table = {"pow": power_rel, "conj": conj, "conjinv": conjinv}[head]
        if key in table:
            raise err(f"duplicate {head} relation")
        if any(rhs):
            table[key] = tuple(rhs)
        elif head == "pow":
            table[key] = tuple(rhs)

    if n is None:
        raise PresentationError("missing ngens line")
    if orders is None:
        raise PresentationError("missing orders line")
    power_rel = {i: r for i, r in power_rel.items() if any(r)}
    return NilpotentPresentation(n, tuple(orders), power_rel, conj, conjinv)


def _fmt_rhs(rhs: ExponentVector) -> str:
    return " ".join(f"{k + 1}^{e}" for k, e in enumerate(rhs) if e)


def emit_presentation(pres: NilpotentPresentation) -> str:
    lines = [f"ngens {pres.n}",
             "orders " + " ".join("inf" if s is None else str(s) for s in pres.orders)]
    for i in sorted(pres.power):
        if any(pres.power[i]):
            lines.append(f"pow {i + 1} : {_fmt_rhs(pres.power[i])}")
    keys = sorted(set(pres.conj) | set(pres.conjinv), key=lambda ji: (ji[1], ji[0]))
    for j, i in keys:
        for name, table in (("conj", pres.conj), ("conjinv", pres.conjinv)):
            rhs = table.get((j, i))
            if rhs and any(rhs):
                lines.append(f"{name} {j + 1} {i + 1} : {_fmt_rhs(rhs)}")
    return "\n".join(lines) + "\n"


# -- consistency and class ----------------------------------------------------

@dataclass
class ConsistencyReport:
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok


def check_consistency(pres: NilpotentPresentation) -> ConsistencyReport:
    """Evaluate the standard overlap identities by collection.

    Each identity brackets the same product two ways; a presentation whose
    relations contradict one another collects the two sides differently.
    """
    report = ConsistencyReport()
    n = pres.n
    gen = [pres.generator(i + 1) for i in range(n)]
    mul = pres._mul

    def test(name, lhs, rhs):
        report.checked += 1
        if lhs != rhs:
            report.failures.append(f"{name}: {lhs} != {rhs}")

    def gpow(i, e):
        return collect([(i + 1, e)], pres)

    for k in range(n):
        for j in range(k):
            for i in range(j):
                test(f"x{k + 1}(x{j + 1}x{i + 1}) = (x{k + 1}x{j + 1})x{i + 1}",
                     mul(gen[k], mul(gen[j], gen[i])), mul(mul(gen[k], gen[j]), gen[i]))
    for j in range(n):
        sj = pres.orders[j]
        for i in range(j):
            if sj is not None:
                test(f"(x{j + 1}^{sj})x{i + 1} = x{j + 1}^{sj - 1}(x{j + 1}x{i + 1})",
                     mul(gpow(j, sj), gen[i]), mul(gpow(j, sj - 1), mul(gen[j], gen[i])))
            si = pres.orders[i]
            if si is not None:
                test(f"x{j + 1}(x{i + 1}^{si}) = (x{j + 1}x{i + 1})x{i + 1}^{si - 1}",
                     mul(gen[j], gpow(i, si)), mul(mul(gen[j], gen[i]), gpow(i, si - 1)))
    for i in range(n):
        si = pres.orders[i]
        if si is not None:
            test(f"x{i + 1}(x{i + 1}^{si}) = (x{i + 1}^{si})x{i + 1}",
                 mul(gen[i], gpow(i, si)), mul(gpow(i, si), gen[i]))
    for i in range(n):
        for j in range(i):
            a, b = j + 1, i + 1
            by_conjinv = word_of(collect([(a, 1), (b, 1), (a, -1)], pres))
            by_conj = word_of(collect([(a, -1), (b, 1), (a, 1)], pres))
            test(f"x{a}^-1 (x{a} x{b} x{a}^-1) x{a} = x{b}",
                 collect([(a, -1)] + by_conjinv + [(a, 1)], pres), gen[i])
            test(f"x{a} (x{a}^-1 x{b} x{a}) x{a}^-1 = x{b}",
                 collect([(a, 1)] + by_conj + [(a, -1)], pres), gen[i])
    return report


def verify_class_at_most(pres: NilpotentPresentation, c: int) -> bool:
    """True iff every left-normed commutator of weight c+1 in the generators vanishes."""
    if c < 1:
        raise ValueError("class bound must be positive")
    gens = [pres.generator(i + 1) for i in range(pres.n)]
    # walk the commutator tree level by level, pruning identities
    level = {g for g in gens}
    for _ in range(c):
        nxt = set()
        for a, g in product(level, gens):
            comm = _commutator(a, g, pres)
            if any(comm):
                nxt.add(comm)
        level = nxt
        if not level:
            return True
    return not level


def nilpotency_class(pres: NilpotentPresentation) -> int:
    """Smallest c with verify_class_at_most(pres, c); 1 for abelian groups."""
    c = 1
    while not verify_class_at_most(pres, c):
        c += 1
        if c > pres.n + 1:
            raise PresentationError("presentation does not look nilpotent")
    return c


def enumerate_normal_forms(pres: NilpotentPresentation) -> Iterable[ExponentVector]:
    if not pres.is_finite:
        raise ValueError("infinite presentation")
    return product(*(range(s) for s in pres.orders))


def heisenberg_presentation(modulus: Optional[int] = None) -> NilpotentPresentation:
    """Heisenberg group over Z (modulus None) or Z/m with x3 = [x1, x2].

    Matches x1 -> I+e12, x2 -> I+e23, x3 -> I+e13 in UT(3, R).
    """
    if modulus is None:
        return NilpotentPresentation(3, (None, None, None),
                                     conj={(0, 1): (0, 0, -1)}, conjinv={(0, 1): (0, 0, 1)})
    if modulus < 2:
        raise PresentationError("modulus must be at least 2")
    m = modulus
    return NilpotentPresentation(3, (m, m, m),
                                 conj={(0, 1): (0, 0, m - 1)}, conjinv={(0, 1): (0, 0, 1)})
