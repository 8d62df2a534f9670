"""Upper unitriangular matrix groups UT(n, R) for R = Z, Z/m, F_p.

A matrix is stored as its strictly upper part, row-major, as a flat tuple;
the diagonal is implicitly 1.  Entries over modular rings are kept in
[0, m) so equality is plain tuple equality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .groups import Group
from .numtheory import binomial, is_probable_prime
from .presentation import NilpotentPresentation, heisenberg_presentation

_KINDS = ("Z", "Zmod", "Fp")


@dataclass(frozen=True)
class RingDescriptor:
    kind: str
    modulus: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Z":
            if self.modulus is not None:
                raise ValueError("Z takes no modulus")
            return
        if self.modulus is None or self.modulus < 2:
            raise ValueError("modulus must be at least 2")
        if self.kind == "Fp" and not is_probable_prime(self.modulus):
            raise ValueError(f"{self.modulus} is not prime")

    @classmethod
    def integers(cls):
        return cls("Z")

    @classmethod
    def mod(cls, m: int):
        return cls("Zmod", m)

    @classmethod
    def prime_field(cls, p: int):
        return cls("Fp", p)

    @property
    def is_finite(self) -> bool:
        return self.modulus is not None

    def reduce(self, x: int) -> int:
        return x if self.modulus is None else x % self.modulus

    def header(self) -> str:
        return "Z" if self.kind == "Z" else f"{self.kind} {self.modulus}"

    def __str__(self):
        return self.header()


@dataclass(frozen=True)
class UTMatrix:
    n: int
    ring: RingDescriptor
    entries: Tuple[int, ...]

    def entry(self, i: int, j: int) -> int:
        """Entry (i, j), 1-based, including the implicit diagonal and zeros."""
        if i == j:
            return 1
        if i > j:
            return 0
        return self.entries[_offset(self.n, i - 1, j - 1)]

    def nil(self) -> List[List[int]]:
        """Dense strictly-upper part N = self - I."""
        n = self.n
        m = [[0] * n for _ in range(n)]
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                m[i][j] = self.entries[k]
                k += 1
        return m

    def band(self, k: int) -> List[int]:
        """Entries (i, i+k) for i = 1..n-k."""
        return [self.entry(i, i + k) for i in range(1, self.n - k + 1)]

    def is_identity(self) -> bool:
        return not any(self.entries)

    def __str__(self):
        return format_ut(self)


def _offset(n: int, i: int, j: int) -> int:
    # 0-based i < j
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _from_nil(n: int, ring: RingDescriptor, m: Sequence[Sequence[int]]) -> UTMatrix:
    return UTMatrix(n, ring, tuple(ring.reduce(m[i][j]) for i in range(n) for j in range(i + 1, n)))


def _nil_mul(a, b, n):
    c = [[0] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for k in range(i + 1, n):
            x = ai[k]
            if x:
                bk = b[k]
                ci = c[i]
                for j in range(k + 1, n):
                    if bk[j]:
                        ci[j] += x * bk[j]
    return c


class UTGroup(Group):
    """UT(n, R) as a group handle."""

    def __init__(self, n: int, ring: RingDescriptor):
        if n < 2:
            raise ValueError("UT(n, R) needs n > 1")
        self.n = n
        self.ring = ring
        self.name = f"UT({n},{ring.header().replace(' ', '')})"

    def __repr__(self):
        return f"UTGroup({self.n}, {self.ring})"

    def __eq__(self, other):
        return isinstance(other, UTGroup) and (self.n, self.ring) == (other.n, other.ring)

    def __hash__(self):
        return hash((self.n, self.ring))

    def identity(self) -> UTMatrix:
        return UTMatrix(self.n, self.ring, (0,) * (self.n * (self.n - 1) // 2))

    def elem(self, entries: Dict[Tuple[int, int], int]) -> UTMatrix:
        """I + sum c * e_ij for {(i, j): c} with 1-based i < j."""
        flat = [0] * (self.n * (self.n - 1) // 2)
        for (i, j), c in entries.items():
            if not 1 <= i < j <= self.n:
                raise ValueError(f"({i}, {j}) is not strictly upper triangular")
            flat[_offset(self.n, i - 1, j - 1)] = self.ring.reduce(c)
        return UTMatrix(self.n, self.ring, tuple(flat))

    def unit(self, i: int, j: int, c: int = 1) -> UTMatrix:
        return self.elem({(i, j): c})

    def superdiagonal(self, c: int = 1) -> UTMatrix:
        return self.elem({(i, i + 1): c for i in range(1, self.n)})

    def _check(self, a: UTMatrix) -> None:
        if a.n != self.n or a.ring != self.ring:
            raise ValueError(f"matrix in UT({a.n},{a.ring}) used in {self.name}")

    def multiply(self, a, b):
        return ut_multiply(a, b)

    def inverse(self, a):
        return ut_inverse(a)

    def power(self, a, k):
        return ut_power_binomial(a, k)

    def closed_form_power(self, a, k):
        return ut_power_binomial(a, k)

    def closed_form_power_cost(self) -> int:
        return max(self.n - 2, 1)

    def order_bound(self):
        if not self.ring.is_finite:
            return None
        return self.ring.modulus ** (self.n * (self.n - 1) // 2)

    def class_at_most(self, c):
        return self.n - 1 <= c

    def random_element(self, rng, bound=2**16):
        return _random(self, rng, bound)

    def encode(self, a):
        return format_ut(a)

    def decode(self, obj):
        a = parse_ut(obj)
        self._check(a)
        return a


@lru_cache(maxsize=None)
def _product_table(n: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """For each flat slot (i, j): the slot pairs ((i, k), (k, j)) with i < k < j."""
    return tuple(tuple((_offset(n, i, k), _offset(n, k, j)) for k in range(i + 1, j))
                 for i in range(n) for j in range(i + 1, n))


def ut_multiply(a: UTMatrix, b: UTMatrix) -> UTMatrix:
    if a.n != b.n or a.ring != b.ring:
        raise ValueError("dimension or ring mismatch")
    x, y = a.entries, b.entries
    out = [x[s] + y[s] + sum(x[p] * y[q] for p, q in pairs)
           for s, pairs in enumerate(_product_table(a.n))]
    m = a.ring.modulus
    if m is not None:
        out = [v % m for v in out]
    return UTMatrix(a.n, a.ring, tuple(out))


def ut_inverse(a: UTMatrix) -> UTMatrix:
    """(I + N)^-1 = I - N + N^2 - ... (N^n = 0)."""
    n = a.n
    nil = a.nil()
    total = [[0] * n for _ in range(n)]
    term = nil
    sign = -1
    while any(any(r) for r in term):
        for i in range(n):
            for j in range(i + 1, n):
                total[i][j] += sign * term[i][j]
        term = _nil_mul(term, nil, n)
        sign = -sign
    return _from_nil(n, a.ring, total)


def ut_power(a: UTMatrix, k: int) -> UTMatrix:
    """a^k by square-and-multiply; negative k inverts first."""
    k = int(k)
    if k < 0:
        a, k = ut_inverse(a), -k
    g = UTGroup(a.n, a.ring)
    result = g.identity()
    while k:
        if k & 1:
            result = ut_multiply(result, a)
        k >>= 1
        if k:
            a = ut_multiply(a, a)
    return result


def ut_power_binomial(a: UTMatrix, k: int) -> UTMatrix:
    """a^k = sum_t C(k, t) N^t, exact for every integer k since N^n = 0.

    Costs n-2 products of nilpotent parts regardless of |k|.
    """
    n = a.n
    nil = a.nil()
    total = [[0] * n for _ in range(n)]
    term = nil
    t = 1
    while t < n and any(any(r) for r in term):
        c = binomial(k, t)
        if a.ring.modulus is not None:
            c %= a.ring.modulus
        if c:
            for i in range(n):
                for j in range(i + 1, n):
                    if term[i][j]:
                        total[i][j] += c * term[i][j]
        t += 1
        if t < n:
            term = _nil_mul(term, nil, n)
    return _from_nil(n, a.ring, total)


def _random(group: UTGroup, rng: random.Random, bound: int) -> UTMatrix:
    if bound < 1:
        raise ValueError("bound must be at least 1")
    size = group.n * (group.n - 1) // 2
    if group.ring.is_finite:
        m = group.ring.modulus
        entries = tuple(rng.randrange(m) for _ in range(size))
    else:
        entries = tuple(rng.randint(-bound, bound) for _ in range(size))
    return UTMatrix(group.n, group.ring, entries)


def ut_random(group: UTGroup, seed, bound: int = 2**16) -> UTMatrix:
    """Deterministic random element; integer entries uniform in [-bound, bound]."""
    return _random(group, random.Random(seed), bound)


# -- text format ------------------------------------------------------------------

def format_ut(a: UTMatrix) -> str:
    lines = [f"ut {a.n} {a.ring.header()}"]
    for i in range(1, a.n):
        lines.append(" ".join(str(a.entry(i, j)) for j in range(i + 1, a.n + 1)))
    return "\n".join(lines) + "\n"


def parse_ring(tokens: Sequence[str]) -> RingDescriptor:
    if list(tokens) == ["Z"]:
        return RingDescriptor.integers()
    if len(tokens) == 2 and tokens[0] in ("Zmod", "Fp"):
        return RingDescriptor(tokens[0], int(tokens[1]))
    raise ValueError(f"bad ring {' '.join(tokens)!r}")


def parse_ut(text: str) -> UTMatrix:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0][0] != "ut" or len(lines[0]) < 3:
        raise ValueError("matrix text must start with 'ut <n> <ring>'")
    n = int(lines[0][1])
    ring = parse_ring(lines[0][2:])
    rows = lines[1:]
    if len(rows) != n - 1:
        raise ValueError(f"expected {n - 1} entry rows, got {len(rows)}")
    entries = []
    for i, row in enumerate(rows):
        if len(row) != n - 1 - i:
            raise ValueError(f"row {i + 1} needs {n - 1 - i} entries")
        for tok in row:
            x = int(tok)
            if ring.is_finite and not 0 <= x < ring.modulus:
                raise ValueError(f"entry {x} not reduced mod {ring.modulus}")
            entries.append(x)
    return UTMatrix(n, ring, tuple(entries))


# -- Heisenberg bridge ------------------------------------------------------------

def heisenberg_hom(vec: Sequence[int], pres: Optional[NilpotentPresentation] = None) -> UTMatrix:
    """Image of x1^e1 x2^e2 x3^e3 under x1 -> I+e12, x2 -> I+e23, x3 -> I+e13.

    ``pres`` defaults to the integer Heisenberg presentation; a Heisenberg
    presentation mod m maps into UT(3, Z/m) (F_p when m is prime).
    """
    if pres is None:
        pres = heisenberg_presentation()
    modulus = pres.orders[0]
    if pres != heisenberg_presentation(modulus):
        raise ValueError("not a Heisenberg presentation")
    if len(vec) != 3:
        raise ValueError("Heisenberg exponent vectors have length 3")
    if modulus is None:
        ring = RingDescriptor.integers()
    elif is_probable_prime(modulus):
        ring = RingDescriptor.prime_field(modulus)
    else:
        ring = RingDescriptor.mod(modulus)
    g = UTGroup(3, ring)
    x1, x2, x3 = g.unit(1, 2), g.unit(2, 3), g.unit(1, 3)
    e1, e2, e3 = vec
    return ut_multiply(ut_multiply(ut_power_binomial(x1, e1), ut_power_binomial(x2, e2)),
                       ut_power_binomial(x3, e3))
