"""Power-search solvers and passive attacks on the key exchanges.

The power search problem (PSP) asks for a with g^a = h; it is the discrete
logarithm problem in <g>.  Solvers here:

* ``psp_bruteforce`` scans a = 0, 1, -1, 2, -2, ...
* ``psp_bsgs`` is baby-step/giant-step, ~2 sqrt(order) multiplications.
* ``psp_ut_reduce`` solves PSP in UT(n, R) through the additive group of R:
  on the lowest nonzero band of g - I, the entries of g^a are exactly a times
  those of g, so a is read off by division (Z) or linear congruences (Z/m).
* ``psp_pgroup_digits`` peels base-p digits of a off a filtration
  G = G0 > G1 > ... > Gn = 1 with elementary abelian factors, solving one
  small DLP per level.  The work hides in those per-level oracles: for the
  order-q subgroup of (Z/p)^* with p = 2q+1 the filtration is just G > 1 and
  the single level is the whole DLP.

Reducing PSP in an arbitrary finite nilpotent group to its Sylow p-parts
would also need the factorization of |G|, which may be unknown; nothing here
attempts that.

Cost is counted in group multiplications through
:class:`~nilkex.groups.CountingGroup`.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from math import isqrt
from typing import Any, Callable, Dict, Optional, Sequence

from .groups import (BudgetExceeded, CountingGroup, Group, ModMulGroup, OpCounter, PcGroup,
                     left_normed_commutator)
from .matrix import UTGroup, UTMatrix, heisenberg_hom
from .numtheory import crt_pair, is_probable_prime, safe_prime_generator, solve_linear_congruence
from .platforms import safe_prime_group
from .presentation import heisenberg_presentation
from .protocols import Transcript


class NoSolution(ValueError):
    """h is not a power of g."""


class NotAPower(NoSolution):
    pass


class UnrecoverableDigit(NoSolution):
    def __init__(self, level: int, reason: str):
        self.level = level
        super().__init__(f"level {level}: {reason}")


class InconsistentFiltration(ValueError):
    pass


class UnsupportedSolver(ValueError):
    pass


class AttackFailed(RuntimeError):
    def __init__(self, reason: str, ops: int = 0, elapsed: float = 0.0):
        self.reason = reason
        self.ops = ops
        self.elapsed = elapsed
        super().__init__(reason)


@dataclass(frozen=True)
class PSPInstance:
    group: Group
    g: Any
    h: Any


def counted(inst: PSPInstance, budget: Optional[int] = None):
    """Copy of ``inst`` whose group charges an OpCounter; returns (inst, counter)."""
    counter = OpCounter(budget)
    return PSPInstance(CountingGroup(inst.group, counter), inst.g, inst.h), counter


# -- generic solvers ------------------------------------------------------------------

def psp_bruteforce(inst: PSPInstance, bound: int) -> Optional[int]:
    grp, g, h = inst.group, inst.g, inst.h
    if grp.equal(grp.identity(), h):
        return 0
    pos = neg = grp.identity()
    g_inv = grp.inverse(g)
    for k in range(1, bound + 1):
        pos = grp.multiply(pos, g)
        if grp.equal(pos, h):
            return k
        neg = grp.multiply(neg, g_inv)
        if grp.equal(neg, h):
            return -k
    return None


def psp_bsgs(inst: PSPInstance, order: int) -> int:
    """Least a in [0, order) with g^a = h, for g of order dividing ``order``."""
    if order < 1:
        raise ValueError("order must be positive")
    grp, g, h = inst.group, inst.g, inst.h
    m = isqrt(order - 1) + 1 if order > 1 else 1
    table: Dict[Any, int] = {}
    cur = grp.identity()
    for j in range(m):
        table.setdefault(cur, j)
        cur = grp.multiply(cur, g)
    giant = grp.inverse(cur)
    gamma = h
    for i in range(m):
        j = table.get(gamma)
        if j is not None:
            return (i * m + j) % order
        if i < m - 1:
            gamma = grp.multiply(gamma, giant)
    raise NoSolution("h is not in <g>")


# -- unitriangular reduction ----------------------------------------------------------

def _min_band(g: UTMatrix) -> int:
    for k in range(1, g.n):
        if any(g.band(k)):
            return k
    return 0


def _ut_reduce(grp: Group, g: UTMatrix, h: UTMatrix) -> int:
    k = _min_band(g)
    for lower in range(1, k):
        if any(h.band(lower)):
            raise NotAPower(f"h has entries on band {lower}, below the first band of g")
    pairs = list(zip(g.band(k), h.band(k)))
    ring = g.ring
    if not ring.is_finite:
        a = None
        for b, c in pairs:
            if b == 0:
                if c != 0:
                    raise NotAPower("band entry of h is nonzero where g has zero")
                continue
            if c % b:
                raise NotAPower(f"{c} is not a multiple of {b}")
            if a is None:
                a = c // b
            elif a != c // b:
                raise NotAPower("band entries disagree on the exponent")
        return a
    m = ring.modulus
    r, M = 0, 1
    for b, c in pairs:
        sol = solve_linear_congruence(b, c, m)
        if sol is None:
            raise NotAPower(f"{b}*a = {c} (mod {m}) has no solution")
        both = crt_pair(r, M, *sol)
        if both is None:
            raise NotAPower("band congruences are incompatible")
        r, M = both
    # exponents consistent with band k form r + M*Z; g^M lives on higher
    # bands, and h g^-r must be a power of it
    gM = grp.power(g, M)
    if gM.is_identity():
        return r
    rest = grp.multiply(grp.power(g, -r), h)
    return r + M * _ut_reduce(grp, gM, rest)


def psp_ut_reduce(g: UTMatrix, h: UTMatrix, group: Optional[Group] = None) -> int:
    """Exponent a with g^a = h in UT(n, R), by reduction to the additive group of R.

    Over Z the answer is the exact quotient; over Z/m it is the least
    non-negative exponent, i.e. canonical modulo ord(g).
    """
    if g.n != h.n or g.ring != h.ring:
        raise ValueError("g and h live in different groups")
    if g.is_identity():
        raise ValueError("g must not be the identity")
    grp = group if group is not None else UTGroup(g.n, g.ring)
    a = _ut_reduce(grp, g, h)
    if not grp.equal(grp.power(g, a), h):
        raise NotAPower("candidate exponent fails full matrix check")
    return a


# -- digit recovery over a p-filtration -----------------------------------------------

@dataclass(frozen=True)
class FiltrationLevel:
    """One factor G_i / G_(i+1) of exponent p.

    ``project`` maps G_i onto a representation of the factor, ``solve(u, v)``
    returns c in [0, p) with c*u = v there (or None).
    """

    member: Callable[[Any], bool]
    project: Callable[[Any], Any]
    is_trivial: Callable[[Any], bool]
    solve: Callable[[Any, Any], Optional[int]]


@dataclass(frozen=True)
class PGroupFiltration:
    p: int
    levels: Sequence[FiltrationLevel]
    name: str = ""

    @property
    def length(self) -> int:
        return len(self.levels)


def cyclic_filtration(group: Group, p: int, k: int) -> PGroupFiltration:
    """G_i = elements of order dividing p^(k-i) in a cyclic group of order p^k.

    The factor G_i/G_(i+1) is identified with the order-p subgroup through
    y -> y^(p^(k-i-1)); its DLP is solved by baby-step/giant-step.
    """
    one = group.identity()

    def level(i):
        def member(y):
            return group.equal(group.power(y, p ** (k - i)), one)

        def project(y):
            return group.power(y, p ** (k - i - 1))

        def solve(u, v):
            try:
                return psp_bsgs(PSPInstance(group, u, v), p)
            except NoSolution:
                return None

        return FiltrationLevel(member, project, lambda u: group.equal(u, one), solve)

    return PGroupFiltration(p, [level(i) for i in range(k)], name=f"cyclic-{p}^{k}")


def _solve_vector(p: int):
    def solve(u, v):
        for uk, vk in zip(u, v):
            if uk % p:
                c = vk * pow(uk, -1, p) % p
                if all((c * x - y) % p == 0 for x, y in zip(u, v)):
                    return c
                return None
        return None
    return solve


def heisenberg_filtration(group: Group, p: int) -> PGroupFiltration:
    """G > Z(G) > 1 for the Heisenberg group over F_p.

    Works for the presentation ``heisenberg-fp:p`` and for UT(3, F_p).
    """
    inner = getattr(group, "inner", group)
    if isinstance(inner, UTGroup):
        if inner.n != 3 or inner.ring.modulus != p:
            raise ValueError("needs UT(3, F_p)")

        def coords(y):
            return y.entry(1, 2), y.entry(2, 3), y.entry(1, 3)
    elif isinstance(inner, PcGroup):
        if inner.pres != heisenberg_presentation(p):
            raise ValueError("needs the Heisenberg presentation over F_p")

        def coords(y):
            return tuple(y)
    else:
        raise ValueError(f"no Heisenberg filtration for {group!r}")

    solve = _solve_vector(p)

    def trivial(u):
        return not any(x % p for x in u)

    top = FiltrationLevel(lambda y: True, lambda y: coords(y)[:2], trivial, solve)
    centre = FiltrationLevel(lambda y: trivial(coords(y)[:2]), lambda y: coords(y)[2:],
                             trivial, solve)
    return PGroupFiltration(p, [top, centre], name="heisenberg-fp")


def psp_pgroup_digits(inst: PSPInstance, filt: PGroupFiltration) -> int:
    """Recover a = a0 + a1 p + ... digit by digit down the filtration.

    At each level the current base b = g^(p^d) and target t = b^m are
    projected into G_i/G_(i+1); when b is trivial there the level carries no
    digit and t must vanish too, so both drop to the next level unchanged.
    Otherwise the level oracle yields m mod p, t <- t b^-digit and b <- b^p.
    """
    grp, g, h = inst.group, inst.g, inst.h
    p = filt.p
    b, t = g, h
    a, scale = 0, 1
    for i, level in enumerate(filt.levels):
        if not level.member(t):
            raise UnrecoverableDigit(i, "target left the filtration; h is not in <g>")
        u, v = level.project(b), level.project(t)
        if level.is_trivial(u):
            if not level.is_trivial(v):
                raise UnrecoverableDigit(i, "base vanishes in the factor but target does not")
            continue
        c = level.solve(u, v)
        if c is None:
            raise UnrecoverableDigit(i, "factor DLP has no solution")
        a += c * scale
        scale *= p
        t = grp.multiply(t, grp.power(b, -c))
        b = grp.power(b, p)
    if not grp.is_identity(t) or not grp.is_identity(b):
        raise InconsistentFiltration("filtration does not end in the trivial group")
    if not grp.equal(grp.power(g, a), h):
        raise InconsistentFiltration("recovered exponent fails the final check")
    return a


def builtin_filtration(name: str, group: Group) -> PGroupFiltration:
    """``heisenberg-fp`` or ``cyclic-p^k`` for a compatible group."""
    inner = getattr(group, "inner", group)
    if name == "heisenberg-fp":
        if isinstance(inner, UTGroup):
            return heisenberg_filtration(group, inner.ring.modulus)
        if isinstance(inner, PcGroup):
            return heisenberg_filtration(group, inner.pres.orders[0])
    elif name.startswith("cyclic-"):
        p, _, k = name[len("cyclic-"):].partition("^")
        return cyclic_filtration(group, int(p), int(k or 1))
    raise ValueError(f"no filtration {name!r} for {group!r}")


def _iroot(n: int, k: int) -> int:
    lo, hi = 1, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def prime_power(n: int):
    """(p, k) with n = p^k for a prime p, or None."""
    if n < 2:
        return None
    for k in range(n.bit_length(), 0, -1):
        r = _iroot(n, k)
        if r >= 2 and r ** k == n and is_probable_prime(r):
            return r, k
    return None


def _auto_filtration(group: Group) -> PGroupFiltration:
    inner = getattr(group, "inner", group)
    if isinstance(inner, ModMulGroup):
        pk = prime_power(inner.order)
        if pk is None:
            raise UnsupportedSolver("group order is not a prime power")
        return cyclic_filtration(group, *pk)
    try:
        return builtin_filtration("heisenberg-fp", group)
    except (ValueError, TypeError):
        raise UnsupportedSolver(f"no built-in filtration for {inner!r}") from None


# -- reports and attacks ----------------------------------------------------------------

@dataclass
class AttackReport:
    solver: str
    exponent: Optional[int]
    key: Any
    ops: int
    elapsed: float
    success: bool = True
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, group: Optional[Group] = None) -> Dict[str, Any]:
        key = self.key
        if group is not None and key is not None:
            key = group.encode(key)
        return {"solver": self.solver, "success": self.success, "exponent": self.exponent,
                "key": key, "ops": self.ops, "elapsed": round(self.elapsed, 6),
                "details": self.details}


def safe_prime_demo(p: int, h: Optional[int] = None, seed: int = 0,
                    budget: Optional[int] = None) -> AttackReport:
    """PSP in <w^2> of order q inside (Z/p)^*, p = 2q+1, by baby-step/giant-step.

    For this group the exponent-p filtration is G0 > G1 = {1}: there is one
    level and its digit is the whole discrete logarithm.
    """
    group = safe_prime_group(p)
    q = group.order
    base = group.generator
    exponent = None
    if h is None:
        exponent = random.Random(seed).randrange(q)
        h = pow(base, exponent, p)
    inst, counter = counted(PSPInstance(group, base, h), budget)
    start = time.perf_counter()
    a = psp_bsgs(inst, q)
    elapsed = time.perf_counter() - start
    return AttackReport("bsgs", a, None, counter.ops, elapsed, details={
        "p": p, "q": q, "generator": safe_prime_generator(p), "base": base,
        "filtration_levels": 1, "ops_bound": 2 * (isqrt(q - 1) + 1) + 4,
        "planted_exponent": exponent})


SOLVERS = ("bruteforce", "bsgs", "ut-reduce", "pgroup-digits")


def _solve(solver: str, grp: CountingGroup, base, target, budget: Optional[int]) -> Optional[int]:
    inner = grp.inner
    inst = PSPInstance(grp, base, target)
    if solver == "bruteforce":
        bound = budget // 2 + 1 if budget else 2**20
        return psp_bruteforce(inst, bound)
    if solver == "bsgs":
        order = inner.order_bound()
        if order is None:
            raise UnsupportedSolver("bsgs needs a finite group")
        return psp_bsgs(inst, order)
    if solver == "ut-reduce":
        if isinstance(inner, UTGroup):
            return psp_ut_reduce(base, target, grp)
        if isinstance(inner, PcGroup):
            try:
                mb = heisenberg_hom(base, inner.pres)
                mt = heisenberg_hom(target, inner.pres)
            except ValueError:
                raise UnsupportedSolver("ut-reduce needs a unitriangular or Heisenberg platform") from None
            ut = CountingGroup(UTGroup(3, mb.ring), grp.counter)
            return psp_ut_reduce(mb, mt, ut)
        raise UnsupportedSolver("ut-reduce needs a unitriangular or Heisenberg platform")
    if solver == "pgroup-digits":
        return psp_pgroup_digits(inst, _auto_filtration(grp))
    raise UnsupportedSolver(f"unknown solver {solver!r}")


def break_exchange(transcript: Transcript, solver: str = "ut-reduce",
                   budget: Optional[int] = None) -> AttackReport:
    """Eavesdropper: recover a1 from party 1's message, then compute the key as party 1 would."""
    params = transcript.params
    counter = OpCounter(budget)
    grp = CountingGroup(params.group, counter)
    n = params.arity
    if params.protocol == "I":
        base, target = params.bases[0], transcript.get(1, "g1")
    else:
        base, target = params.g, transcript.get(1, "g")
    start = time.perf_counter()
    try:
        a1 = _solve(solver, grp, base, target, budget)
        if a1 is None or not grp.equal(grp.power(base, a1), target):
            raise AttackFailed("solver found no exponent", counter.ops,
                               time.perf_counter() - start)
        if params.protocol == "I":
            args = [transcript.get(i + 1, f"g{i}") for i in range(1, n + 1)]
            key = grp.power(left_normed_commutator(args, grp), a1)
        else:
            args = [grp.power(params.x, a1)] + [transcript.get(i, "g") for i in range(2, n + 2)]
            key = left_normed_commutator(args, grp)
    except BudgetExceeded as exc:
        raise AttackFailed(str(exc), counter.ops, time.perf_counter() - start) from None
    except NoSolution as exc:
        raise AttackFailed(str(exc), counter.ops, time.perf_counter() - start) from None
    return AttackReport(solver, a1, key, counter.ops, time.perf_counter() - start,
                        details={"protocol": params.protocol, "platform": params.platform,
                                 "arity": n})
