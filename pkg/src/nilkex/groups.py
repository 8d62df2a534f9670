"""Group handles and commutator calculus.

Every platform (polycyclic presentation, unitriangular matrices, cyclic
subgroups of (Z/N)^*) is wrapped in a :class:`Group` so that the maps,
protocols and attacks are written once.  Elements are hashable immutable
values owned by the handle; handles never mix elements.
"""

from __future__ import annotations

import random
from typing import Any, Iterable, Optional, Sequence

from . import presentation as pc
from .presentation import NilpotentPresentation


class Group:
    """Minimal group interface consumed by the rest of the package."""

    name = "group"

    def identity(self):
        raise NotImplementedError

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def power(self, a, k: int):
        k = int(k)
        if k < 0:
            a, k = self.inverse(a), -k
        result = self.identity()
        while k:
            if k & 1:
                result = self.multiply(result, a)
            k >>= 1
            if k:
                a = self.multiply(a, a)
        return result

    def equal(self, a, b) -> bool:
        return a == b

    def is_identity(self, a) -> bool:
        return self.equal(a, self.identity())

    def order_bound(self) -> Optional[int]:
        """A multiple of every element order (the group order), or None if infinite."""
        return None

    @property
    def is_finite(self) -> bool:
        return self.order_bound() is not None

    def class_at_most(self, c: int) -> Optional[bool]:
        """Whether the nilpotency class is <= c; None when unknown."""
        return None

    def random_element(self, rng: random.Random, bound: int = 2**16):
        raise NotImplementedError

    def encode(self, a) -> Any:
        """JSON-ready encoding of an element."""
        raise NotImplementedError

    def decode(self, obj: Any):
        raise NotImplementedError


class PcGroup(Group):
    """Group given by a consistent nilpotent presentation; elements are exponent vectors."""

    def __init__(self, pres: NilpotentPresentation, name: str = "pc"):
        self.pres = pres
        self.name = name

    def __repr__(self):
        return f"PcGroup({self.name!r}, n={self.pres.n})"

    def identity(self):
        return self.pres.identity

    def generator(self, i: int):
        return self.pres.generator(i)

    def multiply(self, a, b):
        return pc.multiply(a, b, self.pres)

    def inverse(self, a):
        return pc.inverse(a, self.pres)

    def power(self, a, k):
        return pc.power(a, k, self.pres)

    def collect(self, word):
        return pc.collect(word, self.pres)

    def order_bound(self):
        return self.pres.order()

    def class_at_most(self, c):
        return pc.verify_class_at_most(self.pres, c)

    def random_element(self, rng, bound=2**16):
        return tuple(rng.randint(-bound, bound) if s is None else rng.randrange(s)
                     for s in self.pres.orders)

    def encode(self, a):
        return list(a)

    def decode(self, obj):
        e = tuple(int(x) for x in obj)
        if not self.pres.is_normal_form(e):
            raise ValueError(f"{obj!r} is not a normal form for this presentation")
        return e


class ModMulGroup(Group):
    """Cyclic subgroup of (Z/N)^* of known order, written multiplicatively."""

    def __init__(self, modulus: int, order: int, generator: Optional[int] = None, name: str = "zmodmul"):
        self.modulus = modulus
        self.order = order
        self.generator = generator
        self.name = name

    def __repr__(self):
        return f"ModMulGroup(N={self.modulus}, order={self.order})"

    def identity(self):
        return 1

    def multiply(self, a, b):
        return a * b % self.modulus

    def inverse(self, a):
        return pow(a, -1, self.modulus)

    def power(self, a, k):
        return pow(a, int(k), self.modulus)

    def order_bound(self):
        return self.order

    def class_at_most(self, c):
        return True

    def random_element(self, rng, bound=2**16):
        if self.generator is None:
            raise ValueError("no generator recorded")
        return pow(self.generator, rng.randrange(self.order), self.modulus)

    def encode(self, a):
        return a

    def decode(self, obj):
        a = int(obj)
        if not 0 < a < self.modulus:
            raise ValueError(f"{obj!r} is not a unit residue mod {self.modulus}")
        return a


# -- commutators --------------------------------------------------------------

def commutator(a, b, group: Group):
    """[a, b] = a^-1 b^-1 a b."""
    return group.multiply(group.multiply(group.inverse(a), group.inverse(b)),
                          group.multiply(a, b))


def left_normed_commutator(gs: Sequence, group: Group):
    """[g1, ..., gk] = [[g1, ..., g(k-1)], gk]."""
    gs = list(gs)
    if len(gs) < 2:
        raise ValueError("a commutator needs at least two entries")
    acc = gs[0]
    for g in gs[1:]:
        acc = commutator(acc, g, group)
    return acc


def engel_commutator(x, g, m: int, group: Group):
    """[x, g, ..., g] with m copies of g."""
    if m < 1:
        raise ValueError("Engel length must be at least 1")
    return left_normed_commutator([x] + [g] * m, group)


def element_order(group: Group, a, limit: int) -> Optional[int]:
    """Order of a by repeated multiplication, or None if it exceeds limit."""
    acc = a
    for k in range(1, limit + 1):
        if group.is_identity(acc):
            return k
        acc = group.multiply(acc, a)
    return None


# -- operation counting ----------------------------------------------------------

class BudgetExceeded(RuntimeError):
    pass


class OpCounter:
    """Counts group multiplications; raises BudgetExceeded instead of going past the budget."""

    def __init__(self, budget: Optional[int] = None):
        self.ops = 0
        self.budget = budget

    def tick(self, n: int = 1) -> None:
        # refuse before charging, so ops never exceeds the budget
        if self.budget is not None and self.ops + n > self.budget:
            raise BudgetExceeded(f"operation budget {self.budget} exhausted")
        self.ops += n


class CountingGroup(Group):
    """Wraps a group so every multiplication is charged to an OpCounter.

    Powers go through this wrapper's own square-and-multiply unless the
    underlying group offers ``closed_form_power``, in which case the charge
    is ``closed_form_power_cost()`` multiplications.
    """

    def __init__(self, group: Group, counter: Optional[OpCounter] = None):
        self.inner = group
        self.counter = counter or OpCounter()
        self.name = group.name

    def __getattr__(self, item):
        return getattr(self.inner, item)

    def identity(self):
        return self.inner.identity()

    def multiply(self, a, b):
        self.counter.tick()
        return self.inner.multiply(a, b)

    def inverse(self, a):
        return self.inner.inverse(a)

    def power(self, a, k):
        closed = getattr(self.inner, "closed_form_power", None)
        if closed is not None:
            self.counter.tick(self.inner.closed_form_power_cost())
            return closed(a, k)
        return Group.power(self, a, k)

    def equal(self, a, b):
        return self.inner.equal(a, b)

    def order_bound(self):
        return self.inner.order_bound()

    def class_at_most(self, c):
        return self.inner.class_at_most(c)

    def random_element(self, rng, bound=2**16):
        return self.inner.random_element(rng, bound)

    def encode(self, a):
        return self.inner.encode(a)

    def decode(self, obj):
        return self.inner.decode(obj)


def product_of(group: Group, elements: Iterable) -> Any:
    acc = group.identity()
    for e in elements:
        acc = group.multiply(acc, e)
    return acc
