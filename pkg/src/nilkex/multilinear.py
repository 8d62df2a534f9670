"""Commutator multilinear maps e(g1..gn) = [g1..gn] and e'(g1..gn) = [x, g1..gn].

On a group of class n the left-normed commutator of weight n is a power map
in every slot, so e(g1^a1, ..., gn^an) = e(g1, ..., gn)^(a1...an).  The
anchored variant lives on a group of class n+1 that is not n-Engel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Tuple

from .groups import Group, left_normed_commutator

PLAIN = "plain-e"
ENGEL = "engel-e-prime"


class DegenerateMapError(ValueError):
    pass


@dataclass(frozen=True)
class MapDescriptor:
    """A commutator map with its non-degeneracy witness.

    For ``plain-e`` the witness is a tuple of n elements with [g1..gn] != 1.
    For ``engel-e-prime`` it is a single element g with [x, g, ..., g] != 1.
    Construction validates both unless ``check=False``.
    """

    kind: str
    group: Group
    arity: int
    witness: Tuple[Any, ...]
    anchor: Any = None
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in (PLAIN, ENGEL):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.arity < 1 or (self.kind == PLAIN and self.arity < 2):
            raise ValueError("arity too small for this kind of map")
        if self.kind == ENGEL and self.anchor is None:
            raise ValueError("engel-e-prime needs an anchor element")
        object.__setattr__(self, "witness", tuple(self.witness))
        if not self.check:
            return
        bound = self.arity if self.kind == PLAIN else self.arity + 1
        if self.group.class_at_most(bound) is False:
            raise DegenerateMapError(
                f"group class exceeds {bound}; the commutator map is not multilinear")
        if not check_nondegenerate(self):
            raise DegenerateMapError("witness evaluates to the identity")

    def witness_args(self) -> Tuple[Any, ...]:
        if self.kind == PLAIN:
            if len(self.witness) != self.arity:
                raise ValueError("plain-e witness must have one element per slot")
            return self.witness
        if len(self.witness) != 1:
            raise ValueError("engel-e-prime witness is a single element g")
        return self.witness * self.arity


def plain_map(group: Group, witness: Sequence, check: bool = True) -> MapDescriptor:
    return MapDescriptor(PLAIN, group, len(witness), tuple(witness), check=check)


def engel_map(group: Group, anchor, g, arity: int, check: bool = True) -> MapDescriptor:
    return MapDescriptor(ENGEL, group, arity, (g,), anchor=anchor, check=check)


def eval_map(desc: MapDescriptor, gs: Sequence, anchor=None):
    """Evaluate the map; ``anchor`` overrides the stored anchor for e'."""
    gs = list(gs)
    if len(gs) != desc.arity:
        raise ValueError(f"map has arity {desc.arity}, got {len(gs)} arguments")
    if desc.kind == ENGEL:
        gs = [desc.anchor if anchor is None else anchor] + gs
    return left_normed_commutator(gs, desc.group)


def check_multilinearity(desc: MapDescriptor, gs: Sequence, exponents: Sequence[int],
                         anchor_exponent: Optional[int] = None) -> bool:
    """Compare e(g1^a1, ..., gn^an) with e(g1, ..., gn)^(a1...an).

    For e' an ``anchor_exponent`` a0 replaces the anchor x by x^a0 and joins
    the product, matching how Protocol II users raise x.
    """
    exponents = list(exponents)
    if len(exponents) != desc.arity:
        raise ValueError("one exponent per slot")
    if any(a == 0 for a in exponents) or anchor_exponent == 0:
        raise ValueError("exponents must be nonzero")
    grp = desc.group
    total = 1
    for a in exponents:
        total *= a
    anchor = None
    if anchor_exponent is not None:
        if desc.kind != ENGEL:
            raise ValueError("anchor exponent only applies to engel-e-prime")
        anchor = grp.power(desc.anchor, anchor_exponent)
        total *= anchor_exponent
    lhs = eval_map(desc, [grp.power(g, a) for g, a in zip(gs, exponents)], anchor=anchor)
    rhs = grp.power(eval_map(desc, gs), total)
    return grp.equal(lhs, rhs)


def check_slot_linearity(desc: MapDescriptor, gs: Sequence, slot: int, a: int) -> bool:
    """[g1, ..., gi^a, ..., gn] == [g1, ..., gn]^a for one slot (0-based)."""
    if a == 0:
        raise ValueError("exponent must be nonzero")
    grp = desc.group
    args = list(gs)
    args[slot] = grp.power(args[slot], a)
    return grp.equal(eval_map(desc, args), grp.power(eval_map(desc, gs), a))


def check_nondegenerate(desc: MapDescriptor) -> bool:
    return not desc.group.is_identity(eval_map(desc, desc.witness_args()))
