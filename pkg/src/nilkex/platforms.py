"""Named platforms and shipped fixtures.

Platform specs:

    heisenberg            integer Heisenberg group (heisenberg.npres)
    heisenberg-fp:P       Heisenberg group over F_P as a presentation
    utNz                  UT(N, Z), e.g. ut3z, ut4z
    utNzmod:M             UT(N, Z/M)
    utNfp:P               UT(N, F_P)
    safeprime:P           order-q subgroup <w^2> of (Z/P)^*, P = 2q+1
    cyclic:P^K            cyclic group of order P^K inside some (Z/N)^*
    <path>.npres          presentation file (relative paths also tried in the
                          fixture directory, overridable with NILKEX_FIXTURES)
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .groups import Group, ModMulGroup, PcGroup, engel_commutator, left_normed_commutator
from .matrix import RingDescriptor, UTGroup
from .numtheory import is_probable_prime, is_safe_prime, safe_prime_generator
from .presentation import (NilpotentPresentation, emit_presentation, heisenberg_presentation,
                           nilpotency_class, parse_presentation)
from .protocols import InvalidParameters, ProtocolParams


class PlatformError(ValueError):
    pass


def fixture_dir() -> Path:
    env = os.environ.get("NILKEX_FIXTURES")
    if env:
        return Path(env)
    return Path(str(resources.files("nilkex") / "fixtures"))


def resolve_fixture(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    candidate = fixture_dir() / path
    if candidate.exists():
        return candidate
    raise FileNotFoundError(path)


def shipped_presentations() -> Dict[str, NilpotentPresentation]:
    out = {}
    for f in sorted(fixture_dir().glob("*.npres")):
        out[f.name] = parse_presentation(f.read_text(encoding="utf-8"))
    return out


@dataclass(frozen=True)
class Platform:
    spec: str
    group: Group
    kind: str


_UT = re.compile(r"^ut(\d+)(z|zmod:(\d+)|fp:(\d+))$")


def cyclic_pgroup(p: int, k: int) -> ModMulGroup:
    """Cyclic group of order p^k in (Z/N)^* for the least prime N = 1 mod p^k."""
    if not is_probable_prime(p) or k < 1:
        raise PlatformError("cyclic p-group needs a prime p and k >= 1")
    order = p ** k
    N = order + 1
    while not is_probable_prime(N):
        N += order
    for w in range(2, N):
        gamma = pow(w, (N - 1) // order, N)
        if pow(gamma, order // p, N) != 1:
            return ModMulGroup(N, order, generator=gamma, name=f"cyclic:{p}^{k}")
    raise PlatformError("no generator found")  # pragma: no cover


def safe_prime_group(p: int) -> ModMulGroup:
    if not is_safe_prime(p):
        raise PlatformError(f"{p} is not a safe prime")
    w = safe_prime_generator(p)
    return ModMulGroup(p, (p - 1) // 2, generator=w * w % p, name=f"safeprime:{p}")


def load_platform(spec: str) -> Platform:
    if spec == "heisenberg":
        text = resolve_fixture("heisenberg.npres").read_text(encoding="utf-8")
        return Platform(spec, PcGroup(parse_presentation(text), name=spec), "pc")
    if spec.startswith("heisenberg-fp:"):
        p = int(spec.split(":", 1)[1])
        if not is_probable_prime(p):
            raise PlatformError(f"{p} is not prime")
        return Platform(spec, PcGroup(heisenberg_presentation(p), name=spec), "pc")
    m = _UT.match(spec)
    if m:
        n = int(m.group(1))
        if m.group(3):
            ring = RingDescriptor.mod(int(m.group(3)))
        elif m.group(4):
            ring = RingDescriptor.prime_field(int(m.group(4)))
        else:
            ring = RingDescriptor.integers()
        return Platform(spec, UTGroup(n, ring), "ut")
    if spec.startswith("safeprime:"):
        return Platform(spec, safe_prime_group(int(spec.split(":", 1)[1])), "cyclic")
    if spec.startswith("cyclic:"):
        p, _, k = spec.split(":", 1)[1].partition("^")
        return Platform(spec, cyclic_pgroup(int(p), int(k or 1)), "cyclic")
    if spec.endswith(".npres"):
        try:
            path = resolve_fixture(spec)
        except FileNotFoundError:
            raise PlatformError(f"presentation file {spec} not found") from None
        pres = parse_presentation(path.read_text(encoding="utf-8"))
        return Platform(spec, PcGroup(pres, name=spec), "pc")
    raise PlatformError(f"unknown platform {spec!r}")


def platform_record(spec: str, group: Group) -> Dict[str, Any]:
    """Self-describing platform entry for transcripts and reports."""
    rec: Dict[str, Any] = {"spec": spec}
    if isinstance(group, PcGroup):
        rec["presentation"] = emit_presentation(group.pres)
    elif isinstance(group, UTGroup):
        rec["ut"] = f"ut {group.n} {group.ring.header()}"
    elif isinstance(group, ModMulGroup):
        rec["modulus"] = group.modulus
        rec["order"] = group.order
    return rec


def group_from_record(rec: Dict[str, Any]) -> Tuple[str, Group]:
    spec = rec["spec"]
    if "presentation" in rec:
        return spec, PcGroup(parse_presentation(rec["presentation"]), name=spec)
    return spec, load_platform(spec).group


# -- default protocol parameters ----------------------------------------------------

def _pc_witnesses(group: PcGroup, protocol: str):
    pres = group.pres
    c = nilpotency_class(pres)
    gens = [group.generator(i + 1) for i in range(pres.n)]
    if protocol == "I":
        if c < 2:
            raise InvalidParameters("abelian presentation: Protocol I needs class > 1")
        from itertools import product
        for combo in product(gens, repeat=c):
            if any(left_normed_commutator(combo, group)):
                return c, combo
        raise InvalidParameters("no generator tuple with nonvanishing commutator")
    n = c - 1
    if n < 1:
        raise InvalidParameters("abelian presentation: Protocol II needs class >= 2")
    everything = group.identity()
    for g in gens:
        everything = group.multiply(everything, g)
    for x in gens:
        for g in gens + [everything]:
            if any(engel_commutator(x, g, n, group)):
                return n, (x, g)
    raise InvalidParameters(f"no generator pair with [x,_{n} g] != 1 found")


def default_params(platform: Platform, protocol: str, arity: Optional[int] = None) -> ProtocolParams:
    """Standard public parameters for a platform.

    UT(N, R): Protocol I uses the N-1 elementary superdiagonal matrices;
    Protocol II uses x = I+e12 and g = I + (all superdiagonal ones) with
    n = N-2.  Presentations search generator tuples for a witness.
    """
    grp = platform.group
    if protocol not in ("I", "II"):
        raise InvalidParameters(f"unknown protocol {protocol!r}")
    if isinstance(grp, UTGroup):
        N = grp.n
        if protocol == "I":
            bases = [grp.unit(i, i + 1) for i in range(1, N)]
            return ProtocolParams("I", grp, N - 1, bases=bases, platform=platform.spec)
        if N < 3:
            raise InvalidParameters("UT(2, R) is abelian; Protocol II needs class >= 2")
        return ProtocolParams("II", grp, N - 2, x=grp.unit(1, 2), g=grp.superdiagonal(),
                              platform=platform.spec)
    if isinstance(grp, PcGroup):
        n, wit = _pc_witnesses(grp, protocol)
        if protocol == "I":
            return ProtocolParams("I", grp, n, bases=wit, platform=platform.spec)
        return ProtocolParams("II", grp, n, x=wit[0], g=wit[1], platform=platform.spec)
    # cyclic platforms are abelian: build the parameters anyway so that
    # validation reports the vanishing witness
    gen = grp.generator
    if protocol == "I":
        return ProtocolParams("I", grp, arity or 2, bases=[gen] * (arity or 2), platform=platform.spec)
    return ProtocolParams("II", grp, arity or 1, x=gen, g=gen, platform=platform.spec)
