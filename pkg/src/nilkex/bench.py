"""Cost ladders: BSGS on safe-prime subgroups versus the unitriangular reduction."""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass
from math import isqrt, sqrt
from typing import List, Optional, Sequence

from .cryptanalysis import PSPInstance, counted, psp_bsgs, psp_ut_reduce
from .matrix import RingDescriptor, UTGroup, ut_power_binomial, ut_random
from .numtheory import next_safe_prime
from .platforms import safe_prime_group

SUITES = ("bsgs", "ut-reduce", "ut-dims")


@dataclass
class BenchRow:
    suite: str
    label: str
    size: int
    ops: int
    elapsed: float
    reference: float

    def as_dict(self, timing: bool = True):
        d = asdict(self)
        if not timing:
            d.pop("elapsed")
        return d


def bsgs_ladder(bits: Sequence[int] = range(10, 21, 2)) -> List[BenchRow]:
    """Worst-case BSGS instance (exponent q-1) on <w^2> for safe primes with q >= 2^b."""
    rows = []
    for b in bits:
        p = next_safe_prime(2**b)
        grp = safe_prime_group(p)
        q = grp.order
        h = pow(grp.generator, q - 1, p)
        inst, counter = counted(PSPInstance(grp, grp.generator, h))
        start = time.perf_counter()
        a = psp_bsgs(inst, q)
        elapsed = time.perf_counter() - start
        assert a == q - 1
        rows.append(BenchRow("bsgs", f"q~2^{b}", q, counter.ops, elapsed, sqrt(q)))
    return rows


def _nontrivial(group, seed, bound):
    g = ut_random(group, seed, bound)
    while g.is_identity():
        seed += 1
        g = ut_random(group, seed, bound)
    return g


def ut_reduce_ladder(n: int = 4, exponent_bits: Sequence[int] = (16, 32, 64, 128, 256),
                     seed: int = 0, entry_bound: int = 2**8) -> List[BenchRow]:
    """psp_ut_reduce on UT(n, Z) as the private exponent grows."""
    rows = []
    group = UTGroup(n, RingDescriptor.integers())
    rng = random.Random(seed)
    for b in exponent_bits:
        g = _nontrivial(group, rng.randrange(2**32), entry_bound)
        a = rng.randint(-2**b, 2**b)
        h = ut_power_binomial(g, a)
        inst, counter = counted(PSPInstance(group, g, h))
        start = time.perf_counter()
        got = psp_ut_reduce(g, h, inst.group)
        elapsed = time.perf_counter() - start
        assert got == a
        rows.append(BenchRow("ut-reduce", f"n={n} |a|<=2^{b}", b, counter.ops, elapsed, float(b)))
    return rows


def ut_dimension_ladder(dims: Sequence[int] = (3, 4, 5, 6, 8), exponent_bits: int = 64,
                        seed: int = 0) -> List[BenchRow]:
    rows = []
    rng = random.Random(seed)
    for n in dims:
        group = UTGroup(n, RingDescriptor.integers())
        g = _nontrivial(group, rng.randrange(2**32), 2**8)
        a = rng.randint(-2**exponent_bits, 2**exponent_bits)
        h = ut_power_binomial(g, a)
        inst, counter = counted(PSPInstance(group, g, h))
        start = time.perf_counter()
        assert psp_ut_reduce(g, h, inst.group) == a
        elapsed = time.perf_counter() - start
        rows.append(BenchRow("ut-dims", f"n={n} |a|<=2^{exponent_bits}", n, counter.ops,
                             elapsed, float(n)))
    return rows


def run_suites(suites: Sequence[str], cap: int = 20, seed: int = 0) -> List[BenchRow]:
    rows: List[BenchRow] = []
    for s in suites:
        if s == "bsgs":
            rows += bsgs_ladder(range(10, cap + 1, 2))
        elif s == "ut-reduce":
            rows += ut_reduce_ladder(seed=seed)
        elif s == "ut-dims":
            rows += ut_dimension_ladder(seed=seed)
        else:
            raise ValueError(f"unknown bench suite {s!r}; choose from {', '.join(SUITES)}")
    return rows


def format_table(rows: Sequence[BenchRow], timing: bool = True) -> str:
    if not rows:
        return ""
    header = ["suite", "instance", "ops", "ops/ref", "ratio", "elapsed_s"]
    if not timing:
        header.pop()
    body = []
    prev: Optional[BenchRow] = None
    for r in rows:
        if prev is not None and prev.suite == r.suite and prev.ops:
            ratio = f"{r.ops / prev.ops:.3f}"
        else:
            ratio = "-"
        line = [r.suite, r.label, str(r.ops), f"{r.ops / r.reference:.3f}", ratio]
        if timing:
            line.append(f"{r.elapsed:.4f}")
        body.append(line)
        prev = r
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
           "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.ljust(w) for c, w in zip(line, widths)) for line in body]
    return "\n".join(out) + "\n"


def expected_bsgs_ops(q: int) -> int:
    """Worst-case multiplications of psp_bsgs: m baby steps and m-1 giant steps."""
    m = isqrt(q - 1) + 1
    return 2 * m - 1
