import random
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st

from nilkex.cryptanalysis import (AttackFailed, InconsistentFiltration, NoSolution, NotAPower,
                                  PSPInstance, UnrecoverableDigit, UnsupportedSolver, break_exchange,
                                  builtin_filtration, counted, cyclic_filtration, prime_power,
                                  psp_bruteforce, psp_bsgs, psp_pgroup_digits, psp_ut_reduce,
                                  safe_prime_demo)
from nilkex.groups import ModMulGroup, PcGroup
from nilkex.matrix import RingDescriptor, UTGroup, ut_power, ut_random
from nilkex.numtheory import (binomial, crt_pair, is_probable_prime, is_safe_prime, next_safe_prime,
                              solve_linear_congruence)
from nilkex.platforms import cyclic_pgroup, default_params, load_platform, safe_prime_group
from nilkex.presentation import heisenberg_presentation
from nilkex.protocols import ProtocolParams, Transcript, run_exchange

Z = RingDescriptor.integers()
UT3 = UTGroup(3, Z)
UT4 = UTGroup(4, Z)
HG = PcGroup(heisenberg_presentation())
Z23 = ModMulGroup(23, 11, generator=2)


# -- number theory helpers ---------------------------------------------------------

def test_primality_against_sieve():
    sieve = [True] * 5000
    sieve[0] = sieve[1] = False
    for i in range(2, 5000):
        if sieve[i]:
            for j in range(i * i, 5000, i):
                sieve[j] = False
    assert [n for n in range(5000) if is_probable_prime(n)] == [n for n in range(5000) if sieve[n]]
    assert is_probable_prime(2**127 - 1)
    assert not is_probable_prime(2**127 + 1)
    assert not is_probable_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_safe_primes():
    assert [p for p in range(3, 200) if is_safe_prime(p)] == [5, 7, 11, 23, 47, 59, 83, 107, 167, 179]
    p = next_safe_prime(2**64)
    assert is_safe_prime(p) and (p - 1) // 2 >= 2**64


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.integers(1, 10**4))
def test_linear_congruence(b, c, m):
    sol = solve_linear_congruence(b, c, m)
    brute = [a for a in range(m) if (b * a - c) % m == 0]
    if sol is None:
        assert brute == []
    else:
        r, mod = sol
        assert brute == list(range(r, m, mod))


@given(st.integers(0, 200), st.integers(1, 60), st.integers(0, 200), st.integers(1, 60))
def test_crt_pair(r1, m1, r2, m2):
    got = crt_pair(r1, m1, r2, m2)
    from math import lcm
    brute = [x for x in range(lcm(m1, m2)) if x % m1 == r1 % m1 and x % m2 == r2 % m2]
    if got is None:
        assert brute == []
    else:
        assert brute == [got[0]] and got[1] == lcm(m1, m2)


def test_generalized_binomial():
    from math import comb
    assert binomial(7, 3) == comb(7, 3)
    assert binomial(-1, 3) == -1
    assert binomial(-4, 2) == 10
    assert binomial(3, 5) == 0


def test_prime_power():
    assert prime_power(81) == (3, 4)
    assert prime_power(2**61 - 1) == (2**61 - 1, 1)
    assert prime_power(12) is None


# -- generic solvers ----------------------------------------------------------------

def test_bruteforce_examples():
    x3 = HG.generator(3)
    assert psp_bruteforce(PSPInstance(HG, x3, x3), 10) == 1
    assert psp_bruteforce(PSPInstance(HG, x3, HG.identity()), 10) == 0
    assert psp_bruteforce(PSPInstance(HG, x3, HG.power(x3, 5)), 10) == 5
    assert psp_bruteforce(PSPInstance(HG, x3, HG.power(x3, -4)), 10) == -4
    assert psp_bruteforce(PSPInstance(HG, x3, HG.power(x3, 11)), 10) is None
    assert psp_bruteforce(PSPInstance(HG, x3, HG.generator(1)), 10) is None


def test_bsgs_examples():
    assert psp_bsgs(PSPInstance(Z23, 2, 13), 11) == 7
    assert pow(2, 7, 23) == 13
    assert psp_bsgs(PSPInstance(Z23, 2, 1), 11) == 0
    assert psp_bsgs(PSPInstance(Z23, 2, 2), 11) == 1
    with pytest.raises(NoSolution):
        psp_bsgs(PSPInstance(Z23, 2, 5), 11)  # 5 generates all of (Z/23)^*


@given(st.integers(0, 10**5))
def test_bsgs_least_exponent(a):
    p = 200087  # 2 * 100043 + 1
    grp = safe_prime_group(p)
    h = pow(grp.generator, a, p)
    inst, counter = counted(PSPInstance(grp, grp.generator, h))
    assert psp_bsgs(inst, grp.order) == a % grp.order
    assert counter.ops <= 2 * (isqrt(grp.order - 1) + 1)


# -- unitriangular reduction ---------------------------------------------------------

def test_ut_reduce_examples():
    g = UT3.elem({(1, 2): 2, (1, 3): 5})
    assert psp_ut_reduce(g, UT3.elem({(1, 2): 14, (1, 3): 35})) == 7
    assert psp_ut_reduce(g, g) == 1
    z6 = UTGroup(3, RingDescriptor.mod(6))
    g6 = z6.elem({(1, 2): 2, (2, 3): 3})
    h6 = ut_power(g6, 5)
    assert (h6.entry(1, 2), h6.entry(2, 3)) == (4, 3)
    assert psp_ut_reduce(g6, h6) == 5


def test_ut_reduce_rejects_non_powers():
    g = UT3.unit(1, 2, 2)
    with pytest.raises(NotAPower):
        psp_ut_reduce(g, UT3.unit(1, 2, 3))
    with pytest.raises(NotAPower):
        psp_ut_reduce(g, UT3.unit(2, 3, 1))
    with pytest.raises(NotAPower):
        psp_ut_reduce(UT3.unit(1, 2), UT3.elem({(1, 2): 2, (1, 3): 1}))
    with pytest.raises(ValueError):
        psp_ut_reduce(UT3.identity(), UT3.identity())


def test_ut_reduce_needs_higher_band_when_low_band_is_ambiguous():
    # over Z/4: band-1 entry 2 only pins a mod 2; the corner pins the rest
    r = UTGroup(3, RingDescriptor.mod(4))
    g = r.elem({(1, 2): 2, (2, 3): 1})
    for a in range(8):
        got = psp_ut_reduce(g, ut_power(g, a))
        assert ut_power(g, got) == ut_power(g, a)


RINGS = [Z, RingDescriptor.mod(6), RingDescriptor.mod(12), RingDescriptor.mod(8),
         RingDescriptor.prime_field(5), RingDescriptor.mod(2**61 - 1)]


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(RINGS), st.integers(2, 6), st.integers(0, 2**32), st.integers(-2**80, 2**80))
def test_ut_reduce_property(ring, n, seed, a):
    grp = UTGroup(n, ring)
    g = ut_random(grp, seed, 2**12)
    if g.is_identity():
        return
    h = ut_power(g, a)
    got = psp_ut_reduce(g, h)
    assert ut_power(g, got) == h
    if ring.modulus is None:
        assert got == a
    else:
        assert got >= 0


def test_ut_reduce_op_count_independent_of_exponent():
    g = ut_random(UT4, 5, 2**8)
    counts = set()
    for bits in (16, 64, 256, 1024):
        inst, counter = counted(PSPInstance(UT4, g, ut_power(g, 2**bits - 3)))
        psp_ut_reduce(inst.g, inst.h, inst.group)
        counts.add(counter.ops)
    assert len(counts) == 1


# -- digit recovery -------------------------------------------------------------------

def test_digits_order_nine_example():
    grp = cyclic_pgroup(3, 2)
    g = grp.generator
    filt = cyclic_filtration(grp, 3, 2)
    assert psp_pgroup_digits(PSPInstance(grp, g, grp.power(g, 5)), filt) == 5
    assert psp_pgroup_digits(PSPInstance(grp, g, 1), filt) == 0


@pytest.mark.parametrize("p,k", [(2, 5), (3, 1), (3, 4), (5, 3), (7, 2)])
def test_digits_cyclic_exhaustive(p, k):
    grp = cyclic_pgroup(p, k)
    filt = cyclic_filtration(grp, p, k)
    for base in (grp.generator, grp.power(grp.generator, p)):
        for a in range(p ** k):
            h = grp.power(base, a)
            assert grp.power(base, psp_pgroup_digits(PSPInstance(grp, base, h), filt)) == h


@pytest.mark.parametrize("p", [3, 5])
def test_digits_heisenberg(p):
    for grp in (PcGroup(heisenberg_presentation(p)), UTGroup(3, RingDescriptor.prime_field(p))):
        filt = builtin_filtration("heisenberg-fp", grp)
        rng = random.Random(p)
        for _ in range(30):
            g = grp.random_element(rng)
            if grp.is_identity(g):
                continue
            for a in range(p * p):
                h = grp.power(g, a)
                got = psp_pgroup_digits(PSPInstance(grp, g, h), filt)
                assert grp.equal(grp.power(g, got), h)


def test_digits_target_outside_subgroup():
    grp = PcGroup(heisenberg_presentation(3))
    filt = builtin_filtration("heisenberg-fp", grp)
    with pytest.raises(UnrecoverableDigit) as info:
        psp_pgroup_digits(PSPInstance(grp, grp.generator(1), grp.generator(2)), filt)
    assert info.value.level == 0
    with pytest.raises(UnrecoverableDigit) as info:
        psp_pgroup_digits(PSPInstance(grp, grp.generator(3), grp.generator(2)), filt)
    assert info.value.level == 0


def test_wrong_filtration_detected():
    grp = cyclic_pgroup(3, 3)
    short = cyclic_filtration(grp, 3, 2)  # stops one level early
    with pytest.raises((InconsistentFiltration, UnrecoverableDigit)):
        psp_pgroup_digits(PSPInstance(grp, grp.generator, grp.power(grp.generator, 7)), short)


# -- safe-prime demo -----------------------------------------------------------------

def test_safe_prime_demo_p23():
    rep = safe_prime_demo(23, h=13)
    assert rep.details["q"] == 11
    assert rep.details["generator"] == 5 and rep.details["base"] == 2
    assert rep.exponent == 7
    assert rep.ops <= 2 * 4 + 4


def test_safe_prime_demo_trivial_target():
    assert safe_prime_demo(11, h=1).exponent == 0


def test_safe_prime_demo_budget():
    from nilkex.groups import BudgetExceeded
    with pytest.raises(BudgetExceeded):
        safe_prime_demo(next_safe_prime(2**40), budget=2**10)


# -- end-to-end -----------------------------------------------------------------------

def test_break_heisenberg_protocol_one():
    params = default_params(load_platform("heisenberg"), "I")
    res = run_exchange(params, keys=[2, 3, 5])
    rep = break_exchange(res.transcript)
    assert rep.success and rep.key == res.shared_key == (0, 0, 30)


def test_break_ut3_protocol_one():
    params = default_params(load_platform("ut3z"), "I")
    res = run_exchange(params, keys=[2, 3, 5])
    rep = break_exchange(res.transcript)
    assert rep.key == UT3.unit(1, 3, 30) == res.shared_key


def test_break_ut4_protocol_two():
    params = default_params(load_platform("ut4z"), "II")
    res = run_exchange(params, keys=[2, 3, 5])
    rep = break_exchange(res.transcript)
    assert rep.key == UT4.unit(1, 4, 30) == res.shared_key


@pytest.mark.parametrize("spec,protocol,solver", [
    ("heisenberg-fp:5", "I", "pgroup-digits"), ("heisenberg-fp:5", "II", "bsgs"),
    ("ut3fp:7", "I", "pgroup-digits"), ("dihedral16.npres", "I", "bruteforce"),
    ("ut3zmod:12", "I", "ut-reduce"), ("ut5z", "II", "ut-reduce"), ("ut4z", "I", "bruteforce"),
])
def test_break_other_solvers(spec, protocol, solver):
    import warnings
    params = default_params(load_platform(spec), protocol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_exchange(params, seed=3, bound=50)
    rep = break_exchange(res.transcript, solver)
    assert params.group.equal(rep.key, res.shared_key)


@pytest.mark.filterwarnings("ignore:shared key lies")
def test_unsupported_solver():
    params = default_params(load_platform("dihedral16.npres"), "I")
    res = run_exchange(params, keys=[1, 1, 1, 1])
    with pytest.raises(UnsupportedSolver):
        break_exchange(res.transcript, "ut-reduce")
    with pytest.raises(UnsupportedSolver):
        break_exchange(res.transcript, "nope")


def test_budget_exhaustion_reports_attack_failed():
    p = next_safe_prime(2**64)
    params = default_params(load_platform(f"heisenberg-fp:{p}"), "I")
    res = run_exchange(params, seed=1)
    with pytest.raises(AttackFailed) as info:
        break_exchange(res.transcript, "bsgs", budget=2**10)
    assert info.value.ops <= 2**10


def test_bruteforce_not_found_is_attack_failed():
    params = default_params(load_platform("ut3z"), "I")
    res = run_exchange(params, keys=[10**9, 1, 1])
    with pytest.raises(AttackFailed):
        break_exchange(res.transcript, "bruteforce", budget=1000)
