"""Unit tests for the exact p-adic coefficient rings."""

import random

import pytest

from padicgz.errors import ConvergenceDomain, NonResidue, NonUnitInverse
from padicgz.padic import (
    PadicRing,
    PrecisionBudget,
    hensel_sqrt,
    pbinom,
    pexp,
    plog,
    ppow,
    teichmuller,
)


R72 = PadicRing(7, 2)
R74 = PadicRing(7, 4)
R7q = PadicRing(7, 6, 2)


def test_inv_small():
    # 2 * 25 = 50 == 1 mod 49
    assert R72.from_int(2).inv() == R72.from_int(25)


def test_inv_is_inverse_random():
    rng = random.Random(1)
    for _ in range(50):
        a = R74.from_int(rng.randrange(1, 7**4))
        if not a.is_unit():
            continue
        assert a * a.inv() == R74.one


def test_inv_nonunit_raises():
    with pytest.raises(NonUnitInverse):
        R72.from_int(7).inv()


def test_ring_axioms_random():
    rng = random.Random(2)
    for ring in (R74, R7q):
        for _ in range(40):
            if ring.degree == 1:
                x, y, z = (ring.from_int(rng.randrange(ring.modulus)) for _ in range(3))
            else:
                x, y, z = (
                    ring.make(rng.randrange(ring.modulus), rng.randrange(ring.modulus))
                    for _ in range(3)
                )
            assert (x + y) + z == x + (y + z)
            assert (x * y) * z == x * (y * z)
            assert x * (y + z) == x * y + x * z
            assert x * y == y * x


def test_valuation_multiplicative():
    rng = random.Random(3)
    for _ in range(100):
        x = R74.from_int(rng.randrange(1, 7**4))
        y = R74.from_int(rng.randrange(1, 7**4))
        if x.valuation() + y.valuation() < 4:
            assert (x * y).valuation() == x.valuation() + y.valuation()


def test_teichmuller_small():
    # 31 == 3 mod 7 and 31^3 == -1 mod 49
    w = teichmuller(R72.from_int(3))
    assert w == R72.from_int(31)
    assert w**3 == -R72.one
    assert teichmuller(R72.one) == R72.one
    assert teichmuller(R72.from_int(6)) == R72.from_int(48)


def test_teichmuller_properties():
    rng = random.Random(4)
    for ring in (R74, R7q):
        order = ring.residue_order()
        for _ in range(20):
            b = rng.randrange(ring.modulus) if ring.degree == 2 else 0
            x = ring.make(rng.randrange(1, ring.modulus), b)
            if not x.is_unit():
                continue
            w = teichmuller(x)
            assert w**order == ring.one
            assert (w - x).valuation() >= 1
        x = ring.make(rng.randrange(1, ring.modulus))
        y = ring.make(rng.randrange(1, ring.modulus))
        if x.is_unit() and y.is_unit():
            assert teichmuller(x * y) == teichmuller(x) * teichmuller(y)


def test_log_exp_round_trip():
    assert plog(R74.one).is_zero()
    x = R74.from_int(8)  # 1 + 7
    assert pexp(plog(x)) == x
    rng = random.Random(5)
    for ring in (R74, R7q):
        for _ in range(20):
            z = ring.make(
                7 * rng.randrange(ring.modulus // 7),
                (7 * rng.randrange(ring.modulus // 7)) if ring.degree == 2 else 0,
            )
            x = ring.one + z
            assert pexp(plog(x)) == x
            assert plog(pexp(z)) == z


def test_exp_homomorphism():
    a = R74.from_int(7)
    assert pexp(a) * pexp(a) == pexp(a + a)


def test_log_domain():
    with pytest.raises(ConvergenceDomain):
        plog(R74.from_int(3))
    with pytest.raises(ConvergenceDomain):
        pexp(R74.from_int(3))


def test_ppow_integer_consistency():
    t = R72.from_int(3)
    assert ppow(t, 0, 0) == R72.one
    assert ppow(t, 2, 2) == R72.from_int(9)
    rng = random.Random(6)
    for ring in (R74, R7q):
        order = ring.residue_order()
        for _ in range(15):
            b = rng.randrange(ring.modulus) if ring.degree == 2 else 0
            t = ring.make(rng.randrange(1, ring.modulus), b)
            if not t.is_unit():
                continue
            m = rng.randrange(-6, 12)
            assert ppow(t, m, m % order) == t**m


def test_ppow_truncation_convergence():
    # t^u for u = 1, 1+7, 1+7+49 agree with integer powers and converge 7-adically
    t = R74.from_int(8)
    prev = None
    for digits in range(1, 4):
        u = sum(7**i for i in range(digits))
        val = ppow(t, u, u % 6)
        assert val == t**u
        if prev is not None:
            assert (val - prev).valuation() >= digits
        prev = val


def test_ppow_additive_in_exponent():
    rng = random.Random(7)
    for _ in range(10):
        t = R74.from_int(rng.randrange(1, 7**4))
        if not t.is_unit():
            continue
        u1, u2 = rng.randrange(50), rng.randrange(50)
        c1, c2 = rng.randrange(6), rng.randrange(6)
        lhs = ppow(t, R74.from_int(u1) + R74.from_int(u2), c1 + c2)
        rhs = ppow(t, u1, c1) * ppow(t, u2, c2)
        assert lhs == rhs


def test_pbinom():
    assert pbinom(5, 2, R74) == R74.from_int(10)
    assert pbinom(R74.from_int(5), 0) == R74.one
    for j in range(6):
        assert pbinom(-1, j, R74) == R74.from_int((-1) ** j)
    # p-adic integrality of interpolated binomials on random u
    rng = random.Random(8)
    for _ in range(30):
        u = R74.from_int(rng.randrange(7**4))
        for j in range(5):
            assert pbinom(u, j).valuation() >= 0


def test_hensel_sqrt():
    r = hensel_sqrt(5, 11, 2)
    assert r.lift() == 48 and (r * r).lift() == 5
    assert hensel_sqrt(4, 7, 3).lift() == 2
    with pytest.raises(NonResidue):
        hensel_sqrt(5, 7, 3)
    rng = random.Random(9)
    for _ in range(30):
        a = rng.randrange(1, 7**5)
        if a % 7 == 0 or pow(a % 7, 3, 7) != 1:
            continue
        x = hensel_sqrt(a, 7, 5)
        assert (x * x).lift() == a % 7**5
        assert x.lift() % 7 <= 3


def test_precision_budget():
    b = PrecisionBudget(12)
    b.charge("div", 2)
    b.charge("div", 0)  # no-op
    assert b.effective == 10
    assert b.total_loss == 2
    assert b.trail() == [{"op": "div", "digits": 2}]
