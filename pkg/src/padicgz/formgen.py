"""Built-in, independently derivable test inputs.

Every generator is deterministic from its parameters; eigen self-checks
run at construction time and abort on mismatch.  The Hilbert Eisenstein
constant term defaults to 0: its true value is a zeta value that no
depleted pipeline ever sees, and the choice keeps the T_0-eigen relation
exact including the constant term.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .errors import BadPrime, ConfigError, NotEigenform, SingularCurve
from .padic import PadicRing
from .qexp import EllipticQExp, HilbertQExp, QExpContext
from .quadfield import SUPPORT_DINV, ideal_divisors, tot_pos_enum


def _bernoulli(k: int) -> Fraction:
    B = [Fraction(1)]
    for m in range(1, k + 1):
        s = Fraction(0)
        for j in range(m):
            s += math.comb(m + 1, j) * B[j]
        B.append(-s / (m + 1))
    return B[k]


def _sigma(n: int, power: int) -> int:
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**power
            if d != n // d:
                total += (n // d) ** power
        d += 1
    return total


def fraction_to_padic(fr: Fraction, ring: PadicRing):
    if fr.denominator % ring.p == 0:
        raise BadPrime(f"p = {ring.p} divides the denominator {fr.denominator}")
    return ring.from_int(fr.numerator) * ring.from_int(fr.denominator).inv()


def elliptic_eisenstein(k: int, B: int, ring: PadicRing) -> EllipticQExp:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, weight tag k."""
    if k < 4 or k % 2:
        raise ConfigError("elliptic Eisenstein needs even k >= 4")
    c = fraction_to_padic(Fraction(-2 * k, 1) / _bernoulli(k), ring)
    coeffs = {0: ring.one}
    for n in range(1, B + 1):
        coeffs[n] = c * _sigma(n, k - 1)
    return EllipticQExp(ring, B, coeffs, weight_tag=k)


def delta_form(B: int, ring: PadicRing) -> EllipticQExp:
    """The discriminant cusp form q prod (1-q^n)^24, expanded exactly."""
    poly = [1] + [0] * B
    for n in range(1, B + 1):
        # multiply by (1 - q^n)^24 one factor at a time
        for _ in range(24):
            for m in range(B, n - 1, -1):
                poly[m] -= poly[m - n]
    coeffs = {n + 1: ring.from_int(poly[n]) for n in range(B)}
    out = EllipticQExp(ring, B, coeffs, weight_tag=12)
    if B >= 7 and poly[6] != -16744:
        raise NotEigenform("discriminant expansion broken: a_7 != -16744")
    return out


_SUPPORTED_CURVES = {
    (0, -1, 1, -10, -20): {"conductor": 11, "bad_ap": {11: 1}},
}


def _curve_discriminant(a1, a2, a3, a4, a6) -> int:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def _count_points(ainvs, ell: int) -> int:
    a1, a2, a3, a4, a6 = (a % ell for a in ainvs)
    count = 1  # infinity
    if ell == 2:
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    count += 1
        return count
    for x in range(ell):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % ell
        lin = (a1 * x + a3) % ell
        disc = (lin * lin + 4 * rhs) % ell
        if disc == 0:
            count += 1
        elif pow(disc, (ell - 1) // 2, ell) == 1:
            count += 2
    return count


def pointcount_newform(ainvs, B: int, ring: PadicRing) -> EllipticQExp:
    """Weight-2 newform coefficients from point counts over F_ell."""
    ainvs = tuple(ainvs)
    if _curve_discriminant(*ainvs) == 0:
        raise SingularCurve(f"curve {ainvs} is singular")
    if ainvs not in _SUPPORTED_CURVES:
        raise ConfigError(f"curve {ainvs} outside the supported conductor table")
    data = _SUPPORTED_CURVES[ainvs]
    a = {1: 1}
    for ell in range(2, B + 1):
        if any(ell % q == 0 for q in range(2, ell)):
            continue
        if ell in data["bad_ap"]:
            ap = data["bad_ap"][ell]
            power, val = ell, ap
            while power <= B:
                a[power] = val
                power *= ell
                val *= ap
        else:
            ap = ell + 1 - _count_points(ainvs, ell)
            a[ell] = ap
            power = ell * ell
            while power <= B:
                a[power] = ap * a[power // ell] - ell * a[power // ell // ell]
                power *= ell
    for n in range(2, B + 1):
        if n in a:
            continue
        m = 1
        for ell, e in _factorize(n):
            m *= a[ell**e]
        a[n] = m
    return EllipticQExp(
        ring, B, {n: ring.from_int(a[n]) for n in a if n <= B}, weight_tag=2
    )


def _factorize(n: int):
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            out.append((q, e))
        q += 1
    if n > 1:
        out.append((n, 1))
    return out


def hilbert_eisenstein(
    k: int, ctx: QExpContext, B: int, support: str = SUPPORT_DINV
) -> HilbertQExp:
    """Parallel-weight Eisenstein stream a_beta = sum over ideal divisors
    of (beta)*different of N^(k-1); constant term 0.

    For even k this is the q-expansion of the classical Eisenstein series
    with trivial character.  Odd k >= 2 is accepted and produces the same
    formal divisor-sum stream, which is still a T_0-eigen stream and
    serves as an identity-check input (unit-character consistency only
    holds for even k).
    """
    if k < 2:
        raise ConfigError("hilbert Eisenstein needs k >= 2")
    ring = ctx.ring
    coeffs = {}
    for key in tot_pos_enum(ctx.field, support, B):
        if key == (0, 0):
            continue
        total = 0
        for _, norm in ideal_divisors(ctx.field, key, support):
            total += norm ** (k - 1)
        coeffs[key] = ring.from_int(total)
    out = HilbertQExp(ctx, support, B, coeffs, weight_tag=(k, k))
    _eisenstein_self_check(out, k)
    return out


def _eisenstein_self_check(E: HilbertQExp, k: int):
    """Verify the T_0-eigen relation at a sample prime over p at build time."""
    ctx = E.ctx
    norm = ctx.p if ctx.sp.kind == "split" else ctx.p**2
    lam = ctx.ring.from_int(1 + norm ** (k - 1))
    te = E.t(1, k)
    ref = E.scale(lam)
    for key in te.coeffs.keys() | {kk for kk in ref.coeffs if ref.trace(kk) <= te.bound}:
        if te.trace(key) > te.bound:
            continue
        if te.coeff(key) != ref.coeff(key):
            raise NotEigenform(f"Eisenstein eigen self-check failed at {key}")


def random_depleted(seed: int, ctx: QExpContext, B: int, support=SUPPORT_DINV):
    """Pseudorandom unit coefficients on the p-coprime indices only."""
    rng = random.Random(seed)
    ring = ctx.ring
    coeffs = {}
    for key in tot_pos_enum(ctx.field, support, B):
        if key == (0, 0):
            continue
        if any(ctx.sp.in_prime(key, i, support) for i in ctx.primes_above_p()):
            continue
        a = rng.randrange(ring.modulus)
        if a % ring.p == 0:
            a += 1  # force a unit first coordinate
        b = rng.randrange(ring.modulus) if ring.degree == 2 else 0
        coeffs[key] = ring.make(a, b)
    return HilbertQExp(ctx, support, B, coeffs)


def random_form(seed: int, ctx: QExpContext, B: int, support=SUPPORT_DINV):
    """Pseudorandom coefficients on the full index set (constant included)."""
    rng = random.Random(seed)
    ring = ctx.ring
    coeffs = {}
    for key in tot_pos_enum(ctx.field, support, B):
        a = rng.randrange(ring.modulus)
        b = rng.randrange(ring.modulus) if ring.degree == 2 else 0
        coeffs[key] = ring.make(a, b)
    return HilbertQExp(ctx, support, B, coeffs)


def random_elliptic(seed: int, ring: PadicRing, B: int) -> EllipticQExp:
    rng = random.Random(seed)
    return EllipticQExp(
        ring, B, {n: ring.make(rng.randrange(ring.modulus)) for n in range(B + 1)}
    )


def demo_basis(ring: PadicRing, B: int, tame_level: int = 1):
    """The shipped weight-12 classical basis {E12, V E12, Delta, V Delta}
    with its eigen data; U-stability is certified at runtime, not trusted."""
    from .heckeslope import ClassicalBasis, EigenBlock

    p = ring.p
    if B < 2 * p:
        raise ConfigError(f"demo basis needs bound >= 2p = {2 * p}")
    E = elliptic_eisenstein(12, B, ring)
    D = delta_form(B, ring)
    forms = [E, E.v().truncated(B), D, D.v().truncated(B)]
    blocks = [
        EigenBlock(0, 1, a_p=ring.from_int(1 + p**11), nebentype=ring.one),
        EigenBlock(2, 3, a_p=D.coeff(p), nebentype=ring.one),
    ]
    return ClassicalBasis(ring, 12, tame_level, forms, blocks)
