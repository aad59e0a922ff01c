"""Real quadratic fields with narrow class number one.

Integral elements are integer pairs (a, b) meaning a + b*phi with
phi = (1 + sqrt(D))/2; the supported table only contains D == 1 mod 4.
Indices of q-expansions supported on the inverse different are stored by
their numerator: (a, b) under support 'dinv' means (a + b*phi)/sqrt(D).

Total positivity and archimedean size comparisons are done with exact
integer arithmetic (sqrt(D) is irrational for every supported D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    ConfigError,
    FactorizationOverflow,
    RamifiedPrime,
    UnsupportedField,
)
from .padic import PadicNum, PadicRing, hensel_sqrt, _tonelli_shanks

# D -> fundamental unit a + b*phi (all with norm -1, so narrow h = h = 1)
_NARROW_ONE_TABLE = {
    5: (0, 1),
    13: (1, 1),
    17: (3, 2),
    29: (2, 1),
    37: (5, 2),
    41: (27, 10),
    53: (3, 1),
    61: (17, 5),
    73: (943, 250),
}

SUPPORT_OL = "OL"
SUPPORT_DINV = "dinv"


def _squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class RealQuadraticField:
    D: int

    @property
    def disc(self) -> int:
        return self.D  # all supported D are 1 mod 4

    @property
    def phi_norm(self) -> int:
        """N(phi) = (1 - D)/4."""
        return (1 - self.D) // 4

    @property
    def fundamental_unit(self):
        return _NARROW_ONE_TABLE[self.D]

    # -- element arithmetic on (a, b) = a + b*phi ----------------------

    def mul(self, x, y):
        a, b = x
        c, d = y
        m = (self.D - 1) // 4  # phi^2 = phi + m
        return (a * c + b * d * m, a * d + b * c + b * d)

    def conj(self, x):
        a, b = x
        return (a + b, -b)

    def trace(self, x) -> int:
        return 2 * x[0] + x[1]

    def norm(self, x) -> int:
        a, b = x
        return a * a + a * b - b * b * (self.D - 1) // 4

    def mul_int(self, x, n: int):
        return (x[0] * n, x[1] * n)

    def divide_exact(self, x, y):
        """x / y in O_L, or None when y does not divide x."""
        n = self.norm(y)
        if n == 0:
            raise ZeroDivisionError("division by zero element")
        num = self.mul(x, self.conj(y))
        if num[0] % n or num[1] % n:
            return None
        return (num[0] // n, num[1] // n)

    def is_totally_positive(self, x) -> bool:
        t = self.trace(x)
        return t > 0 and t * t > self.D * x[1] * x[1]

    # archimedean bounds, exact via isqrt
    def floor_sigma_max(self, x) -> int:
        """floor(max(sigma_1, sigma_2)(a + b*phi)) for a totally positive x."""
        t = self.trace(x)
        s = math.isqrt(self.D * x[1] * x[1])
        return (t + s) // 2

    def ceil_sigma_max(self, x) -> int:
        t = self.trace(x)
        b2 = self.D * x[1] * x[1]
        if b2 == 0:
            return -((-t) // 2)
        return self.floor_sigma_max(x) + 1

    def floor_scaled_sigma_min(self, x, B: int) -> int:
        """Conservative floor(B * min(sigma)(x)) for totally positive x."""
        t = self.trace(x)
        if x[1] == 0:
            return B * t // 2
        u = math.isqrt(self.D * B * B * x[1] * x[1])
        return (B * t - u - 1) // 2


def make_field(D: int) -> RealQuadraticField:
    """Field constructor; certifies narrow class number one via the table."""
    if D <= 1:
        raise UnsupportedField(f"D = {D} must be > 1")
    if not _squarefree(D):
        raise UnsupportedField(f"D = {D} is not squarefree")
    if D not in _NARROW_ONE_TABLE:
        raise UnsupportedField(
            f"D = {D} is outside the built-in narrow-class-number-one table "
            f"{sorted(_NARROW_ONE_TABLE)}"
        )
    L = RealQuadraticField(D)
    eps = _NARROW_ONE_TABLE[D]
    if L.norm(eps) != -1:
        raise UnsupportedField(f"fundamental unit table broken for D = {D}")
    return L


class PrimeSplitting:
    """Splitting data of an odd unramified prime p, with the two p-adic
    embeddings at working precision.

    Split: sigma_i are maps into Z/p^N with sigma_i(pi_i) of valuation 1.
    Inert: sigma_1 maps into the quadratic extension, sigma_2 = Frob o sigma_1.
    """

    def __init__(self, field: RealQuadraticField, p: int, N: int):
        if p == 2:
            raise ConfigError("p must be odd")
        if field.disc % p == 0:
            raise RamifiedPrime(f"p = {p} divides the discriminant {field.disc}")
        self.field = field
        self.p = p
        self.N = N
        D = field.D
        if pow(D % p, (p - 1) // 2, p) == 1:
            self.kind = "split"
            self.ring = PadicRing(p, N, 1)
            self._sqrtD = hensel_sqrt(D, p, N)
        else:
            self.kind = "inert"
            self.ring = PadicRing(p, N, 2)
            # sqrt(D) = w * X with w = sqrt(D / X^2) in Z/p^N
            c = self.ring.nonresidue
            w = hensel_sqrt(D * pow(c, -1, p**N) % p**N, p, N)
            self._sqrtD = self.ring.make(0, w.lift())
        inv2 = pow(2, -1, p**N)
        self._sigma1_phi = (self.ring.one + self._sqrtD) * inv2
        self._sigma2_phi = (self.ring.one - self._sqrtD) * inv2
        self._inv_sqrtD = (self._sqrtD.inv(), (-self._sqrtD).inv())
        self._cache = {}
        if self.kind == "split":
            self.pi1, self.pi2 = self._split_generators()
        else:
            self.pi1 = self.pi2 = None

    def _split_generators(self):
        """Totally positive generators (pi1, pi2) of the primes above p,
        with pi1 * pi2 = p and sigma_1(pi1) of valuation 1.

        Searches norm-p elements by ascending trace; any trace-positive
        solution of t^2 - D b^2 = 4p is automatically totally positive.
        """
        L, p = self.field, self.p
        t = math.isqrt(4 * p)
        while True:
            t += 1
            r = t * t - 4 * p
            if r < 0:
                continue
            if r % L.D == 0:
                b2 = r // L.D
                b = math.isqrt(b2)
                if b * b == b2 and (t - b) % 2 == 0:
                    pi = ((t - b) // 2, b)
                    break
        assert L.norm(pi) == p and L.is_totally_positive(pi)
        pib = L.conj(pi)
        s1 = self._embed_integral(pi, 1)
        if s1.valuation() >= 1:
            return pi, pib
        return pib, pi

    def _embed_integral(self, x, which: int) -> PadicNum:
        a, b = x
        phi = self._sigma1_phi if which == 1 else self._sigma2_phi
        return self.ring.make(a) + phi * b

    def sigma(self, x, which: int, support: str = SUPPORT_OL) -> PadicNum:
        """p-adic embedding sigma_which of an index key."""
        key = (x, which, support)
        got = self._cache.get(key)
        if got is not None:
            return got
        val = self._embed_integral(x, which)
        if support == SUPPORT_DINV:
            inv = self._inv_sqrtD[0] if which == 1 else self._inv_sqrtD[1]
            val = val * inv
        elif support != SUPPORT_OL:
            raise ConfigError(f"unknown support tag {support!r}")
        self._cache[key] = val
        return val

    def in_prime(self, x, which: int, support: str) -> bool:
        """Whether the index lies in p_which (inert: in (p))."""
        a, b = x
        p = self.p
        if self.kind == "inert":
            return a % p == 0 and b % p == 0
        phi = self._sigma1_phi if which == 1 else self._sigma2_phi
        s = phi.a % p  # embedding of phi mod p (degree 1 ring)
        return (a + b * s) % p == 0

    def prime_generator(self, which: int):
        if self.kind == "inert":
            return (self.p, 0)
        return self.pi1 if which == 1 else self.pi2


def splitting_type(field: RealQuadraticField, p: int, N: int) -> PrimeSplitting:
    return PrimeSplitting(field, p, N)


def tot_pos_enum(field: RealQuadraticField, support: str, B: int):
    """All keys of 0 and the totally positive elements of trace <= B,
    sorted by (trace, first real embedding).
    """
    if B < 0:
        raise ConfigError("trace bound must be >= 0")
    D = field.D
    out = [(0, 0)]
    if support == SUPPORT_DINV:
        # key (a,b): element (a + b*phi)/sqrt(D); trace = b;
        # totally positive iff b > 0 and (2a+b)^2 < D b^2
        for b in range(1, B + 1):
            s = math.isqrt(D * b * b)
            # 2a + b ranges over integers of |.| < b*sqrt(D) with matching parity
            lo, hi = -s, s
            for t in range(lo, hi + 1):
                if (t - b) % 2 == 0 and t * t < D * b * b:
                    out.append(((t - b) // 2, b))
    elif support == SUPPORT_OL:
        # key (a,b): element a + b*phi; trace = 2a + b;
        # totally positive iff trace > 0 and trace^2 > D b^2
        for t in range(1, B + 1):
            s = math.isqrt(t * t // D) + 1
            for b in range(-s, s + 1):
                if (t - b) % 2 == 0 and t * t > D * b * b:
                    out.append(((t - b) // 2, b))
    else:
        raise ConfigError(f"unknown support tag {support!r}")

    def sort_key(k):
        a, b = k
        if support == SUPPORT_DINV:
            return (b, a)
        return (2 * a + b, b)

    out.sort(key=sort_key)
    return out


def key_trace(field: RealQuadraticField, key, support: str) -> int:
    if support == SUPPORT_DINV:
        return key[1]
    return field.trace(key)


_NORM_BUDGET = 2**63
_DIVISOR_CACHE: dict = {}


def _splitting_mod_q(field: RealQuadraticField, q: int):
    """Return ('ram',), ('inert',) or ('split', s) with s = phi mod q_1."""
    D = field.D
    if D % q == 0:
        return ("ram",)
    if q == 2:
        # D == 1 mod 8: split with phi == 0 / 1; D == 5 mod 8: inert
        if D % 8 == 1:
            return ("split", 0)
        return ("inert",)
    if pow(D % q, (q - 1) // 2, q) != 1:
        return ("inert",)
    r = _tonelli_shanks(D % q, q)
    s = (1 + r) * pow(2, -1, q) % q
    return ("split", s)


def ideal_divisors(field: RealQuadraticField, key, support: str, aux: int = 1):
    """Integral ideal divisors of (beta) * different, with norms.

    beta must be a nonzero index key.  Returns a sorted list of
    (label, norm) pairs where label is a tuple of (q, tag, exponent)
    entries identifying the divisor.  aux is an auxiliary level: divisors
    meeting a rational prime of aux are dropped (trivial by default).
    """
    if key == (0, 0):
        raise ConfigError("ideal_divisors needs beta != 0")
    cache_key = (field.D, key, support, aux)
    got = _DIVISOR_CACHE.get(cache_key)
    if got is not None:
        return got
    num = key  # (beta)*different = (numerator) for support 'dinv'
    n = abs(field.norm(num))
    if support == SUPPORT_OL:
        n *= field.D  # times N(different)
    if n >= _NORM_BUDGET:
        raise FactorizationOverflow(f"norm {n} exceeds the 64-bit budget")

    # prime valuations of the ideal (num) [times different for 'OL']
    prime_data = []  # (q, tag, norm_of_prime, valuation)
    m = abs(field.norm(num))
    q = 2
    while q * q <= m:
        if m % q == 0:
            v = 0
            while m % q == 0:
                m //= q
                v += 1
            prime_data.extend(_prime_vals(field, num, q, v))
        q += 1
    if m > 1:
        prime_data.extend(_prime_vals(field, num, m, 1))
    if support == SUPPORT_OL:
        # multiply by the different (sqrt(D)): ramified primes q | D, each once
        extra = {}
        for q in _prime_factors(field.D):
            extra[q] = 1
        merged = {}
        for (q, tag, nq, v) in prime_data:
            merged[(q, tag, nq)] = v
        for q, v in extra.items():
            k2 = (q, "ram", q)
            merged[k2] = merged.get(k2, 0) + v
        prime_data = [(q, tag, nq, v) for (q, tag, nq), v in sorted(merged.items())]

    if aux != 1:
        bad = set(_prime_factors(aux))
        prime_data = [row for row in prime_data if row[0] not in bad]
    divisors = [((), 1)]
    for (q, tag, nq, v) in prime_data:
        new = []
        for label, norm in divisors:
            for e in range(v + 1):
                lab = label + ((q, tag, e),) if e else label
                new.append((lab, norm * nq**e))
        divisors = new
    divisors.sort(key=lambda t: (t[1], t[0]))
    if len(_DIVISOR_CACHE) > 500_000:
        _DIVISOR_CACHE.clear()
    _DIVISOR_CACHE[cache_key] = divisors
    return divisors


def _prime_factors(n: int):
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def _prime_vals(field: RealQuadraticField, num, q: int, vq: int):
    """Valuations of (num) at the primes over q, given v_q(N(num)) = vq."""
    kind = _splitting_mod_q(field, q)
    if kind[0] == "ram":
        return [(q, "ram", q, vq)]
    if kind[0] == "inert":
        if vq % 2:
            raise ConfigError("odd inert valuation; norm bookkeeping broken")
        return [(q, "inert", q * q, vq // 2)] if vq else []
    s = kind[1]
    # common q-divisibility of the element gives equal valuation both sides
    common = 0
    x = num
    while x[0] % q == 0 and x[1] % q == 0:
        x = (x[0] // q, x[1] // q)
        common += 1
    rest = vq - 2 * common
    side1 = common
    side2 = common
    if rest:
        if (x[0] + x[1] * s) % q == 0:
            side1 += rest
        else:
            side2 += rest
    out = []
    if side1:
        out.append((q, "s1", q, side1))
    if side2:
        out.append((q, "s2", q, side2))
    return out
