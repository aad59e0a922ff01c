"""Truncated q-expansion rings: Hilbert over a real quadratic field and
elliptic over Q, with the index derivations d_i, depletion, the U/V/T
operators at p, and diagonal restriction.

Coefficients are sparse maps from index keys to p-adic numbers; absent
keys are zero.  Every expansion carries an explicit trace bound and no
operation reads a coefficient beyond a certified bound: U-type operators
shrink the declared bound conservatively, V-type operators grow it.
"""

from __future__ import annotations

from .errors import ConfigError, IndexMismatch, NonUnitIndex
from .padic import PadicNum, ppow
from .quadfield import SUPPORT_DINV, SUPPORT_OL, key_trace
from .weights import WeightCharacter


class QExpContext:
    """Field + prime splitting + coefficient ring, shared by expansions."""

    def __init__(self, field, splitting):
        if splitting.field != field:
            raise ConfigError("splitting belongs to a different field")
        self.field = field
        self.sp = splitting
        self.ring = splitting.ring
        self.p = splitting.p
        self.N = splitting.N

    def __eq__(self, other):
        return (
            isinstance(other, QExpContext)
            and self.field == other.field
            and self.sp.p == other.sp.p
            and self.sp.N == other.sp.N
            and self.sp.kind == other.sp.kind
        )

    def __hash__(self):
        return hash((self.field, self.sp.p, self.sp.N, self.sp.kind))

    def primes_above_p(self):
        return (1, 2) if self.sp.kind == "split" else (1,)

    def mul_key(self, key, gen):
        return self.field.mul(key, gen)

    def div_key(self, key, gen):
        return self.field.divide_exact(key, gen)


class HilbertQExp:
    """Truncated Hilbert q-expansion over the context field."""

    __slots__ = ("ctx", "support", "bound", "coeffs", "weight_tag")

    def __init__(self, ctx, support, bound, coeffs=None, weight_tag=None):
        if support not in (SUPPORT_OL, SUPPORT_DINV):
            raise ConfigError(f"unknown support tag {support!r}")
        self.ctx = ctx
        self.support = support
        self.bound = bound
        self.coeffs = {}
        if coeffs:
            for k, v in coeffs.items():
                if not v.is_zero():
                    self.coeffs[k] = v
        self.weight_tag = weight_tag

    # -- plumbing -------------------------------------------------------

    def _like(self, coeffs, bound=None, weight_tag=None):
        return HilbertQExp(
            self.ctx,
            self.support,
            self.bound if bound is None else bound,
            coeffs,
            self.weight_tag if weight_tag is None else weight_tag,
        )

    def _compat(self, other):
        if (
            not isinstance(other, HilbertQExp)
            or other.ctx != self.ctx
            or other.support != self.support
        ):
            raise IndexMismatch("operands live on different index sets")

    def trace(self, key) -> int:
        return key_trace(self.ctx.field, key, self.support)

    def coeff(self, key) -> PadicNum:
        if self.trace(key) > self.bound:
            raise IndexMismatch(
                f"coefficient at trace {self.trace(key)} beyond bound {self.bound}"
            )
        return self.coeffs.get(key, self.ctx.ring.zero)

    def keys_sorted(self):
        return sorted(self.coeffs, key=lambda k: (self.trace(k),) + k)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        try:
            self._compat(other)
        except IndexMismatch:
            return False
        return self.bound == other.bound and self.coeffs == other.coeffs

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        self._compat(other)
        b = min(self.bound, other.bound)
        out = {}
        for k, v in self.coeffs.items():
            if self.trace(k) <= b:
                out[k] = v
        for k, v in other.coeffs.items():
            if self.trace(k) <= b:
                s = out.get(k)
                out[k] = v if s is None else s + v
        return self._like(out, bound=b)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        self._compat(other)
        b = min(self.bound, other.bound)
        out = {}
        by_trace = {}
        for k, v in other.coeffs.items():
            by_trace.setdefault(self.trace(k), []).append((k, v))
        for k1, v1 in self.coeffs.items():
            t1 = self.trace(k1)
            if t1 > b:
                continue
            for t2, items in by_trace.items():
                if t1 + t2 > b:
                    continue
                for k2, v2 in items:
                    key = (k1[0] + k2[0], k1[1] + k2[1])
                    prod = v1 * v2
                    s = out.get(key)
                    out[key] = prod if s is None else s + prod
        return self._like(out, bound=b)

    def scale(self, c):
        return self._like({k: v * c for k, v in self.coeffs.items()})

    # -- index operators ---------------------------------------------------

    def d(self, i: int):
        """The derivation a_beta -> sigma_i(beta) a_beta."""
        sp = self.ctx.sp
        out = {
            k: v * sp.sigma(k, i, self.support) for k, v in self.coeffs.items()
        }
        return self._like(out)

    def d_char(self, i: int, exponent):
        """sigma_i(beta)^exponent on coefficients.

        exponent: an int (exact powering; negative powers require unit
        indices) or a one-component WeightCharacter (ppow route; requires
        unit indices throughout, i.e. a suitably depleted input).
        """
        sp = self.ctx.sp
        out = {}
        if isinstance(exponent, int):
            for k, v in self.coeffs.items():
                s = sp.sigma(k, i, self.support)
                if exponent < 0 and not s.is_unit():
                    raise NonUnitIndex(
                        f"d^({exponent}) at index {k}: sigma_{i} not a unit "
                        "(input not depleted)"
                    )
                out[k] = v * s**exponent
            return self._like(out)
        if not isinstance(exponent, WeightCharacter) or exponent.arity != 1:
            raise ConfigError("exponent must be an int or 1-component character")
        if exponent.classical is not None:
            return self.d_char(i, exponent.classical[0])
        u, chi = exponent.u[0], exponent.chi[0]
        for k, v in self.coeffs.items():
            s = sp.sigma(k, i, self.support)
            if not s.is_unit():
                raise NonUnitIndex(
                    f"d-power at index {k}: sigma_{i} not a unit (input not depleted)"
                )
            out[k] = v * ppow(s, u, chi)
        return self._like(out)

    def deplete(self, which="all"):
        """Zero the coefficients with index in the chosen primes above p.

        which: 'all', or an iterable of prime labels in {1, 2} (split).
        The beta = 0 term is always killed.
        """
        sp = self.ctx.sp
        if which == "all":
            labels = self.ctx.primes_above_p()
        else:
            labels = tuple(which)
        out = {}
        for k, v in self.coeffs.items():
            if k == (0, 0):
                continue
            if any(sp.in_prime(k, i, self.support) for i in labels):
                continue
            out[k] = v
        return self._like(out)

    def v(self, which: int = 1):
        """V_0 at the chosen prime: pure index shift beta -> pi * beta."""
        gen = self.ctx.sp.prime_generator(which)
        fld = self.ctx.field
        out = {}
        for k, v in self.coeffs.items():
            out[fld.mul(k, gen)] = v
        return self._like(out, bound=fld.floor_scaled_sigma_min(gen, self.bound))

    def u(self, which: int = 1):
        """U_0 at the chosen prime: (U f)_beta = f_{pi beta}."""
        gen = self.ctx.sp.prime_generator(which)
        fld = self.ctx.field
        new_bound = self.bound // fld.ceil_sigma_max(gen)
        out = {}
        for k, v in self.coeffs.items():
            kk = fld.divide_exact(k, gen)
            if kk is not None and self.trace(kk) <= new_bound:
                out[kk] = v
        return self._like(out, bound=new_bound)

    def v_rational_p(self):
        """V_0(p): index shift by the rational prime p (= V_1 V_2 if split)."""
        p = self.ctx.p
        out = {(k[0] * p, k[1] * p): v for k, v in self.coeffs.items()}
        return self._like(out, bound=self.bound * p)

    def t(self, which: int, weight: int, nebentype=1):
        """Normalized Hecke operator T_0 = U_0 + c V_0 at a prime above p,
        with c = N(prime)^(weight-1) * nebentype for parallel weight."""
        sp = self.ctx.sp
        norm = sp.p if sp.kind == "split" else sp.p**2
        c = self.ctx.ring.from_int(norm ** (weight - 1)) * nebentype
        return self.u(which) + self.v(which).scale(c)

    def truncated(self, bound: int):
        if bound > self.bound:
            raise IndexMismatch("cannot extend a declared bound")
        return self._like(
            {k: v for k, v in self.coeffs.items() if self.trace(k) <= bound},
            bound=bound,
        )

    def zeta_star(self):
        """Diagonal restriction: b_n = sum of a_beta over trace(beta) = n."""
        out = {}
        for k, v in self.coeffs.items():
            n = self.trace(k)
            s = out.get(n)
            out[n] = v if s is None else s + v
        return EllipticQExp(self.ctx.ring, self.bound, out, self.weight_tag)


class EllipticQExp:
    """Truncated elliptic q-expansion with coefficients in a p-adic ring."""

    __slots__ = ("ring", "bound", "coeffs", "weight_tag")

    def __init__(self, ring, bound, coeffs=None, weight_tag=None):
        self.ring = ring
        self.bound = bound
        self.coeffs = {}
        if coeffs:
            for n, v in coeffs.items():
                if not v.is_zero():
                    self.coeffs[n] = v
        self.weight_tag = weight_tag

    def _like(self, coeffs, bound=None, weight_tag=None):
        return EllipticQExp(
            self.ring,
            self.bound if bound is None else bound,
            coeffs,
            self.weight_tag if weight_tag is None else weight_tag,
        )

    def _compat(self, other):
        if not isinstance(other, EllipticQExp) or other.ring != self.ring:
            raise IndexMismatch("elliptic operands over different rings")

    def coeff(self, n: int) -> PadicNum:
        if n > self.bound:
            raise IndexMismatch(f"coefficient {n} beyond bound {self.bound}")
        return self.coeffs.get(n, self.ring.zero)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        try:
            self._compat(other)
        except IndexMismatch:
            return False
        return self.bound == other.bound and self.coeffs == other.coeffs

    def __add__(self, other):
        self._compat(other)
        b = min(self.bound, other.bound)
        out = {n: v for n, v in self.coeffs.items() if n <= b}
        for n, v in other.coeffs.items():
            if n <= b:
                s = out.get(n)
                out[n] = v if s is None else s + v
        return self._like(out, bound=b)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        self._compat(other)
        b = min(self.bound, other.bound)
        out = {}
        for n1, v1 in self.coeffs.items():
            if n1 > b:
                continue
            for n2, v2 in other.coeffs.items():
                if n1 + n2 > b:
                    continue
                prod = v1 * v2
                s = out.get(n1 + n2)
                out[n1 + n2] = prod if s is None else s + prod
        return self._like(out, bound=b)

    def scale(self, c):
        return self._like({n: v * c for n, v in self.coeffs.items()})

    def d(self):
        return self._like({n: v * n for n, v in self.coeffs.items()})

    def d_char(self, exponent):
        out = {}
        if isinstance(exponent, int):
            for n, v in self.coeffs.items():
                base = self.ring.make(n)
                if exponent < 0 and not base.is_unit():
                    raise NonUnitIndex(f"d^({exponent}) at non-unit index {n}")
                out[n] = v * base**exponent
            return self._like(out)
        if exponent.classical is not None:
            return self.d_char(exponent.classical[0])
        u, chi = exponent.u[0], exponent.chi[0]
        for n, v in self.coeffs.items():
            base = self.ring.make(n)
            if not base.is_unit():
                raise NonUnitIndex(f"d-power at non-unit index {n}")
            out[n] = v * ppow(base, u, chi)
        return self._like(out)

    def deplete(self):
        p = self.ring.p
        return self._like({n: v for n, v in self.coeffs.items() if n % p})

    def v(self):
        p = self.ring.p
        return self._like(
            {n * p: v for n, v in self.coeffs.items()}, bound=self.bound * p
        )

    def u(self):
        p = self.ring.p
        b = self.bound // p
        return self._like(
            {n // p: v for n, v in self.coeffs.items() if n % p == 0 and n // p <= b},
            bound=b,
        )

    def t(self, weight: int, nebentype=1):
        c = self.ring.from_int(self.ring.p ** (weight - 1)) * nebentype
        uu = self.u()
        vv = self.v()
        summed = uu + vv.scale(c)
        return summed

    def truncated(self, bound: int):
        if bound > self.bound:
            raise IndexMismatch("cannot extend a declared bound")
        return self._like(
            {n: v for n, v in self.coeffs.items() if n <= bound}, bound=bound
        )


def agreement_valuation(f, g, bound=None) -> int:
    """Minimal p-adic valuation of (f - g) over indices up to the common
    bound; returns the working precision N when the truncations agree
    exactly (N is the 'exact at working precision' sentinel)."""
    diff = f - g
    if bound is not None:
        if isinstance(diff, EllipticQExp):
            diff = diff.truncated(min(bound, diff.bound))
        else:
            diff = diff._like(
                {k: v for k, v in diff.coeffs.items() if diff.trace(k) <= bound},
                bound=min(bound, diff.bound),
            )
    vals = [v.valuation() for v in diff.coeffs.values()]
    ring = diff.ring if isinstance(diff, EllipticQExp) else diff.ctx.ring
    return min(vals) if vals else ring.N
