"""Exact arithmetic in K = F_{p^f}((pi)) with pi = t^(1/e).

Elements are truncated Laurent series with an absolute precision cap:
terms with pi-exponent >= prec are unknown.  Coefficients live in a
finite field F_{p^f} presented by a deterministic irreducible modulus,
so every run of the toolkit sees the same residue arithmetic.

Valuations are reported in t-units (val(t) = 1, val(pi) = 1/e) so they
do not move under ramified base change; tree levels and the internal
exponent dictionaries use pi-units, which are plain integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, inf

from .errors import (
    DivisionByZeroToPrecision,
    ExtensionRequired,
    MumfordError,
    ParamsMismatch,
)

# Absolute pi-adic precision used when an operation on exact inputs is
# forced to truncate (series inversion, Artin-Schreier solving).
DEFAULT_PREC = 64

_TABLE_CAP = 4096  # largest residue field size we build log tables for


# ----------------------------------------------------------------------
# residue field F_{p^f}
# ----------------------------------------------------------------------

def _poly_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a, b, mod, p):
    # mod is monic of degree f, little-endian; a, b have degree < f
    f = len(mod) - 1
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    for k in range(len(out) - 1, f - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            for j in range(f):
                out[k - f + j] = (out[k - f + j] - c * mod[j]) % p
    return _poly_trim(out)


def _poly_powmod(a, n, mod, p):
    result = [1]
    base = list(a)
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        n >>= 1
    return result


def _poly_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        # a mod b
        inv_lead = pow(b[-1], p - 2, p)
        while len(a) >= len(b) and a:
            c = (a[-1] * inv_lead) % p
            shift = len(a) - len(b)
            for j in range(len(b)):
                a[shift + j] = (a[shift + j] - c * b[j]) % p
            _poly_trim(a)
        a, b = b, a
    return a


def _prime_divisors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_irreducible(mod, p):
    f = len(mod) - 1
    x = [0, 1]
    # x^(p^f) == x mod m, and x^(p^(f/l)) - x coprime to m for prime l | f
    t = x
    for _ in range(f):
        t = _poly_powmod(t, p, mod, p)
    if _poly_trim([(t[i] if i < len(t) else 0) - (x[i] if i < len(x) else 0)
                   for i in range(max(len(t), len(x)))]) != []:
        return False
    for ell in _prime_divisors(f):
        t = x
        for _ in range(f // ell):
            t = _poly_powmod(t, p, mod, p)
        diff = [( (t[i] if i < len(t) else 0) - (x[i] if i < len(x) else 0)) % p
                for i in range(max(len(t), len(x)))]
        g = _poly_gcd(mod, _poly_trim(diff), p)
        if len(g) - 1 > 0:
            return False
    return True


def deterministic_modulus(p: int, f: int):
    """First monic irreducible of degree f over F_p in lexicographic
    order of the constant-first coefficient tuple.  Returns the full
    coefficient list [c_0, ..., c_{f-1}, 1]."""
    if f == 1:
        return [0, 1]  # x, i.e. the prime field itself
    for code in range(p ** f):
        coeffs, c = [], code
        for _ in range(f):
            coeffs.append(c % p)
            c //= p
        mod = coeffs + [1]
        if _is_irreducible(mod, p):
            return mod
    raise MumfordError(f"no irreducible modulus found for p={p}, f={f}")


class FiniteField:
    """F_{p^f} with elements encoded as ints in [0, p^f).

    The encoding is little-endian base p over the power basis of the
    deterministic modulus.  Multiplication goes through discrete
    exp/log tables, so q is capped at a few thousand; that covers every
    residue field this toolkit has a reason to touch.
    """

    def __init__(self, p: int, f: int):
        q = p ** f
        if q > _TABLE_CAP:
            raise MumfordError(f"residue field size {q} exceeds table cap {_TABLE_CAP}")
        self.p = p
        self.f = f
        self.q = q
        self.modulus = deterministic_modulus(p, f)
        self._build_tables()

    # encoding helpers
    def _decode(self, a: int):
        digits = []
        for _ in range(self.f):
            digits.append(a % self.p)
            a //= self.p
        return digits

    def _encode(self, digits) -> int:
        a = 0
        for d in reversed(digits):
            a = a * self.p + (d % self.p)
        return a

    def _build_tables(self):
        p, f, q = self.p, self.f, self.q
        mod = self.modulus
        # raw multiplication used only while bootstrapping the tables
        def raw_mul(a, b):
            prod = _poly_mulmod(self._decode(a), self._decode(b), mod, p)
            return self._encode(prod + [0] * (f - len(prod)))
        # find the first primitive element
        target = q - 1
        divisors = _prime_divisors(target)
        def order_ok(g):
            for ell in divisors:
                e = target // ell
                acc, base, n = 1, g, e
                while n:
                    if n & 1:
                        acc = raw_mul(acc, base)
                    base = raw_mul(base, base)
                    n >>= 1
                if acc == 1:
                    return False
            return True
        gen = next(g for g in range(1, q) if order_ok(g))
        self.generator = gen
        exp = [1] * (2 * target)
        log = [0] * q
        acc = 1
        for k in range(target):
            exp[k] = acc
            log[acc] = k
            acc = raw_mul(acc, gen)
        for k in range(target, 2 * target):
            exp[k] = exp[k - target]
        self._exp, self._log = exp, log

    # arithmetic on encoded elements
    def add(self, a: int, b: int) -> int:
        if self.f == 1:
            return (a + b) % self.p
        da, db = self._decode(a), self._decode(b)
        return self._encode([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        if self.f == 1:
            return (-a) % self.p
        return self._encode([(-x) % self.p for x in self._decode(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in residue field")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def pow_(self, a: int, n: int) -> int:
        if a == 0:
            if n == 0:
                return 1
            if n < 0:
                raise ZeroDivisionError("negative power of zero")
            return 0
        return self._exp[(self._log[a] * n) % (self.q - 1)]

    def frobenius(self, a: int) -> int:
        return self.pow_(a, self.p)

    def pth_root(self, a: int) -> int:
        # Frobenius is bijective: the p-th root is the (f-1)-fold Frobenius.
        return self.pow_(a, self.p ** (self.f - 1)) if a else 0

    def trace(self, a: int) -> int:
        acc, t = 0, a
        for _ in range(self.f):
            acc = self.add(acc, t)
            t = self.frobenius(t)
        return acc

    def artin_schreier_root(self, c: int):
        """Smallest y (in encoding order) with y^p - y = c, or None."""
        for y in range(self.q):
            if self.sub(self.pow_(y, self.p), y) == c:
                return y
        return None

    def from_int(self, n: int) -> int:
        return n % self.p

    def element_repr(self, a: int) -> str:
        if self.f == 1:
            return str(a)
        digits = self._decode(a)
        parts = []
        for k, d in enumerate(digits):
            if d == 0:
                continue
            if k == 0:
                parts.append(str(d))
            else:
                head = "" if d == 1 else f"{d}*"
                parts.append(f"{head}g" + (f"^{k}" if k > 1 else ""))
        return "+".join(parts) if parts else "0"

    def coeff_vector(self, a: int):
        return self._decode(a)

    def from_coeff_vector(self, digits) -> int:
        if len(digits) > self.f:
            if any(d % self.p for d in digits[self.f:]):
                raise MumfordError("coefficient vector longer than residue degree")
            digits = digits[: self.f]
        digits = list(digits) + [0] * (self.f - len(digits))
        return self._encode(digits)


@lru_cache(maxsize=None)
def residue_field(p: int, f: int) -> FiniteField:
    return FiniteField(p, f)


@lru_cache(maxsize=None)
def embedding_map(p: int, f_small: int, f_big: int):
    """Map encodings of F_{p^f_small} into F_{p^f_big}, f_small | f_big.

    The image of the small generator is the first root (in encoding
    order) of the small modulus inside the big field, so the embedding
    is deterministic and reproducible.
    """
    if f_big % f_small:
        raise MumfordError("residue degree must divide the target degree")
    small, big = residue_field(p, f_small), residue_field(p, f_big)
    if f_small == 1:
        return tuple(big.from_int(a) for a in range(small.q))
    mod = small.modulus
    root = None
    for cand in range(big.q):
        acc, power = 0, 1
        for coeff in mod:
            if coeff:
                acc = big.add(acc, big.mul(big.from_int(coeff), power))
            power = big.mul(power, cand)
        if acc == 0:
            root = cand
            break
    if root is None:
        raise MumfordError("modulus has no root in the target field")
    table = []
    for a in range(small.q):
        digits = small.coeff_vector(a)
        acc, power = 0, 1
        for d in digits:
            if d:
                acc = big.add(acc, big.mul(big.from_int(d), power))
            power = big.mul(power, root)
        table.append(acc)
    return tuple(table)


# ----------------------------------------------------------------------
# field parameters and valuations
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FieldParams:
    """Ground data of K = F_{p^f}((pi)), pi = t^(1/e)."""

    p: int
    f: int = 1
    e: int = 1

    def __post_init__(self):
        if self.p < 2 or any(self.p % d == 0 for d in range(2, self.p)):
            raise MumfordError(f"p={self.p} is not prime")
        if self.f < 1 or self.e < 1:
            raise MumfordError("f and e must be positive")

    @property
    def ff(self) -> FiniteField:
        return residue_field(self.p, self.f)

    def extension(self, e2: int = 1, f2: int = 1) -> "FieldParams":
        return FieldParams(self.p, self.f * f2, self.e * e2)

    def to_json(self):
        mod = self.ff.modulus if self.f > 1 else None
        return {"p": self.p, "f": self.f, "e": self.e, "modulus": mod}


class Valu:
    """A valuation in t-units: a rational with denominator dividing e,
    or an infinity.  +inf is the valuation of zero; -inf only ever
    reports an unbounded supremum norm."""

    __slots__ = ("value",)

    def __init__(self, value):
        if isinstance(value, Valu):
            value = value.value
        if value in (inf, -inf):
            self.value = value
        else:
            self.value = Fraction(value)

    @classmethod
    def infinite(cls) -> "Valu":
        return cls(inf)

    @classmethod
    def neg_infinite(cls) -> "Valu":
        return cls(-inf)

    @property
    def is_infinite(self) -> bool:
        return self.value in (inf, -inf)

    def __eq__(self, other):
        other = other.value if isinstance(other, Valu) else other
        return self.value == other

    def __lt__(self, other):
        other = other.value if isinstance(other, Valu) else other
        return self.value < other

    def __le__(self, other):
        other = other.value if isinstance(other, Valu) else other
        return self.value <= other

    def __gt__(self, other):
        return not self.__le__(other)

    def __ge__(self, other):
        return not self.__lt__(other)

    def __hash__(self):
        return hash(self.value)

    def __add__(self, other):
        other = other.value if isinstance(other, Valu) else other
        if self.value in (inf, -inf) or other in (inf, -inf):
            s = (self.value if self.value in (inf, -inf) else 0) + \
                (other if other in (inf, -inf) else 0)
            return Valu(s)
        return Valu(self.value + other)

    def __neg__(self):
        return Valu(-self.value)

    def __sub__(self, other):
        other = other if isinstance(other, Valu) else Valu(other)
        return self + (-other)

    def __mul__(self, n: int):
        if self.value in (inf, -inf):
            if n == 0:
                raise MumfordError("0 * infinite valuation")
            return Valu(self.value if n > 0 else -self.value)
        return Valu(self.value * n)

    __rmul__ = __mul__

    def __repr__(self):
        if self.value == inf:
            return "Valu(+inf)"
        if self.value == -inf:
            return "Valu(-inf)"
        return f"Valu({self.value})"

    def to_json(self):
        if self.value == inf:
            return "inf"
        if self.value == -inf:
            return "-inf"
        return [self.value.numerator, self.value.denominator]


# ----------------------------------------------------------------------
# Laurent elements
# ----------------------------------------------------------------------

class LaurentElem:
    """A truncated Laurent series sum_k c_k pi^k over F_{p^f}.

    terms maps pi-exponents to nonzero encoded coefficients; exponents
    at or beyond prec are unknown and never stored.  prec None means
    the element is exact.
    """

    __slots__ = ("params", "terms", "prec")

    def __init__(self, params: FieldParams, terms=None, prec=None):
        self.params = params
        self.prec = prec
        cleaned = {}
        if terms:
            for k, c in terms.items():
                if c and (prec is None or k < prec):
                    cleaned[k] = c
        self.terms = cleaned

    # ---- constructors ----

    @classmethod
    def zero(cls, params, prec=None):
        return cls(params, {}, prec)

    @classmethod
    def one(cls, params, prec=None):
        return cls(params, {0: 1}, prec)

    @classmethod
    def from_int(cls, params, n: int, prec=None):
        return cls(params, {0: params.ff.from_int(n)}, prec)

    @classmethod
    def monomial(cls, params, coeff: int, exp: int, prec=None):
        return cls(params, {exp: coeff}, prec)

    @classmethod
    def t_power(cls, params, k: int, prec=None):
        """t^k as an element, i.e. pi^(k*e)."""
        return cls(params, {k * params.e: 1}, prec)

    @classmethod
    def from_t_poly(cls, params, coeffs: dict, prec=None):
        """Build from a map {t-exponent: integer coefficient}."""
        ff = params.ff
        return cls(params, {k * params.e: ff.from_int(c) for k, c in coeffs.items()}, prec)

    # ---- basic queries ----

    def is_zero(self) -> bool:
        """Zero at the stored precision."""
        return not self.terms

    def is_exact(self) -> bool:
        return self.prec is None

    def min_exp(self):
        """Smallest known pi-exponent, or None for (apparent) zero."""
        return min(self.terms) if self.terms else None

    def valuation(self) -> Valu:
        """t-normalized valuation; zero reports its precision cap."""
        if self.terms:
            return Valu(Fraction(min(self.terms), self.params.e))
        if self.prec is None:
            return Valu.infinite()
        return Valu(Fraction(self.prec, self.params.e))

    def leading_coeff(self) -> int:
        if not self.terms:
            raise DivisionByZeroToPrecision("leading coefficient of zero")
        return self.terms[self.min_exp()]

    def coeff(self, k: int) -> int:
        return self.terms.get(k, 0)

    def __bool__(self):
        return bool(self.terms)

    # ---- structural helpers ----

    def _check(self, other: "LaurentElem"):
        if self.params != other.params:
            raise ParamsMismatch(f"{self.params} vs {other.params}")

    def truncate(self, prec) -> "LaurentElem":
        newp = prec if self.prec is None else min(self.prec, prec)
        return LaurentElem(self.params, self.terms, newp)

    def shift(self, k: int) -> "LaurentElem":
        newp = None if self.prec is None else self.prec + k
        return LaurentElem(self.params, {e + k: c for e, c in self.terms.items()}, newp)

    def scale(self, coeff: int) -> "LaurentElem":
        ff = self.params.ff
        if coeff == 0:
            return LaurentElem.zero(self.params, self.prec)
        return LaurentElem(self.params, {e: ff.mul(c, coeff) for e, c in self.terms.items()},
                           self.prec)

    def __eq__(self, other):
        if not isinstance(other, LaurentElem):
            return NotImplemented
        return (self.params == other.params and self.terms == other.terms
                and self.prec == other.prec)

    def __hash__(self):
        return hash((self.params, tuple(sorted(self.terms.items())), self.prec))

    def same_to_prec(self, other: "LaurentElem") -> bool:
        """Equality up to the coarser of the two precisions."""
        return (self - other).is_zero()

    # ---- ring operations ----

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentElem.from_int(self.params, other)
        self._check(other)
        ff = self.params.ff
        prec = _min_prec(self.prec, other.prec)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = ff.add(out.get(k, 0), c)
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentElem(self.params, out, prec)

    __radd__ = __add__

    def __neg__(self):
        ff = self.params.ff
        return LaurentElem(self.params, {k: ff.neg(c) for k, c in self.terms.items()},
                           self.prec)

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentElem.from_int(self.params, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(self.params.ff.from_int(other))
        self._check(other)
        prec = _mul_prec(self, other)
        if not self.terms or not other.terms:
            return LaurentElem.zero(self.params, prec)
        if len(self.terms) * len(other.terms) <= 256:
            ff = self.params.ff
            out = {}
            for i, a in self.terms.items():
                for j, b in other.terms.items():
                    k = i + j
                    if prec is not None and k >= prec:
                        continue
                    s = ff.add(out.get(k, 0), ff.mul(a, b))
                    if s:
                        out[k] = s
                    else:
                        del out[k]
            return LaurentElem(self.params, out, prec)
        return _mul_dense(self, other, prec)

    __rmul__ = __mul__

    def inverse(self, prec=None) -> "LaurentElem":
        """Multiplicative inverse to absolute precision.

        The natural cap is prec(self) - 2 val(self); an explicit prec
        lowers (never raises) it.  Exact single-term elements invert
        exactly.
        """
        if not self.terms:
            raise DivisionByZeroToPrecision("inverse of zero to precision")
        ff = self.params.ff
        v = self.min_exp()
        if len(self.terms) == 1 and self.prec is None and prec is None:
            return LaurentElem(self.params, {-v: ff.inv(self.terms[v])}, None)
        natural = None if self.prec is None else self.prec - 2 * v
        target = _min_prec(natural, prec)
        if target is None:
            target = -v + DEFAULT_PREC
        rel = target + v  # relative precision of the unit part
        if rel <= 0:
            raise DivisionByZeroToPrecision("no significant digits left for inverse")
        # dense inversion of the unit part u = self / (lead pi^v)
        n = rel
        a = [0] * n
        for k, c in self.terms.items():
            if k - v < n:
                a[k - v] = c
        b = [0] * n
        b[0] = ff.inv(a[0])
        if self.params.f == 1:
            p = self.params.p
            inv0 = b[0]
            for m in range(1, n):
                acc = 0
                for j in range(1, m + 1):
                    if a[j]:
                        acc += a[j] * b[m - j]
                b[m] = (-inv0 * acc) % p
        else:
            for m in range(1, n):
                acc = 0
                for j in range(1, m + 1):
                    if a[j] and b[m - j]:
                        acc = ff.add(acc, ff.mul(a[j], b[m - j]))
                b[m] = ff.neg(ff.mul(b[0], acc))
        out = {k - v: c for k, c in enumerate(b) if c}
        return LaurentElem(self.params, out, target)

    def div(self, other: "LaurentElem", prec=None) -> "LaurentElem":
        if isinstance(other, int):
            other = LaurentElem.from_int(self.params, other)
        self._check(other)
        if not other.terms:
            raise DivisionByZeroToPrecision("division by zero to precision")
        if self.is_zero():
            v = other.min_exp()
            zprec = _min_prec(None if self.prec is None else self.prec - v, prec)
            return LaurentElem.zero(self.params, zprec)
        inv_prec = None
        if prec is not None:
            inv_prec = prec - self.min_exp()
        return self * other.inverse(inv_prec)

    def __truediv__(self, other):
        return self.div(other)

    def __pow__(self, n: int):
        if n == 0:
            return LaurentElem.one(self.params)
        base = self if n > 0 else self.inverse()
        n = abs(n)
        acc = None
        while n:
            if n & 1:
                acc = base if acc is None else acc * base
            n >>= 1
            if n:
                base = base * base
        return acc

    def pth_root(self) -> "LaurentElem":
        """The p-th root, over the e' = p ramified extension.

        In characteristic p every sum of p-th powers is a p-th power
        coefficientwise: root(sum c_k pi^k) = sum c_k^(1/p) pi'^k with
        pi' = pi^(1/p).  Exponents keep their numerals but live in the
        p-fold finer group.
        """
        newpar = self.params.extension(e2=self.params.p)
        ff = newpar.ff
        terms = {k: ff.pth_root(c) for k, c in self.terms.items()}
        return LaurentElem(newpar, terms, self.prec)

    def residue(self) -> int:
        """Coefficient of pi^0 when val >= 0; the reduction to the
        residue field."""
        if self.terms and self.min_exp() < 0:
            raise MumfordError("residue of an element of negative valuation")
        return self.terms.get(0, 0)

    # ---- display ----

    def __repr__(self):
        return f"LaurentElem({self})"

    def __str__(self):
        e, ff = self.params.e, self.params.ff
        if not self.terms:
            body = "0"
        else:
            parts = []
            for k in sorted(self.terms):
                c = self.terms[k]
                cs = ff.element_repr(c)
                if k == 0:
                    parts.append(cs)
                else:
                    num, den = k, e
                    g = gcd(abs(num), den)
                    num, den = num // g, den // g
                    expo = f"{num}" if den == 1 else f"{num}/{den}"
                    var = f"t^{expo}" if expo != "1" else "t"
                    parts.append(var if cs == "1" else f"{cs}*{var}")
            body = " + ".join(parts)
        if self.prec is not None:
            g = gcd(abs(self.prec), e) if self.prec else e
            num, den = self.prec // g if self.prec else 0, e // g
            tail = f"{num}" if den == 1 else f"{num}/{den}"
            return f"{body} + O(t^{tail})"
        return body


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _mul_prec(x: LaurentElem, y: LaurentElem):
    cands = []
    if x.prec is not None:
        vy = y.min_exp()
        cands.append(x.prec + (vy if vy is not None else (y.prec or 0)))
    if y.prec is not None:
        vx = x.min_exp()
        cands.append(y.prec + (vx if vx is not None else (x.prec or 0)))
    return min(cands) if cands else None


def _mul_dense(x: LaurentElem, y: LaurentElem, prec):
    params = x.params
    vx, vy = x.min_exp(), y.min_exp()
    hx = max(x.terms) + 1
    hy = max(y.terms) + 1
    width = (hx - vx) + (hy - vy) - 1
    if prec is not None:
        width = min(width, prec - vx - vy)
        if width <= 0:
            return LaurentElem.zero(params, prec)
    a = [0] * (hx - vx)
    for k, c in x.terms.items():
        a[k - vx] = c
    b = [0] * (hy - vy)
    for k, c in y.terms.items():
        b[k - vy] = c
    out = [0] * width
    if params.f == 1:
        p = params.p
        for i, ai in enumerate(a):
            if ai:
                top = min(len(b), width - i)
                for j in range(top):
                    if b[j]:
                        out[i + j] += ai * b[j]
        terms = {}
        base = vx + vy
        for k, c in enumerate(out):
            c %= p
            if c:
                terms[base + k] = c
    else:
        ff = params.ff
        for i, ai in enumerate(a):
            if ai:
                top = min(len(b), width - i)
                for j in range(top):
                    if b[j]:
                        out[i + j] = ff.add(out[i + j], ff.mul(ai, b[j]))
        base = vx + vy
        terms = {base + k: c for k, c in enumerate(out) if c}
    return LaurentElem(params, terms, prec)


# ----------------------------------------------------------------------
# module-level operations
# ----------------------------------------------------------------------

def laurent_arith(kind: str, x: LaurentElem, y, prec=None) -> LaurentElem:
    """Dispatcher for the five ring operations; div takes a precision."""
    if kind == "add":
        return x + y
    if kind == "sub":
        return x - y
    if kind == "mul":
        return x * y
    if kind == "div":
        return x.div(y, prec)
    if kind == "pow":
        if not isinstance(y, int):
            raise MumfordError("pow exponent must be an integer")
        return x ** y
    raise MumfordError(f"unknown operation {kind!r}")


def valuation(x: LaurentElem) -> Valu:
    return x.valuation()


def artin_schreier_solve(c: LaurentElem, prec=None) -> LaurentElem:
    """Solve y^p - y = c by leading-term elimination.

    val(c) > 0: y = -(c + c^p + c^{p^2} + ...), so val(y) = val(c).
    val(c) = 0: the constant term must split in the residue field;
        otherwise the equation forces the degree-p extension (f' = p).
    val(c) < 0: the leading term needs a p-th root in the value group;
        when p does not divide the leading exponent that means e' = p.

    The residual y^p - y - c vanishes to the working precision.
    """
    params = c.params
    p = params.p
    ff = params.ff
    target = _min_prec(c.prec, prec)
    if target is None:
        target = DEFAULT_PREC
    y = LaurentElem.zero(params, target)
    work = c.truncate(target)
    while work.terms:
        m = work.min_exp()
        if m >= target:
            break
        if m > 0:
            # geometric tail: delta = -(w + w^p + w^{p^2} + ...)
            delta = LaurentElem.zero(params, target)
            powr = work
            while powr.terms and powr.min_exp() < target:
                delta = delta - powr
                powr = (powr ** p).truncate(target)
            y = y + delta
            work = (work - (delta ** p - delta)).truncate(target)
        elif m == 0:
            r = work.coeff(0)
            root = ff.artin_schreier_root(r)
            if root is None:
                raise ExtensionRequired(1, p, "residue equation y^p - y = c has no root")
            delta = LaurentElem(params, {0: root}, None)
            y = y + delta
            work = (work - (delta ** p - delta)).truncate(target)
        else:
            if m % p:
                raise ExtensionRequired(p, 1, f"leading exponent {m} has no p-th root in the value group")
            delta = LaurentElem(params, {m // p: ff.pth_root(work.terms[m])}, None)
            y = y + delta
            work = (work - (delta ** p - delta)).truncate(target)
    return y.truncate(target)


def extend_field(x: LaurentElem, e2: int = 1, f2: int = 1) -> LaurentElem:
    """Reinterpret x inside F_{p^{f f2}}((pi^(1/e2))).

    pi-exponents multiply by e2 and coefficients pass through the
    deterministic residue embedding, so t-normalized valuations do not
    move.
    """
    if e2 < 1 or f2 < 1:
        raise MumfordError("extension degrees must be positive")
    params = x.params
    newpar = params.extension(e2, f2)
    emb = embedding_map(params.p, params.f, params.f * f2)
    terms = {k * e2: emb[c] for k, c in x.terms.items()}
    prec = None if x.prec is None else x.prec * e2
    return LaurentElem(newpar, terms, prec)
