"""Exact coefficient field for the operator engine.

Elements are rational functions of ``x1..xN`` extended by the radicals

    r  = sqrt(sum x_i^2)
    r1 = sqrt(sum (x_i - alpha)^2)
    r2 = sqrt(sum (x_i + alpha)^2)
    w  = sqrt(N)

and by the imaginary unit.  A numerator is stored as a map from a radical
word (a bit mask, every exponent 0 or 1) to a polynomial with rational
coefficients.  The imaginary unit is carried as one more word bit with the
rewrite ``i*i -> -1``; see :class:`Scalar` for the user-facing complex view.

Denominators are rationalized: ``1/r`` is stored as ``r / r^2``.  The only
denominator factors are the irreducible polynomials ``r^2``, ``r1^2``,
``r2^2`` and ``(x_i - x_j)`` for ``i < j``.  After every operation the
common factors of numerator and denominator are cancelled by exact trial
division, which makes the reduced form unique (the numerator coefficients
of the radical basis are polynomials, and a factor cancels iff it divides
all of them).  Equality is therefore structural.

Rewrite order used by :meth:`CoeffField.canonicalize` and multiplication:
imaginary unit first, then ``w``, ``r``, ``r1``, ``r2``; each squared radical
is replaced by its polynomial value.  The relations form a Groebner basis,
so the order does not change the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import flint
from flint.utils.flint_exceptions import DomainError

R_BIT, R1_BIT, R2_BIT, W_BIT, I_BIT = 1, 2, 4, 8, 16
RADICAL_BITS = (R_BIT, R1_BIT, R2_BIT)
# denominator slots 0,1,2 hold the exponents of r^2, r1^2, r2^2
N_RADICAL_SLOTS = 3


class CoincidentCoordinatesError(ValueError):
    """A factor (x_i - x_j) of the denominator vanishes at the point."""


class OriginError(ValueError):
    """A radical in the denominator vanishes at the point."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, flint.fmpq):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class Scalar:
    """Exact complex rational ``re + i*im``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def coerce(cls, value) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(_frac(value), Fraction(0))

    def __add__(self, other):
        other = Scalar.coerce(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        other = Scalar.coerce(other)
        return Scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Scalar.coerce(other)
        den = other.re**2 + other.im**2
        if den == 0:
            raise ZeroDivisionError("division by zero Scalar")
        return self * Scalar(other.re / den, -other.im / den)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"


Scalar.I = Scalar(0, 1)


class RadicalWord(NamedTuple):
    e_r: int = 0
    e_r1: int = 0
    e_r2: int = 0
    e_w: int = 0

    @property
    def mask(self) -> int:
        return (
            R_BIT * self.e_r + R1_BIT * self.e_r1 + R2_BIT * self.e_r2 + W_BIT * self.e_w
        )

    @classmethod
    def from_mask(cls, mask: int) -> "RadicalWord":
        return cls(
            int(bool(mask & R_BIT)),
            int(bool(mask & R1_BIT)),
            int(bool(mask & R2_BIT)),
            int(bool(mask & W_BIT)),
        )


class DenomWord(NamedTuple):
    """Denominator exponents: ``r^d_r r1^d_r1 r2^d_r2 prod (x_i-x_j)^m_ij``.

    ``d_r, d_r1, d_r2`` are always even in reduced form.
    """

    d_r: int
    d_r1: int
    d_r2: int
    m: dict


class CoeffField:
    """Context shared by all coefficients over ``N`` coordinates.

    ``alpha`` is the per-coordinate half separation of the two Coulomb
    centres, so the centres sit at ``x_i = +-alpha``.  With ``alpha == 0`` the
    radicals ``r1`` and ``r2`` coincide with ``r`` and are mapped onto it.
    """

    def __init__(self, N: int, alpha=0):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.alpha = _frac(alpha)
        self.names = tuple(f"x{i + 1}" for i in range(N))
        self.ctx = flint.fmpq_mpoly_ctx.get(self.names, "deglex")
        self.xs = self.ctx.gens()
        self.pzero = self.ctx.constant(0)
        self.pone = self.ctx.constant(1)
        self.pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
        self.pair_slot = {p: N_RADICAL_SLOTS + k for k, p in enumerate(self.pairs)}
        self.nslots = N_RADICAL_SLOTS + len(self.pairs)
        self.den_one = (0,) * self.nslots

        al = flint.fmpq(self.alpha.numerator, self.alpha.denominator)
        R0 = sum((x * x for x in self.xs), self.pzero)
        R1 = sum(((x - al) * (x - al) for x in self.xs), self.pzero)
        R2 = sum(((x + al) * (x + al) for x in self.xs), self.pzero)
        self.two_center = self.alpha != 0
        self.factor_polys = [R0, R1, R2] + [self.xs[i] - self.xs[j] for i, j in self.pairs]
        # half-gradients of the radicands: d_i(rho^2)/2
        self._half_grad = {
            R_BIT: [x for x in self.xs],
            R1_BIT: [x - al for x in self.xs],
            R2_BIT: [x + al for x in self.xs],
        }
        self._radical_slot = {R_BIT: 0, R1_BIT: 1, R2_BIT: 2}
        self._factor_grad = [
            [f.derivative(i) for i in range(N)] for f in self.factor_polys
        ]
        # factors depending on x_i: radicands always, pairs only if i is in the pair
        self._slots_with = [
            [0, 1, 2] + [self.pair_slot[p] for p in self.pairs if i in p] for i in range(N)
        ]
        root = math.isqrt(N)
        self.sqrtN = root if root * root == N else None
        rel = {R_BIT: R0, R1_BIT: R1, R2_BIT: R2, W_BIT: self.ctx.constant(N), I_BIT: -self.pone}
        self._relprod = {}
        for mask in range(32):
            prod = self.pone
            for bit, val in rel.items():
                if mask & bit:
                    prod = prod * val
            self._relprod[mask] = prod
        self._pow_cache: dict = {}
        self.zero = RatCoeff(self, {}, self.den_one)
        self.one = RatCoeff(self, {0: self.pone}, self.den_one)

    def __repr__(self):
        return f"CoeffField(N={self.N}, alpha={self.alpha})"

    # ------------------------------------------------------------------
    # constructors

    def const(self, value) -> "RatCoeff":
        s = Scalar.coerce(value)
        num = {}
        if s.re:
            num[0] = self.ctx.constant(flint.fmpq(s.re.numerator, s.re.denominator))
        if s.im:
            num[I_BIT] = self.ctx.constant(flint.fmpq(s.im.numerator, s.im.denominator))
        return RatCoeff(self, num, self.den_one)

    def from_poly(self, poly, word: int = 0) -> "RatCoeff":
        if poly.is_zero():
            return self.zero
        return RatCoeff(self, {word: poly}, self.den_one)

    def x(self, i: int) -> "RatCoeff":
        """Coordinate ``x_{i+1}`` (0-based index)."""
        return self.from_poly(self.xs[i])

    def sum_x(self) -> "RatCoeff":
        return self.from_poly(sum(self.xs, self.pzero))

    def radius_sq(self) -> "RatCoeff":
        return self.from_poly(self.factor_polys[0])

    def _radical(self, bit: int) -> "RatCoeff":
        if bit in (R1_BIT, R2_BIT) and not self.two_center:
            bit = R_BIT
        return RatCoeff(self, {bit: self.pone}, self.den_one)

    def r(self):
        return self._radical(R_BIT)

    def r1(self):
        return self._radical(R1_BIT)

    def r2(self):
        return self._radical(R2_BIT)

    def w(self):
        if self.sqrtN is not None:
            return self.const(self.sqrtN)
        return RatCoeff(self, {W_BIT: self.pone}, self.den_one)

    def imag(self):
        return RatCoeff(self, {I_BIT: self.pone}, self.den_one)

    def inv_radical(self, which: str = "r") -> "RatCoeff":
        """``1/r``, ``1/r1`` or ``1/r2``: stored as ``rho / rho^2``."""
        bit = {"r": R_BIT, "r1": R1_BIT, "r2": R2_BIT}[which]
        if bit != R_BIT and not self.two_center:
            bit = R_BIT
        den = list(self.den_one)
        den[self._radical_slot[bit]] = 1
        return RatCoeff(self, {bit: self.pone}, tuple(den))

    def inv_pair(self, i: int, j: int) -> "RatCoeff":
        """``1/(x_i - x_j)`` for 0-based ``i != j``."""
        if i == j:
            raise ValueError("coincident indices")
        sign = 1
        if i > j:
            i, j = j, i
            sign = -1
        den = list(self.den_one)
        den[self.pair_slot[(i, j)]] = 1
        return RatCoeff(self, {0: self.pone * sign}, tuple(den))

    def canonicalize(self, terms: Iterable) -> "RatCoeff":
        """Reduce a formal sum of monomials with arbitrary radical powers.

        ``terms`` yields ``(coeff, monomial_exponents, radical_exponents)`` where
        ``radical_exponents = (e_r, e_r1, e_r2, e_w)`` may exceed one.
        """
        acc = self.zero
        for coeff, mono, rad in terms:
            mono = tuple(mono)
            term = self.from_poly(self.ctx.term(mono, 1)) if any(mono) else self.one
            for base, e in zip((self.r(), self.r1(), self.r2(), self.w()), rad):
                if e:
                    term = term * base**e
            acc = acc + term * self.const(coeff)
        return acc

    # ------------------------------------------------------------------
    # internal numerator machinery; a numerator is dict[word] -> poly

    def _factor_pow(self, slot: int, e: int):
        key = (slot, e)
        got = self._pow_cache.get(key)
        if got is None:
            got = self.factor_polys[slot] ** e
            self._pow_cache[key] = got
        return got

    def _cofactor(self, den, target):
        prod = None
        for slot, (a, b) in enumerate(zip(den, target)):
            if b > a:
                p = self._factor_pow(slot, b - a)
                prod = p if prod is None else prod * p
        return prod

    def _mul_num(self, n1: dict, n2: dict) -> dict:
        out: dict = {}
        relprod = self._relprod
        for u, p in n1.items():
            for v, q in n2.items():
                common = u & v
                t = p * q
                if common:
                    t = t * relprod[common]
                k = u ^ v
                prev = out.get(k)
                out[k] = t if prev is None else prev + t
        return out

    def _normalize(self, num: dict, den) -> "RatCoeff":
        num = {k: v for k, v in num.items() if not v.is_zero()}
        if not num:
            return self.zero
        if any(den):
            den = list(den)
            polys = sorted(num.items(), key=lambda kv: len(kv[1]))
            for slot, e in enumerate(den):
                while e:
                    f = self.factor_polys[slot]
                    try:
                        divided = [(k, p / f) for k, p in polys]
                    except DomainError:
                        break
                    polys = divided
                    e -= 1
                den[slot] = e
            num = dict(polys)
            den = tuple(den)
        return RatCoeff(self, num, den)

    def sum_raw(self, parts) -> "RatCoeff":
        """Sum of unnormalized ``(num, den)`` pairs, reduced once at the end."""
        parts = [p for p in parts if p[0]]
        if not parts:
            return self.zero
        if len(parts) == 1:
            return self._normalize(*parts[0])
        target = tuple(max(col) for col in zip(*(d for _, d in parts)))
        out: dict = {}
        for num, den in parts:
            cof = self._cofactor(den, target)
            for k, p in num.items():
                t = p if cof is None else p * cof
                prev = out.get(k)
                out[k] = t if prev is None else prev + t
        return self._normalize(out, target)

    def fsum(self, coeffs: Iterable["RatCoeff"]) -> "RatCoeff":
        return self.sum_raw([(c.num, c.den) for c in coeffs])


class RatCoeff:
    """Immutable element of :class:`CoeffField` in reduced form."""

    __slots__ = ("field", "num", "den", "_hash")

    def __init__(self, field: CoeffField, num: dict, den: tuple):
        self.field = field
        self.num = num
        self.den = den
        self._hash = None

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return not any(self.den)

    def __eq__(self, other):
        if not isinstance(other, RatCoeff):
            if isinstance(other, (int, Fraction, Scalar, complex)):
                other = self.field.const(other)
            else:
                return NotImplemented
        if self.den != other.den or self.num.keys() != other.num.keys():
            return False
        return all(self.num[k] == other.num[k] for k in self.num)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.serialize())
        return self._hash

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "RatCoeff":
        if isinstance(other, RatCoeff):
            return other
        return self.field.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        return self.field.sum_raw([(self.num, self.den), (other.num, other.den)])

    __radd__ = __add__

    def __neg__(self):
        return RatCoeff(self.field, {k: -v for k, v in self.num.items()}, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def mul_raw(self, other: "RatCoeff"):
        """Product as an unnormalized ``(num, den)`` pair."""
        num = self.field._mul_num(self.num, other.num)
        den = tuple(a + b for a, b in zip(self.den, other.den))
        return num, den

    def __mul__(self, other):
        if not isinstance(other, RatCoeff):
            if isinstance(other, (int, Fraction)):
                if other == 0:
                    return self.field.zero
                c = flint.fmpq(Fraction(other).numerator, Fraction(other).denominator)
                return RatCoeff(self.field, {k: v * c for k, v in self.num.items()}, self.den)
            other = self._coerce(other)
        if not self.num or not other.num:
            return self.field.zero
        num, den = self.mul_raw(other)
        return self.field._normalize(num, den)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not closed in this field")
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- calculus and group action ---------------------------------------
    def differentiate(self, i: int) -> "RatCoeff":
        """Exact partial derivative with respect to ``x_{i+1}``."""
        fld = self.field
        if not self.num:
            return fld.zero
        slots = set(s for s in fld._slots_with[i] if self.den[s])
        for word in self.num:
            for bit in RADICAL_BITS:
                if word & bit:
                    slots.add(fld._radical_slot[bit])
        slots = sorted(slots)
        if not slots:
            num = {k: p.derivative(i) for k, p in self.num.items()}
            return fld._normalize(num, self.den)
        # cof[s] = product of the new factors except s
        polys = {s: fld.factor_polys[s] for s in slots}
        total = fld.pone
        for s in slots:
            total = total * polys[s]
        cof = {s: total / polys[s] for s in slots}
        out: dict = {}

        def acc(k, t):
            prev = out.get(k)
            out[k] = t if prev is None else prev + t

        for word, p in self.num.items():
            acc(word, p.derivative(i) * total)
            for bit in RADICAL_BITS:
                if word & bit:
                    s = fld._radical_slot[bit]
                    acc(word, p * fld._half_grad[bit][i] * cof[s])
            for s in slots:
                e = self.den[s]
                if e:
                    acc(word, -(p * fld._factor_grad[s][i] * cof[s] * e))
        den = list(self.den)
        for s in slots:
            den[s] += 1
        return fld._normalize(out, tuple(den))

    def permute(self, perm: tuple) -> "RatCoeff":
        """Action ``(sigma c)(x) = c(x_{perm[0]}, ..., x_{perm[N-1]})``."""
        fld = self.field
        if not self.num:
            return self
        xs = fld.xs
        args = [xs[k] for k in perm]
        sign = 1
        den = list(self.den)
        if len(fld.pairs):
            for slot in range(N_RADICAL_SLOTS, fld.nslots):
                den[slot] = 0
            for (a, b), slot in fld.pair_slot.items():
                e = self.den[slot]
                if not e:
                    continue
                pa, pb = perm[a], perm[b]
                if pa > pb:
                    pa, pb = pb, pa
                    if e & 1:
                        sign = -sign
                den[fld.pair_slot[(pa, pb)]] = e
        num = {k: p.compose(*args) for k, p in self.num.items()}
        if sign < 0:
            num = {k: -p for k, p in num.items()}
        return RatCoeff(fld, num, tuple(den))

    # -- inspection -------------------------------------------------------
    @property
    def denom(self) -> DenomWord:
        fld = self.field
        m = {
            (i + 1, j + 1): self.den[slot]
            for (i, j), slot in fld.pair_slot.items()
            if self.den[slot]
        }
        return DenomWord(2 * self.den[0], 2 * self.den[1], 2 * self.den[2], m)

    def terms(self):
        """Yield ``(monomial, RadicalWord, Scalar)`` in canonical order."""
        collected: dict = {}
        for word, p in self.num.items():
            base = word & ~I_BIT
            imag = bool(word & I_BIT)
            for mono, c in p.to_dict().items():
                key = (tuple(mono), base)
                re, im = collected.get(key, (Fraction(0), Fraction(0)))
                c = _frac(c)
                if imag:
                    im += c
                else:
                    re += c
                collected[key] = (re, im)

        def order(key):
            mono, base = key
            return (-sum(mono), tuple(-e for e in mono), base)

        for key in sorted(collected, key=order):
            re, im = collected[key]
            yield key[0], RadicalWord.from_mask(key[1]), Scalar(re, im)

    def serialize(self) -> str:
        fld = self.field
        if not self.num:
            return "0"
        parts = []
        for mono, word, coeff in self.terms():
            factors = [f"{fld.names[k]}^{e}" if e > 1 else fld.names[k] for k, e in enumerate(mono) if e]
            for name, e in zip(("r", "r1", "r2", "w"), word):
                if e:
                    factors.append(name)
            parts.append(" * ".join([str(coeff)] + factors))
        text = " + ".join(parts)
        dw = self.denom
        dens = [f"{n}^{e}" for n, e in zip(("r", "r1", "r2"), dw[:3]) if e]
        dens += [
            f"(x{i}-x{j})^{e}" if e > 1 else f"(x{i}-x{j})"
            for (i, j), e in sorted(dw.m.items())
        ]
        if dens:
            return f"({text}) / ({' '.join(dens)})"
        return text

    def __repr__(self):
        return f"RatCoeff({self.serialize()})"

    __str__ = serialize

    # -- numerics -----------------------------------------------------------
    def evaluate(self, point) -> complex:
        """IEEE evaluation at a real point; radicals are taken positive."""
        fld = self.field
        point = [float(v) for v in point]
        if len(point) != fld.N:
            raise ValueError(f"expected {fld.N} coordinates")
        args = [flint.fmpq(Fraction(v).numerator, Fraction(v).denominator) for v in point]
        al = float(fld.alpha)
        rad = {
            R_BIT: math.sqrt(sum(v * v for v in point)),
            R1_BIT: math.sqrt(sum((v - al) ** 2 for v in point)),
            R2_BIT: math.sqrt(sum((v + al) ** 2 for v in point)),
            W_BIT: math.sqrt(fld.N),
        }
        den = 1.0
        for slot, bit in enumerate(RADICAL_BITS):
            e = self.den[slot]
            if e:
                if rad[bit] == 0.0:
                    raise OriginError("radical vanishes in a denominator")
                den *= rad[bit] ** (2 * e)
        for (a, b), slot in fld.pair_slot.items():
            e = self.den[slot]
            if e:
                d = point[a] - point[b]
                if d == 0.0:
                    raise CoincidentCoordinatesError(f"x{a + 1} == x{b + 1}")
                den *= d**e
        total = 0j
        for word, p in self.num.items():
            val = float(p(*args)) if fld.N else float(p)
            for bit, rv in rad.items():
                if word & bit:
                    val *= rv
            total += val * (1j if word & I_BIT else 1.0)
        return total / den


@lru_cache(maxsize=None)
def field_for(N: int, alpha=Fraction(0)) -> CoeffField:
    """Shared field instance per ``(N, alpha)``."""
    return CoeffField(N, alpha)
