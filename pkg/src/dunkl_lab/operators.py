"""Differential-exchange operators in normal form.

An operator is a finite sum of terms ``c(x) * d^K * sigma`` where ``c`` is a
:class:`~dunkl_lab.field.RatCoeff`, ``d^K = d_1^{k_1} ... d_N^{k_N}`` and
``sigma`` is a coordinate permutation acting on functions by

    (sigma psi)(x) = psi(x_{p[0]}, ..., x_{p[N-1]}).

Conjugation rules used by the normal-ordering engine::

    sigma c        = (sigma . c) sigma
    sigma d_k      = d_{p[k]} sigma
    sigma tau      = (p o q)            with (p o q)[k] = p[q[k]]
    d^K c          = sum_J binom(K, J) (d^J c) d^{K-J}
"""

from __future__ import annotations

import contextvars
from math import comb
from typing import Callable, Iterable

from .field import CoeffField, RatCoeff, Scalar

DEFAULT_TERM_CAP = 2_000_000

_term_cap = contextvars.ContextVar("term_cap", default=DEFAULT_TERM_CAP)
_term_budget = contextvars.ContextVar("term_budget", default=None)


class TermBlowupError(RuntimeError):
    """Raised when intermediate term counts exceed the configured cap."""


class term_budget:
    """Context manager bounding the total number of intermediate products.

    >>> with term_budget(10**6) as b:
    ...     ...  # doctest: +SKIP
    >>> b.used  # doctest: +SKIP
    """

    def __init__(self, cap: int = DEFAULT_TERM_CAP):
        self.cap = cap
        self.used = 0
        self._token = None

    def charge(self, n: int):
        self.used += n
        if self.used > self.cap:
            raise TermBlowupError(f"more than {self.cap} intermediate terms")

    def __enter__(self):
        self._token = _term_budget.set(self)
        return self

    def __exit__(self, *exc):
        _term_budget.reset(self._token)
        return False


def _charge(n: int):
    budget = _term_budget.get()
    if budget is not None:
        budget.charge(n)


def compose_perm(p: tuple, q: tuple) -> tuple:
    """Permutation of the operator product ``sigma_p sigma_q``."""
    return tuple(p[k] for k in q)


def transposition(N: int, i: int, j: int) -> tuple:
    perm = list(range(N))
    perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


def _push_deriv(p: tuple, K: tuple) -> tuple:
    """Multi-index ``K'`` with ``sigma_p d^K = d^{K'} sigma_p``."""
    out = [0] * len(K)
    for k, e in enumerate(K):
        out[p[k]] = e
    return tuple(out)


def _sub_indices(K: tuple):
    """All ``J <= K`` together with the product of binomials."""
    out = [((), 1)]
    for k in K:
        out = [(J + (j,), c * comb(k, j)) for J, c in out for j in range(k + 1)]
    return out


class Operator:
    """Immutable normal-form operator over a :class:`CoeffField`."""

    __slots__ = ("field", "terms")

    def __init__(self, field: CoeffField, terms: dict | None = None):
        self.field = field
        self.terms = {k: c for k, c in (terms or {}).items() if c}

    # -- constructors -------------------------------------------------------
    @property
    def N(self) -> int:
        return self.field.N

    @property
    def _d0(self) -> tuple:
        return (0,) * self.field.N

    @property
    def _e(self) -> tuple:
        return tuple(range(self.field.N))

    @classmethod
    def zero(cls, field: CoeffField) -> "Operator":
        return cls(field)

    @classmethod
    def identity(cls, field: CoeffField) -> "Operator":
        return cls.multiplication(field, field.one)

    @classmethod
    def multiplication(cls, field: CoeffField, c) -> "Operator":
        if not isinstance(c, RatCoeff):
            c = field.const(c)
        N = field.N
        return cls(field, {((0,) * N, tuple(range(N))): c})

    @classmethod
    def partial(cls, field: CoeffField, i: int, order: int = 1) -> "Operator":
        N = field.N
        K = [0] * N
        K[i] = order
        return cls(field, {(tuple(K), tuple(range(N))): field.one})

    @classmethod
    def permutation(cls, field: CoeffField, perm: Iterable[int]) -> "Operator":
        perm = tuple(perm)
        if sorted(perm) != list(range(field.N)):
            raise ValueError(f"not a permutation of {field.N} letters: {perm}")
        return cls(field, {((0,) * field.N, perm): field.one})

    @classmethod
    def exchange(cls, field: CoeffField, i: int, j: int) -> "Operator":
        return cls.permutation(field, transposition(field.N, i, j))

    # -- linear structure --------------------------------------------------------
    def _check(self, other: "Operator"):
        if other.field is not self.field:
            if other.field.N != self.field.N or other.field.alpha != self.field.alpha:
                raise ValueError("operators live over different coefficient fields")

    def __add__(self, other):
        if not isinstance(other, Operator):
            other = Operator.multiplication(self.field, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return Operator(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        return Operator(self.field, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Operator):
            other = Operator.multiplication(self.field, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "Operator":
        """Left multiplication by a scalar or coefficient."""
        if not isinstance(s, RatCoeff):
            s = self.field.const(s)
        if not s:
            return Operator(self.field)
        return Operator(self.field, {k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Operator):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, RatCoeff):
            return Operator.multiplication(self.field, other) * self
        return self.scale(other)

    def __pow__(self, e: int):
        out = Operator.identity(self.field)
        for _ in range(e):
            out = out * self
        return out

    # -- inspection ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def equals(self, other: "Operator") -> bool:
        return (self - other).is_zero()

    def order(self) -> int:
        return max((sum(K) for K, _ in self.terms), default=0)

    def perms(self) -> set:
        return {p for _, p in self.terms}

    def has_exchange_terms(self) -> bool:
        e = self._e
        return any(p != e for _, p in self.terms)

    def term_count(self) -> int:
        """Total number of polynomial monomials over all coefficients."""
        return sum(len(p) for c in self.terms.values() for p in c.num.values())

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]))

    def serialize(self) -> str:
        if not self.terms:
            return "0"
        lines = []
        for (K, p), c in self.sorted_items():
            d = "*".join(
                f"d{k + 1}^{e}" if e > 1 else f"d{k + 1}" for k, e in enumerate(K) if e
            )
            perm = "" if p == self._e else "s[" + ",".join(str(v + 1) for v in p) + "]"
            tail = " ".join(t for t in (d, perm) if t)
            lines.append(f"[{c.serialize()}]" + (f" {tail}" if tail else ""))
        return "\n".join(lines)

    def __repr__(self):
        return f"Operator(N={self.N}, terms={len(self.terms)})"

    # -- actions ---------------------------------------------------------------
    def apply(self, f: RatCoeff) -> RatCoeff:
        """Action on a function of the coefficient field."""
        parts = []
        cache: dict = {}
        for (K, p), c in self.terms.items():
            g = cache.get(p)
            if g is None:
                g = cache[p] = f.permute(p)
            for k, e in enumerate(K):
                for _ in range(e):
                    g = g.differentiate(k)
            if g:
                parts.append(c.mul_raw(g))
        return self.field.sum_raw(parts)

    def restrict_symmetric(self) -> "Operator":
        """Replace every permutation by the identity (action on symmetric functions)."""
        e = self._e
        out: dict = {}
        for (K, _), c in self.terms.items():
            out.setdefault((K, e), []).append(c)
        return Operator(self.field, {k: self.field.fsum(v) for k, v in out.items()})

    def map_coefficients(self, fn: Callable[[RatCoeff], RatCoeff]) -> "Operator":
        return Operator(self.field, {k: fn(c) for k, c in self.terms.items()})


def compose(A: Operator, B: Operator) -> Operator:
    """Normal-ordered product ``A B``."""
    A._check(B)
    fld = A.field
    if not A.terms or not B.terms:
        return Operator(fld)
    acc: dict = {}
    # (B-key, sigma) -> permuted coefficient; (B-key, sigma, J) -> derivative
    perm_cache: dict = {}
    deriv_cache: dict = {}
    nprod = 0
    for (K1, p1), c1 in A.terms.items():
        subs = _sub_indices(K1)
        for bkey, c2 in B.terms.items():
            K2, p2 = bkey
            pk = (bkey, p1)
            pc2 = perm_cache.get(pk)
            if pc2 is None:
                pc2 = perm_cache[pk] = c2.permute(p1)
            K2s = _push_deriv(p1, K2)
            perm = compose_perm(p1, p2)
            for J, mult in subs:
                dk = (bkey, p1, J)
                dc = deriv_cache.get(dk)
                if dc is None:
                    dc = pc2
                    for k, e in enumerate(J):
                        for _ in range(e):
                            dc = dc.differentiate(k)
                    deriv_cache[dk] = dc
                if not dc:
                    continue
                num, den = c1.mul_raw(dc)
                if mult != 1:
                    num = {w: q * mult for w, q in num.items()}
                K = tuple(a - j + b for a, j, b in zip(K1, J, K2s))
                acc.setdefault((K, perm), []).append((num, den))
                nprod += 1
    _charge(nprod)
    out = {}
    for key, parts in acc.items():
        c = fld.sum_raw(parts)
        if c:
            out[key] = c
    return Operator(fld, out)


def commutator(A: Operator, B: Operator) -> Operator:
    return compose(A, B) - compose(B, A)


def anticommutator(A: Operator, B: Operator) -> Operator:
    return compose(A, B) + compose(B, A)


def is_zero(A: Operator) -> bool:
    return A.is_zero()


def apply(A: Operator, f: RatCoeff) -> RatCoeff:
    return A.apply(f)


def restrict_symmetric(A: Operator) -> Operator:
    return A.restrict_symmetric()


def operator_sum(ops: Iterable[Operator], field: CoeffField) -> Operator:
    """Sum with one normalization per key."""
    acc: dict = {}
    for op in ops:
        for k, c in op.terms.items():
            acc.setdefault(k, []).append(c)
    return Operator(field, {k: field.fsum(v) for k, v in acc.items()})


__all__ = [
    "Operator",
    "Scalar",
    "TermBlowupError",
    "anticommutator",
    "apply",
    "commutator",
    "compose",
    "compose_perm",
    "is_zero",
    "operator_sum",
    "restrict_symmetric",
    "term_budget",
    "transposition",
]
