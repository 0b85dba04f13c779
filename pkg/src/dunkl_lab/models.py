"""Named operators of the Dunkl-deformed Coulomb, Stark and two-centre models.

All operators are built from the coordinates ``x_i``, the exchange operators
``s_ij`` and the Dunkl momenta

    pi_i = -i nabla_i,    nabla_i = d_i - sum_{j != i} g/(x_i - x_j) s_ij,

over the exact coefficient field.  The Stark field and the two-centre axis
point along ``(1, ..., 1)/sqrt(N)``; the model parameters are stored per
coordinate, ``f = F/sqrt(N)`` and ``alpha = a/sqrt(N)``, so every parameter
is rational and ``sqrt(N)`` appears only through the radical ``w``.

Quantities written with the radial momentum are expanded through the Euler
operator ``E = x.p = -i sum_i x_i d_i`` (``r p_r = E``), which keeps every
coefficient inside the field.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from typing import Callable

from .field import CoeffField, Scalar, field_for
from .operators import Operator, anticommutator, commutator, operator_sum, transposition

I = Scalar(0, 1)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("model parameters must be exact rationals, got a float")
    return Fraction(value)


@dataclass(frozen=True)
class ModelSpec:
    """Model parameters as exact rationals."""

    N: int
    g: Fraction = Fraction(0)
    gamma: Fraction = Fraction(1)
    f: Fraction = Fraction(0)
    alpha: Fraction = Fraction(0)
    gamma1: Fraction = Fraction(0)
    gamma2: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError("N must be a positive integer")
        for name in ("g", "gamma", "f", "alpha", "gamma1", "gamma2"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "g": str(self.g),
            "γ": str(self.gamma),
            "f": str(self.f),
            "α": str(self.alpha),
            "γ₁": str(self.gamma1),
            "γ₂": str(self.gamma2),
        }


class UnknownOperatorError(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    arity: int
    anchor: str
    summary: str
    builder: str = dc_field(repr=False, default="")


# name -> (arity, anchor, summary); the anchor names the defining relation
CATALOG: dict[str, CatalogEntry] = {}


def _entry(name, arity, anchor, summary):
    CATALOG[name] = CatalogEntry(name, arity, anchor, summary, name)


_entry("x", 1, "coordinate", "coordinate x_i as a multiplication operator")
_entry("p", 1, "canonical-momentum", "ordinary momentum -i d_i")
_entry("exchange", 2, "exchange-operator", "transposition s_ij of coordinates")
_entry("dunkl_momentum", 1, "dunkl-momentum", "pi_i = -i(d_i - sum_j g/(x_i-x_j) s_ij)")
_entry("S_ij", 2, "exchange-tensor", "S_ij = -g s_ij (i != j), 1 + g sum_k s_ik (i == j)")
_entry("S", 0, "exchange-invariant", "S = sum_{i<j} S_ij = -g sum_{i<j} s_ij")
_entry("L", 2, "dunkl-angular-momentum", "L_ij = x_i pi_j - x_j pi_i")
_entry("pi_sq", 0, "dunkl-laplacian", "sum_i pi_i^2")
_entry("r", 0, "radius", "r = sqrt(sum x_i^2)")
_entry("inv_r", 0, "radius", "1/r")
_entry("x0", 0, "centre-of-mass", "x0 = sum x_i / sqrt(N)")
_entry("p0", 0, "centre-of-mass", "p0 = sum p_i / sqrt(N)")
_entry("euler", 0, "radial-momentum-times-r", "r p_r = x.p = -i sum x_i d_i")
_entry("A", 1, "runge-lenz-with-S", "A_i = 1/2 sum_j {L_ij, pi_j} + i/2 [pi_i, S] - gamma x_i / r")
_entry("A_vec", 1, "runge-lenz-without-S", "A_i = x_i (pi^2 - gamma/r) - (r p_r + (N-1)/(2i)) pi_i")
_entry("L2k", 1, "symmetric-angular-powers", "sum_{i<j} L_ij^(2k)")
_entry("A_k", 1, "symmetric-runge-lenz-powers", "sum_i A_i^k")
_entry("L2", 0, "angular-momentum-square", "sum_{i<j} L_ij^2")
_entry("casimir_I", 0, "angular-casimir", "(L2 + S(S-N+2))/2")
_entry("A1_scaled", 0, "runge-lenz-sum-with-L", "(1/sqrt N) 1/2 sum_ij {L_ij, pi_j} - gamma x0 / r")
_entry("A1_scaled_vec", 0, "runge-lenz-sum-without-L", "x0 (2H + gamma/r) - (r p_r + (N-1)/(2i)) p0")
_entry("L_perp", 2, "perpendicular-angular-momentum", "L_ij + (1/N) sum_k (L_jk - L_ik)")
_entry("L_jacobi", 2, "jacobi-angular-momentum", "scaled rotated L: sum v_i[a] v_j[b] L_ab, integer Jacobi rows")
_entry("S_jacobi", 2, "jacobi-exchange-tensor", "scaled rotated S with the same integer rows")
_entry("L2_rel", 0, "relative-angular-momentum-square", "sum_{1<=i<j<=N-1} (rotated L_ij)^2")
_entry("casimir_I_rel", 0, "relative-angular-casimir", "(L2_rel + S(S-N+3))/2")
_entry("euler_rel", 0, "relative-euler", "x.p - x0 p0")
_entry("A_stark", 0, "stark-invariant-with-A1", "(1/sqrt N) A_1 - F/2 (r^2 - x0^2)")
_entry("A_stark_vec", 0, "stark-invariant-explicit", "x0(2H+gamma/r) - (r p_r+(N-1)/2i)p0 - F/2 (r^2+3x0^2)")
_entry("A_two", 0, "two-centre-invariant", "L2 + a^2 p0^2 - 2 a x0 (gamma1/r1 - gamma2/r2)")
_entry("A_two_prime", 0, "two-centre-invariant-casimir", "2I + a^2 p0^2 - 2 a x0 (gamma1/r1 - gamma2/r2)")
_entry("L_shift", 2, "shifted-angular-momentum", "(x_i - alpha) pi_j - (x_j - alpha) pi_i")
_entry("L2_shift", 0, "shifted-angular-momentum-square", "sum_{i<j} (L_shift_ij)^2")
_entry("A1_shift", 0, "shifted-runge-lenz-sum", "1/2 sum {L_shift_ij, pi_j} - gamma1 sum (x_i - alpha)/r1")

MODELS = ("coulomb", "stark", "two_center", "calogero_relative")


def catalog_manifest(verified_forms: dict | None = None) -> dict:
    """Machine-readable catalog (name -> anchor -> arity) for the CLI."""
    out = {
        "operators": [
            {"name": e.name, "anchor": e.anchor, "arity": e.arity, "summary": e.summary}
            for e in CATALOG.values()
        ],
        "models": list(MODELS),
    }
    if verified_forms is not None:
        out["verified_forms"] = verified_forms
    return out


def jacobi_rows(N: int) -> list[list[int]]:
    """Integer multiples of the Jacobi rows: v_0 = (1..1), v_k = (1..1, -k, 0..).

    The orthonormal rows are ``v_k / c_k`` with ``c_0^2 = N`` and
    ``c_k^2 = k (k + 1)``.
    """
    rows = [[1] * N]
    for k in range(1, N):
        rows.append([1] * k + [-k] + [0] * (N - k - 1))
    return rows


def jacobi_norms_sq(N: int) -> list[int]:
    return [N] + [k * (k + 1) for k in range(1, N)]


class Generators:
    """Factory for the named operators of one :class:`ModelSpec`.

    Built operators are cached on the instance; operators are immutable so
    the cache is safe to share.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.N = spec.N
        self.F: CoeffField = field_for(spec.N, spec.alpha)
        self._cache: dict = {}

    # -- elementary pieces ----------------------------------------------------
    def _cached(self, key, build: Callable[[], Operator]) -> Operator:
        got = self._cache.get(key)
        if got is None:
            got = self._cache[key] = build()
        return got

    def _check_index(self, *idx):
        for i in idx:
            if not 0 <= i < self.N:
                raise IndexError(f"index {i + 1} out of range for N={self.N}")

    def const(self, value) -> Operator:
        return Operator.multiplication(self.F, self.F.const(value))

    def mult(self, c) -> Operator:
        return Operator.multiplication(self.F, c)

    def one(self) -> Operator:
        return Operator.identity(self.F)

    def x(self, i: int) -> Operator:
        self._check_index(i)
        return self._cached(("x", i), lambda: self.mult(self.F.x(i)))

    def partial(self, i: int) -> Operator:
        self._check_index(i)
        return Operator.partial(self.F, i)

    def p(self, i: int) -> Operator:
        return self._cached(("p", i), lambda: self.partial(i).scale(-I))

    def exchange(self, i: int, j: int) -> Operator:
        self._check_index(i, j)
        return Operator.exchange(self.F, i, j)

    def nabla(self, i: int) -> Operator:
        def build():
            g = self.spec.g
            op = self.partial(i)
            terms = dict(op.terms)
            if g:
                d0 = (0,) * self.N
                for j in range(self.N):
                    if j != i:
                        c = self.F.inv_pair(i, j) * (-g)
                        terms[(d0, transposition(self.N, i, j))] = c
            return Operator(self.F, terms)

        self._check_index(i)
        return self._cached(("nabla", i), build)

    def dunkl_momentum(self, i: int) -> Operator:
        return self._cached(("pi", i), lambda: self.nabla(i).scale(-I))

    pi = dunkl_momentum

    def S_ij(self, i: int, j: int) -> Operator:
        self._check_index(i, j)
        g = self.spec.g

        def build():
            if i != j:
                return self.exchange(i, j).scale(-g)
            out = self.one()
            for k in range(self.N):
                if k != i:
                    out = out + self.exchange(i, k).scale(g)
            return out

        return self._cached(("Sij", i, j), build)

    def S(self) -> Operator:
        def build():
            parts = [self.S_ij(i, j) for i in range(self.N) for j in range(i + 1, self.N)]
            return operator_sum(parts, self.F)

        return self._cached("S", build)

    def L(self, i: int, j: int) -> Operator:
        self._check_index(i, j)

        def build():
            return self.x(i) * self.pi(j) - self.x(j) * self.pi(i)

        return self._cached(("L", i, j), build)

    def pi_sq(self) -> Operator:
        return self._cached(
            "pi2", lambda: operator_sum([self.pi(i) * self.pi(i) for i in range(self.N)], self.F)
        )

    def r(self) -> Operator:
        return self.mult(self.F.r())

    def inv_r(self) -> Operator:
        return self.mult(self.F.inv_radical("r"))

    def r_sq(self) -> Operator:
        return self.mult(self.F.radius_sq())

    def sum_x(self) -> Operator:
        return self.mult(self.F.sum_x())

    def x0(self) -> Operator:
        return self.mult(self.F.sum_x() * self.F.w() * Fraction(1, self.N))

    def sum_p(self) -> Operator:
        return self._cached("sum_p", lambda: operator_sum([self.p(i) for i in range(self.N)], self.F))

    def p0(self) -> Operator:
        return self._cached("p0", lambda: self.sum_p() * (self.F.w() * Fraction(1, self.N)))

    def p0_sq(self) -> Operator:
        return self._cached("p0sq", lambda: (self.sum_p() * self.sum_p()).scale(Fraction(1, self.N)))

    def x0_sq(self) -> Operator:
        return self.mult(self.F.sum_x() * self.F.sum_x() * Fraction(1, self.N))

    def euler(self) -> Operator:
        """``r p_r = x.p``."""
        return self._cached(
            "euler", lambda: operator_sum([self.x(i) * self.p(i) for i in range(self.N)], self.F)
        )

    def euler_rel(self) -> Operator:
        """``x.p - x0 p0`` (the relative Euler operator ``y.p_y``)."""
        return self._cached(
            "euler_rel",
            lambda: self.euler() - (self.sum_x() * self.sum_p()).scale(Fraction(1, self.N)),
        )

    # -- Coulomb family ------------------------------------------------------------
    def H_coulomb(self) -> Operator:
        g = self.spec.gamma
        return self._cached("H", lambda: self.pi_sq().scale(Fraction(1, 2)) - self.inv_r().scale(g))

    def half_anti_L_pi(self, i: int) -> Operator:
        """``1/2 sum_j {L_ij, pi_j}``."""
        return self._cached(
            ("aLpi", i),
            lambda: operator_sum(
                [anticommutator(self.L(i, j), self.pi(j)) for j in range(self.N) if j != i],
                self.F,
            ).scale(Fraction(1, 2)),
        )

    def A(self, i: int, gamma_sign: int = 1) -> Operator:
        """Runge-Lenz component written with the exchange invariant ``S``.

        ``gamma_sign=-1`` flips the sign of the Coulomb term (a deliberate
        fault used by control cases).
        """
        self._check_index(i)

        def build():
            gam = self.spec.gamma * gamma_sign
            return (
                self.half_anti_L_pi(i)
                + commutator(self.pi(i), self.S()).scale(I * Fraction(1, 2))
                - self.mult(self.F.x(i) * self.F.inv_radical("r") * gam)
            )

        return self._cached(("A", i, gamma_sign), build)

    def _euler_shift(self, N_shift=None) -> Operator:
        """``r p_r + (N-1)/(2i)``."""
        n = self.N if N_shift is None else N_shift
        return self.euler() + self.const(-I * Fraction(n - 1, 2))

    def A_vec(self, i: int) -> Operator:
        """Runge-Lenz component without ``S``."""
        self._check_index(i)

        def build():
            core = self.pi_sq() - self.inv_r().scale(self.spec.gamma)
            return self.x(i) * core - self._euler_shift() * self.pi(i)

        return self._cached(("Avec", i), build)

    def L2k(self, k: int) -> Operator:
        def build():
            parts = []
            for i in range(self.N):
                for j in range(i + 1, self.N):
                    parts.append(self.L(i, j) ** (2 * k))
            return operator_sum(parts, self.F)

        return self._cached(("L2k", k), build)

    def L2(self) -> Operator:
        return self.L2k(1)

    def A_k(self, k: int) -> Operator:
        return self._cached(
            ("Ak", k), lambda: operator_sum([self.A(i) ** k for i in range(self.N)], self.F)
        )

    def S_poly(self, shift: int) -> Operator:
        """``S (S - N + shift)``."""
        S = self.S()
        return self._cached(("Spoly", shift), lambda: S * (S - self.const(self.N - shift)))

    def casimir_I(self, sign: int = 1) -> Operator:
        """Angular Casimir ``(L2 + sign * S(S-N+2))/2``.

        ``sign=+1`` is the form that reproduces the radial split of
        ``r^2 pi^2 / 2`` and commutes with every ``L_ij``; ``sign=-1`` is kept
        for the literal-variant checks.
        """
        return self._cached(
            ("I", sign), lambda: (self.L2() + self.S_poly(2).scale(sign)).scale(Fraction(1, 2))
        )

    def radial_split(self) -> Operator:
        """``(E^2 - i (N-2) E)/2`` with ``E = r p_r``."""
        E = self.euler()
        return (E * E - E.scale(I * (self.N - 2))).scale(Fraction(1, 2))

    def anti_L_pi_total(self) -> Operator:
        """``sum_{i,j} {L_ij, pi_j}``."""
        return self._cached(
            "aLpi_tot",
            lambda: operator_sum([self.half_anti_L_pi(i) for i in range(self.N)], self.F).scale(2),
        )

    def A1_scaled(self) -> Operator:
        """``(1/sqrt N) sum_i A_i`` in the angular form."""
        def build():
            wN = self.F.w() * Fraction(1, self.N)
            return self.anti_L_pi_total().scale(wN * Fraction(1, 2)) - self.mult(
                self.F.sum_x() * wN * self.F.inv_radical("r") * self.spec.gamma
            )

        return self._cached("A1s", build)

    def A1_scaled_vec(self, H: Operator | None = None) -> Operator:
        """``x0 (2H + gamma/r) - (r p_r + (N-1)/(2i)) p0``."""
        def build():
            Hh = self.H_coulomb() if H is None else H
            inner = Hh.scale(2) + self.inv_r().scale(self.spec.gamma)
            return self.x0() * inner - self._euler_shift() * self.p0()

        if H is not None:
            return build()
        return self._cached("A1sv", build)

    # -- Stark ------------------------------------------------------------------------
    def F_field(self):
        """Field strength ``F = f sqrt(N)`` as a coefficient."""
        return self.F.w() * self.spec.f

    def H_stark(self) -> Operator:
        return self._cached("Hstark", lambda: self.H_coulomb() + self.sum_x().scale(self.spec.f))

    def L_perp(self, i: int, j: int) -> Operator:
        self._check_index(i, j)

        def build():
            parts = [self.L(i, j)]
            for k in range(self.N):
                if k != j:
                    parts.append(self.L(j, k).scale(Fraction(1, self.N)))
                if k != i:
                    parts.append(self.L(i, k).scale(Fraction(-1, self.N)))
            return operator_sum(parts, self.F)

        return self._cached(("Lperp", i, j), build)

    def L_jacobi(self, a: int, b: int) -> Operator:
        """Rotated angular momentum in Jacobi axes, scaled by ``c_a c_b``."""
        rows = jacobi_rows(self.N)

        def build():
            parts = []
            for i in range(self.N):
                for j in range(i + 1, self.N):
                    c = rows[a][i] * rows[b][j] - rows[a][j] * rows[b][i]
                    if c:
                        parts.append(self.L(i, j).scale(c))
            return operator_sum(parts, self.F)

        return self._cached(("Ljac", a, b), build)

    def S_jacobi(self, a: int, b: int) -> Operator:
        rows = jacobi_rows(self.N)

        def build():
            parts = []
            for i in range(self.N):
                for j in range(self.N):
                    c = rows[a][i] * rows[b][j]
                    if c:
                        parts.append(self.S_ij(i, j).scale(c))
            return operator_sum(parts, self.F)

        return self._cached(("Sjac", a, b), build)

    def L2_rel(self) -> Operator:
        """Square of the relative angular momentum (unscaled)."""
        norms = jacobi_norms_sq(self.N)

        def build():
            parts = []
            for a in range(1, self.N):
                for b in range(a + 1, self.N):
                    La = self.L_jacobi(a, b)
                    parts.append((La * La).scale(Fraction(1, norms[a] * norms[b])))
            return operator_sum(parts, self.F)

        return self._cached("L2rel", build)

    def L2_rel_from_total(self) -> Operator:
        """``L2 - (1/N) sum_b (sum_a L_ab)^2``: second route to :meth:`L2_rel`."""
        def build():
            parts = []
            for b in range(self.N):
                col = operator_sum([self.L(a, b) for a in range(self.N) if a != b], self.F)
                parts.append(col * col)
            return self.L2() - operator_sum(parts, self.F).scale(Fraction(1, self.N))

        return self._cached("L2rel_tot", build)

    def casimir_I_rel(self, shift: int = 3, sign: int = 1) -> Operator:
        """Relative angular Casimir ``(L2_rel + sign * S(S-N+shift))/2``.

        The default ``shift=3, sign=+1`` is the form matching the radial split
        of ``y^2 (pi^2 - p0^2)/2``.
        """
        return self._cached(
            ("Irel", shift, sign),
            lambda: (self.L2_rel() + self.S_poly(shift).scale(sign)).scale(Fraction(1, 2)),
        )

    def pi_sq_rel(self) -> Operator:
        return self._cached("pi2rel", lambda: self.pi_sq() - self.p0_sq())

    def y_sq(self) -> Operator:
        return self.mult(self.F.radius_sq() - self.F.sum_x() * self.F.sum_x() * Fraction(1, self.N))

    def radial_split_rel(self) -> Operator:
        """``(E_y^2 - i (N-3) E_y)/2``."""
        E = self.euler_rel()
        return (E * E - E.scale(I * (self.N - 3))).scale(Fraction(1, 2))

    def A_stark(self) -> Operator:
        def build():
            half_F = self.F_field() * Fraction(1, 2)
            return self.A1_scaled() - (self.r_sq() - self.x0_sq()).scale(half_F)

        return self._cached("Astark", build)

    def A_stark_vec(self, x0_sq_coeff=3) -> Operator:
        def build():
            half_F = self.F_field() * Fraction(1, 2)
            return self.A1_scaled_vec(self.H_stark()) - (
                self.r_sq() + self.x0_sq().scale(x0_sq_coeff)
            ).scale(half_F)

        if x0_sq_coeff != 3:
            return build()
        return self._cached("Astarkv", build)

    # -- two centres -------------------------------------------------------------------
    def inv_r1(self) -> Operator:
        return self.mult(self.F.inv_radical("r1"))

    def inv_r2(self) -> Operator:
        return self.mult(self.F.inv_radical("r2"))

    def H_two(self) -> Operator:
        s = self.spec
        return self._cached(
            "Htwo",
            lambda: self.pi_sq().scale(Fraction(1, 2))
            - self.inv_r1().scale(s.gamma1)
            - self.inv_r2().scale(s.gamma2),
        )

    def H_center(self, which: int) -> Operator:
        """Single-centre Hamiltonian ``pi^2/2 - gamma_k / r_k``."""
        s = self.spec
        if which == 1:
            return self.pi_sq().scale(Fraction(1, 2)) - self.inv_r1().scale(s.gamma1)
        return self.pi_sq().scale(Fraction(1, 2)) - self.inv_r2().scale(s.gamma2)

    def two_center_potential_term(self, gamma2_sign: int = 1) -> Operator:
        """``2 a x0 (gamma1/r1 - gamma2/r2)`` with ``a x0 = alpha sum x``."""
        s = self.spec
        F = self.F
        c = F.inv_radical("r1") * s.gamma1 - F.inv_radical("r2") * (s.gamma2 * gamma2_sign)
        return self.mult(F.sum_x() * c * (2 * s.alpha))

    def a_sq_p0_sq(self) -> Operator:
        return self.p0_sq().scale(self.N * self.spec.alpha**2)

    def A_two(self, gamma2_sign: int = 1) -> Operator:
        def build():
            return self.L2() + self.a_sq_p0_sq() - self.two_center_potential_term(gamma2_sign)

        if gamma2_sign != 1:
            return build()
        return self._cached("Atwo", build)

    def A_two_prime(self) -> Operator:
        return self._cached(
            "Atwo'",
            lambda: self.casimir_I().scale(2) + self.a_sq_p0_sq() - self.two_center_potential_term(),
        )

    def L_shift(self, i: int, j: int, sign: int = 1) -> Operator:
        """Angular momentum about the centre ``x_k = sign * alpha``."""
        self._check_index(i, j)
        al = self.spec.alpha * sign
        return self._cached(
            ("Lshift", i, j, sign),
            lambda: self.L(i, j) + (self.pi(i) - self.pi(j)).scale(al),
        )

    def L2_shift(self, sign: int = 1) -> Operator:
        def build():
            parts = []
            for i in range(self.N):
                for j in range(i + 1, self.N):
                    Ls = self.L_shift(i, j, sign)
                    parts.append(Ls * Ls)
            return operator_sum(parts, self.F)

        return self._cached(("L2shift", sign), build)

    def L2_shift_closed(self, sign: int = 1) -> Operator:
        """``L2 - alpha sum {L_ij, pi_j} + N alpha^2 (pi^2 - p0^2)``."""
        al = self.spec.alpha * sign
        return (
            self.L2()
            - self.anti_L_pi_total().scale(al)
            + (self.pi_sq() - self.p0_sq()).scale(self.N * al**2)
        )

    def A1_shift(self, sign: int = 1) -> Operator:
        """Runge-Lenz sum about the shifted centre."""
        s = self.spec
        al = s.alpha * sign
        gam = s.gamma1 if sign == 1 else s.gamma2
        rad = "r1" if sign == 1 else "r2"

        def build():
            parts = []
            for i in range(self.N):
                for j in range(self.N):
                    if i != j:
                        parts.append(anticommutator(self.L_shift(i, j, sign), self.pi(j)))
            centre = (self.F.sum_x() - self.F.const(self.N * al)) * self.F.inv_radical(rad)
            return operator_sum(parts, self.F).scale(Fraction(1, 2)) - self.mult(centre * gam)

        return self._cached(("A1shift", sign), build)

    def A1_shift_closed(self, sign: int = 1) -> Operator:
        """``1/2 sum {L_ij, pi_j} - N alpha (pi^2 - p0^2) - gamma_k (sum x - N alpha)/r_k``."""
        s = self.spec
        al = s.alpha * sign
        gam = s.gamma1 if sign == 1 else s.gamma2
        rad = "r1" if sign == 1 else "r2"
        centre = (self.F.sum_x() - self.F.const(self.N * al)) * self.F.inv_radical(rad)
        return (
            self.anti_L_pi_total().scale(Fraction(1, 2))
            - (self.pi_sq() - self.p0_sq()).scale(self.N * al)
            - self.mult(centre * gam)
        )

    # -- dispatch ------------------------------------------------------------------------
    def build(self, name: str, *indices: int) -> Operator:
        """Build a catalog operator; indices are 1-based as in the catalog."""
        entry = CATALOG.get(name)
        if entry is None:
            raise UnknownOperatorError(name)
        if name in ("L2k", "A_k"):
            if len(indices) != 1 or indices[0] < 1:
                raise ValueError(f"{name} takes one positive power")
            return getattr(self, name)(indices[0])
        if len(indices) != entry.arity:
            raise ValueError(f"{name} takes {entry.arity} indices, got {len(indices)}")
        if name in ("L_jacobi", "S_jacobi"):
            for a in indices:
                if not 0 <= a < self.N:
                    raise IndexError(f"Jacobi index {a} out of range for N={self.N}")
            return getattr(self, name)(*indices)
        zero_based = [k - 1 for k in indices]
        return getattr(self, name)(*zero_based)


def build_generator(name: str, spec: ModelSpec, *indices: int) -> Operator:
    return Generators(spec).build(name, *indices)


def build_hamiltonian(model: str, spec: ModelSpec) -> Operator:
    gen = Generators(spec)
    if model == "coulomb":
        return gen.H_coulomb()
    if model == "stark":
        return gen.H_stark()
    if model == "two_center":
        return gen.H_two()
    if model == "calogero_relative":
        # generalized relative Hamiltonian; restrict_symmetric gives p~^2/2 + sum g(g-1)/(x_i-x_j)^2
        return gen.pi_sq_rel().scale(Fraction(1, 2))
    raise ValueError(f"unsupported model {model!r}")


def build_invariant_suite(model: str, spec: ModelSpec, max_power: int = 1) -> list[tuple[str, Operator]]:
    """The claimed set of integrals of ``model``."""
    gen = Generators(spec)
    N = spec.N
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    out = []
    if model == "coulomb":
        out += [(f"L[{i + 1},{j + 1}]", gen.L(i, j)) for i, j in pairs]
        out += [(f"A[{i + 1}]", gen.A(i)) for i in range(N)]
        out += [(f"L2k[{k}]", gen.L2k(k)) for k in range(1, max_power + 1)]
        out.append(("A_k[1]", gen.A_k(1)))
        out.append(("I", gen.casimir_I()))
    elif model == "stark":
        rel = [(a, b) for a in range(1, N) for b in range(a + 1, N)]
        out += [(f"L_jacobi[{a},{b}]", gen.L_jacobi(a, b)) for a, b in rel]
        out.append(("A_stark", gen.A_stark()))
    elif model == "two_center":
        # for N = 2 every perpendicular component vanishes identically
        out += [(f"L_perp[{i + 1},{j + 1}]", gen.L_perp(i, j)) for i, j in pairs if gen.L_perp(i, j)]
        out.append(("A_two", gen.A_two()))
        out.append(("A_two_prime", gen.A_two_prime()))
    else:
        raise ValueError(f"unsupported model {model!r}")
    return out
