"""Suites of exact operator identities and their reports.

Every case builds a residual operator (or a list of them) from a
:class:`~dunkl_lab.models.Generators` and decides it by the exact zero test.
Three kinds of cases exist:

* ordinary identities, which must vanish;
* *literal variants*, which record a stated form that the engine shows to be
  wrong; they are expected to leave a nonzero residual (the expectation may
  depend on the model parameters, e.g. every variant collapses at ``g = 0``);
* *fault controls*, deliberately mutated identities that are run only with
  ``inject_fault=True``; they are then treated as ordinary identities and
  must fail, which guards against vacuous passes.

The coupling ``g`` is sampled, not kept symbolic.  Each residual is a
polynomial in ``g`` whose degree is bounded by ``g_degree``; when the grid
has more than ``g_degree`` distinct values, passing on the grid implies the
identity for all ``g`` (see :func:`symbolic_g_grid`).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .field import Scalar
from .models import Generators, ModelSpec, jacobi_norms_sq, jacobi_rows
from .operators import (
    DEFAULT_TERM_CAP,
    Operator,
    TermBlowupError,
    anticommutator,
    commutator,
    operator_sum,
    term_budget,
)

I = Scalar(0, 1)
HALF = Fraction(1, 2)

SUITES = ("cherednik", "angular", "coulomb_conservation", "stark", "two_center", "structural")

# sampling grid used by the acceptance run
GRID_N = (2, 3, 4)
GRID_G = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))
GRID_PARAMS = dict(
    gamma=Fraction(1),
    f=Fraction(1, 3),
    alpha=Fraction(2, 5),
    gamma1=Fraction(1, 2),
    gamma2=Fraction(1, 3),
)

Residual = Union[Operator, Sequence[Operator]]


@dataclass
class IdentityCase:
    label: str
    anchor: str
    build: Callable[[Generators], Residual]
    g_degree: int
    expect_zero: Union[bool, Callable[[ModelSpec], bool]] = True
    control: bool = False
    applies: Callable[[ModelSpec], bool] = lambda spec: True
    max_N: int | None = None
    note: str = ""

    def expected(self, spec: ModelSpec) -> bool:
        if self.control:
            return True
        if callable(self.expect_zero):
            return bool(self.expect_zero(spec))
        return self.expect_zero


@dataclass
class IdentityReport:
    suite: str
    label: str
    anchor: str
    spec: ModelSpec
    verdict: str
    ms: float
    expect: str = "zero"
    residual_terms: int | None = None
    residual: str | None = None
    reason: str | None = None
    control: bool = False

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "label": self.label,
            "anchor": self.anchor,
            "spec": self.spec.as_dict(),
            "verdict": self.verdict,
            "expect": self.expect,
            "ms": round(self.ms, 3) if timing else 0,
        }
        if self.control:
            out["control"] = True
        if self.residual_terms is not None:
            out["residual_terms"] = self.residual_terms
        if self.residual is not None:
            out["residual"] = self.residual
        if self.reason is not None:
            out["reason"] = self.reason
        return out


# ----------------------------------------------------------------------------------
# helpers


def _pairs(N):
    return [(i, j) for i in range(N) for j in range(i + 1, N)]


def _rel_pairs(N):
    return [(a, b) for a in range(1, N) for b in range(a + 1, N)]


def _all(N, k):
    if k == 1:
        return [(i,) for i in range(N)]
    return [t + (i,) for t in _all(N, k - 1) for i in range(N)]


def _L_any(G: Generators, i, j) -> Operator:
    if i == j:
        return Operator.zero(G.F)
    return G.L(i, j)


def _Ljac_any(G: Generators, a, b) -> Operator:
    if a == b:
        return Operator.zero(G.F)
    if a < b:
        return G.L_jacobi(a, b)
    return -G.L_jacobi(b, a)


def _jac_vec(G: Generators, a: int, ops) -> Operator:
    """``sum_i v_a[i] ops(i)`` with the integer Jacobi row ``v_a``."""
    row = jacobi_rows(G.N)[a]
    return operator_sum([ops(i).scale(c) for i, c in enumerate(row) if c], G.F)


def _comMM_rhs(L, S, i, j, k, l):
    return (
        L(i, k) * S(l, j)
        + L(j, l) * S(k, i)
        - L(i, l) * S(k, j)
        - L(j, k) * S(l, i)
    ).scale(I)


def _expect_g0(spec: ModelSpec) -> bool:
    return spec.g == 0


# ----------------------------------------------------------------------------------
# cherednik


def _cherednik_cases() -> list[IdentityCase]:
    def dunkl_commute(G):
        return [commutator(G.pi(i), G.pi(j)) for i, j in _pairs(G.N)]

    def heisenberg(G):
        return [
            commutator(G.pi(i), G.x(j)) + G.S_ij(i, j).scale(I)
            for i in range(G.N)
            for j in range(G.N)
        ]

    def heisenberg_fault(G):
        return [
            commutator(G.pi(i), G.x(j)) - G.S_ij(i, j).scale(I)
            for i in range(G.N)
            for j in range(G.N)
        ]

    def tensor_sym_x(G):
        return [
            commutator(G.S_ij(i, k), G.x(j)) - commutator(G.S_ij(j, k), G.x(i))
            for i, j, k in _all(G.N, 3)
        ]

    def tensor_sym_pi(G):
        return [
            commutator(G.S_ij(i, k), G.pi(j)) - commutator(G.S_ij(j, k), G.pi(i))
            for i, j, k in _all(G.N, 3)
        ]

    def S_central(G):
        return [commutator(G.S(), G.S_ij(i, j)) for i, j in _all(G.N, 2)]

    def anti_pi(G):
        return [
            operator_sum([anticommutator(G.S_ij(i, k), G.pi(k)) for k in range(G.N)], G.F)
            - G.pi(i).scale(2)
            for i in range(G.N)
        ]

    def anti_x(G):
        return [
            operator_sum([anticommutator(G.S_ij(i, k), G.x(k)) for k in range(G.N)], G.F)
            - G.x(i).scale(2)
            for i in range(G.N)
        ]

    def row_sum(G):
        return [
            operator_sum([G.S_ij(i, j) for j in range(G.N)], G.F) - G.one()
            for i in range(G.N)
        ]

    def S_comm(G):
        out = []
        for i in range(G.N):
            lhs = operator_sum(
                [(G.pi(j) - G.pi(i)) * G.S_ij(i, j) for j in range(G.N) if j != i], G.F
            )
            out.append(lhs - commutator(G.S(), G.pi(i)))
        return out

    def pdu_x(G):
        s = operator_sum(
            [G.pi(i) * G.x(i) + G.x(i) * G.pi(i) for i in range(G.N)], G.F
        )
        return s - G.euler().scale(2) + G.const(I * G.N)

    return [
        IdentityCase("dunkl momenta commute", "dunkl-commutativity", dunkl_commute, 2),
        IdentityCase("[pi_i, x_j] = -i S_ij", "deformed-heisenberg", heisenberg, 1),
        IdentityCase("[S_ik, x_j] symmetric in i,j,k", "exchange-tensor-symmetry-x", tensor_sym_x, 1),
        IdentityCase("[S_ik, pi_j] symmetric in i,j,k", "exchange-tensor-symmetry-pi", tensor_sym_pi, 2),
        IdentityCase("[S, S_ij] = 0", "exchange-invariant-central", S_central, 2),
        IdentityCase("sum_k {S_ik, pi_k} = 2 pi_i", "exchange-anticommutator-pi", anti_pi, 2),
        IdentityCase("sum_k {S_ik, x_k} = 2 x_i", "exchange-anticommutator-x", anti_x, 1),
        IdentityCase("sum_j S_ij = 1", "exchange-row-sum", row_sum, 1),
        IdentityCase("sum_j (pi_j - pi_i) S_ij = [S, pi_i]", "exchange-commutator-identity", S_comm, 2),
        IdentityCase("pi.x + x.pi = 2 x.p - iN", "dunkl-euler-identity", pdu_x, 1),
        IdentityCase(
            "control: [pi_i, x_j] = +i S_ij", "deformed-heisenberg", heisenberg_fault, 1, control=True
        ),
    ]


# ----------------------------------------------------------------------------------
# angular


def _angular_cases() -> list[IdentityCase]:
    def comMM(G):
        L = lambda a, b: _L_any(G, a, b)
        out = []
        for i, j in _pairs(G.N):
            for k, l in _pairs(G.N):
                out.append(commutator(G.L(i, j), G.L(k, l)) - _comMM_rhs(L, G.S_ij, i, j, k, l))
        return out

    def pi2_L(G):
        return [commutator(G.pi_sq(), G.L(i, j)) for i, j in _pairs(G.N)]

    def r_L(G):
        return [commutator(G.r(), G.L(i, j)) for i, j in _pairs(G.N)]

    def H_L(G):
        return [commutator(G.H_coulomb(), G.L(i, j)) for i, j in _pairs(G.N)]

    def casimir(G):
        I_ = G.casimir_I()
        return [commutator(G.L(i, j), I_) for i, j in _pairs(G.N)] + [
            commutator(I_, G.H_coulomb())
        ]

    def casimir_literal(G):
        I_ = G.casimir_I(sign=-1)
        return [commutator(G.L(i, j), I_) for i, j in _pairs(G.N)]

    def split(G):
        return G.r_sq() * G.pi_sq().scale(HALF) - G.radial_split() - G.casimir_I()

    def split_literal(G):
        return G.r_sq() * G.pi_sq().scale(HALF) - G.radial_split() - G.casimir_I(sign=-1)

    def comLx(G):
        out = []
        for i, j in _pairs(G.N):
            for l in range(G.N):
                rhs = (G.x(j) * G.S_ij(i, l) - G.x(i) * G.S_ij(j, l)).scale(I)
                out.append(commutator(G.L(i, j), G.x(l)) - rhs)
        return out

    def comLx_fault(G):
        out = []
        for i, j in _pairs(G.N):
            for l in range(G.N):
                rhs = (G.x(j) * G.S_ij(i, l) - G.x(i) * G.S_ij(j, l)).scale(I)
                out.append(commutator(G.L(i, j), G.x(l)) + rhs)
        return out

    def comLx0(G):
        wN = G.F.w() * Fraction(1, G.N)
        return [
            commutator(G.L(i, j), G.x0()) + (G.x(i) - G.x(j)).scale(wN * I)
            for i, j in _pairs(G.N)
        ]

    def comLx0_literal(G):
        return [commutator(G.L(i, j), G.x0()) + (G.x(i) - G.x(j)).scale(I) for i, j in _pairs(G.N)]

    def com_tilde(G):
        out = []
        for a in range(G.N):
            pa = _jac_vec(G, a, G.pi)
            for b in range(G.N):
                yb = _jac_vec(G, b, G.x)
                out.append(commutator(pa, yb) + G.S_jacobi(a, b).scale(I))
        return out

    def S_i0(G):
        return [
            G.S_jacobi(a, 0) - (G.const(G.N) if a == 0 else Operator.zero(G.F))
            for a in range(G.N)
        ]

    def comMM_tilde(G):
        L = lambda a, b: _Ljac_any(G, a, b)
        out = []
        rel = _rel_pairs(G.N)
        for i, j in rel:
            for k, l in rel:
                out.append(commutator(L(i, j), L(k, l)) - _comMM_rhs(L, G.S_jacobi, i, j, k, l))
        return out

    def comMM_0i(G):
        L = lambda a, b: _Ljac_any(G, a, b)
        S = G.S_jacobi
        out = []
        for i, j in _rel_pairs(G.N):
            for l in range(1, G.N):
                rhs = (L(0, j) * S(l, i) - L(0, i) * S(l, j)).scale(I)
                out.append(commutator(L(i, j), L(0, l)) - rhs)
        return out

    def comMM_00(G):
        # scaled generators: [L0j, L0l] = i N Ljl
        L = lambda a, b: _Ljac_any(G, a, b)
        out = []
        for j in range(1, G.N):
            for l in range(1, G.N):
                out.append(commutator(L(0, j), L(0, l)) - L(j, l).scale(I * G.N))
        return out

    def rel_split(G):
        return (
            G.y_sq() * G.pi_sq_rel().scale(HALF) - G.radial_split_rel() - G.casimir_I_rel()
        )

    def rel_split_minus(G):
        # relative angular term entering with a minus sign
        return (
            G.y_sq() * G.pi_sq_rel().scale(HALF) - G.radial_split_rel() + G.casimir_I_rel()
        )

    def rel_split_shift2(G):
        # L2_rel = 2 I_rel + S(S-N+2), the shift of the full-space relation
        return (
            G.y_sq() * G.pi_sq_rel().scale(HALF)
            - G.radial_split_rel()
            - G.casimir_I_rel(shift=2, sign=-1)
        )

    def rel_casimir(G):
        Irel = G.casimir_I_rel()
        return [commutator(G.L_jacobi(a, b), Irel) for a, b in _rel_pairs(G.N)]

    def rel_routes(G):
        return G.L2_rel() - G.L2_rel_from_total()

    def pi2_L2(G):
        return commutator(G.pi_sq(), G.L2())

    return [
        IdentityCase("Dunkl angular momentum algebra", "dunkl-angular-algebra", comMM, 2),
        IdentityCase("[pi^2, L_ij] = 0", "laplacian-angular-commute", pi2_L, 3),
        IdentityCase("[r, L_ij] = 0", "radius-angular-commute", r_L, 1),
        IdentityCase("[H, L_ij] = 0", "angular-momentum-conserved", H_L, 3),
        IdentityCase("[L_ij, I] = 0, [I, H] = 0", "casimir-conserved", casimir, 4),
        IdentityCase(
            "literal variant: [L_ij, (L2 - S(S-N+2))/2] = 0",
            "casimir-conserved",
            casimir_literal,
            4,
            expect_zero=lambda s: s.g == 0 or s.N == 2,
            note="the S-term enters the Casimir with a plus sign",
        ),
        IdentityCase(
            "r^2 pi^2/2 = (E^2 - i(N-2)E)/2 + I with L2 = 2I - S(S-N+2)",
            "radial-angular-split",
            split,
            2,
        ),
        IdentityCase(
            "literal variant: split with L2 = 2I + S(S-N+2)",
            "radial-angular-split",
            split_literal,
            2,
            expect_zero=_expect_g0,
        ),
        IdentityCase("[L_ij, x_l] = i x_j S_il - i x_i S_jl", "angular-coordinate-commutator", comLx, 1),
        IdentityCase("[L_ij, x0] = -i (x_i - x_j)/sqrt N", "angular-centre-commutator", comLx0, 1),
        IdentityCase(
            "literal variant: [L_ij, x0] = -i (x_i - x_j)",
            "angular-centre-commutator",
            comLx0_literal,
            1,
            expect_zero=False,
        ),
        IdentityCase("Jacobi axes: [pi~_a, y_b] = -i S~_ab (scaled)", "jacobi-heisenberg", com_tilde, 1),
        IdentityCase("Jacobi axes: S~_a0 = N delta_a0 (scaled)", "jacobi-centre-decoupling", S_i0, 1),
        IdentityCase("Jacobi axes: relative angular algebra", "jacobi-angular-algebra", comMM_tilde, 2),
        IdentityCase("Jacobi axes: [L~_ij, L~_0l]", "jacobi-angular-mixed", comMM_0i, 2),
        IdentityCase("Jacobi axes: [L~_0j, L~_0l] = i N L~_jl (scaled)", "jacobi-angular-centre", comMM_00, 2),
        IdentityCase(
            "y^2 (pi^2 - p0^2)/2 = (E_y^2 - i(N-3)E_y)/2 + I_rel, L2_rel = 2 I_rel - S(S-N+3)",
            "relative-radial-angular-split",
            rel_split,
            2,
        ),
        IdentityCase(
            "literal variant: relative split with -I_rel",
            "relative-radial-angular-split",
            rel_split_minus,
            2,
            expect_zero=lambda s: s.N == 2 and s.g == 0,
        ),
        IdentityCase(
            "literal variant: relative split with L2_rel = 2 I_rel + S(S-N+2)",
            "relative-radial-angular-split",
            rel_split_shift2,
            2,
            expect_zero=_expect_g0,
        ),
        IdentityCase("[L~_ij, I_rel] = 0", "relative-casimir", rel_casimir, 4),
        IdentityCase("L2_rel: Jacobi sum equals L2 minus centre part", "relative-angular-square", rel_routes, 2),
        IdentityCase("[pi^2, L2] = 0", "laplacian-casimir-commute", pi2_L2, 4),
        IdentityCase(
            "control: [L_ij, x_l] with flipped right side",
            "angular-coordinate-commutator",
            comLx_fault,
            1,
            control=True,
        ),
    ]


# ----------------------------------------------------------------------------------
# Coulomb conservation


def _coulomb_cases() -> list[IdentityCase]:
    def constAi(G):
        return [commutator(G.H_coulomb(), G.A(i)) for i in range(G.N)]

    def constAi_fault(G):
        return [commutator(G.H_coulomb(), G.A(i, gamma_sign=-1)) for i in range(G.N)]

    def AHpr1(G, sign=1):
        # verified: [sum_j {L_ij, pi_j}, gamma/r] = +i gamma/r^3 sum_j {L_ij, x_j}
        F = G.F
        gam = G.spec.gamma
        ir = F.inv_radical("r")
        ir3 = ir * ir * ir
        out = []
        for i in range(G.N):
            lhs = commutator(G.half_anti_L_pi(i).scale(2), G.inv_r().scale(gam))
            mid = operator_sum(
                [anticommutator(G.L(i, j), G.x(j)) for j in range(G.N) if j != i], G.F
            )
            mid = G.mult(ir3 * (-I * gam)) * mid
            lhs = lhs.scale(-sign)
            rhs = anticommutator(G.mult(ir * (I * gam)), G.pi(i)) - operator_sum(
                [anticommutator(G.mult(F.x(i) * F.x(j) * ir3 * gam), G.pi(j)) for j in range(G.N)],
                G.F,
            ).scale(I)
            out += [lhs - mid, mid - rhs]
        return out

    def AHpr2(G):
        F = G.F
        ir = F.inv_radical("r")
        ir3 = ir * ir * ir
        out = []
        for i in range(G.N):
            lhs = commutator(G.pi_sq(), G.mult(F.x(i) * ir))
            rhs = operator_sum(
                [
                    anticommutator(G.mult(F.x(i) * F.x(j) * ir3) - G.S_ij(i, j) * G.inv_r(), G.pi(j))
                    for j in range(G.N)
                ],
                G.F,
            ).scale(I)
            out.append(lhs - rhs)
        return out

    def final(G):
        gam = G.spec.gamma
        H = G.H_coulomb()
        out = []
        for i in range(G.N):
            lhs = commutator(
                G.half_anti_L_pi(i) - G.mult(G.F.x(i) * G.F.inv_radical("r") * gam), H
            )
            mid = operator_sum(
                [
                    anticommutator(
                        G.S_ij(i, j) * G.inv_r().scale(gam * HALF), G.pi(i) - G.pi(j)
                    )
                    for j in range(G.N)
                ],
                G.F,
            ).scale(I)
            rhs = commutator(commutator(G.S(), G.pi(i)), H).scale(I * HALF)
            out += [lhs - mid, mid - rhs]
        return out

    def comA_L(G):
        out = []
        for i in range(G.N):
            for k, l in _pairs(G.N):
                rhs = (G.A(k) * G.S_ij(l, i) - G.A(l) * G.S_ij(k, i)).scale(I)
                out.append(commutator(G.A(i), G.L(k, l)) - rhs)
        return out

    def comA_A(G):
        return [
            commutator(G.A(i), G.A(j)) + (G.H_coulomb() * G.L(i, j)).scale(2 * I)
            for i, j in _pairs(G.N)
        ]

    def A_forms(G):
        return [G.A(i) - G.A_vec(i) for i in range(G.N)]

    def A1_forms(G):
        wN = G.F.w() * Fraction(1, G.N)
        return [
            G.A1_scaled() - G.A1_scaled_vec(),
            G.A_k(1).scale(wN) - G.A1_scaled(),
        ]

    def L2k_cons(k):
        return lambda G: commutator(G.H_coulomb(), G.L2k(k))

    def Ak_cons(k):
        return lambda G: commutator(G.H_coulomb(), G.A_k(k))

    return [
        IdentityCase("[H, A_i] = 0", "runge-lenz-conserved", constAi, 4),
        IdentityCase("lemma: [gamma/r, sum {L_ij, pi_j}]", "runge-lenz-lemma-potential", AHpr1, 2),
        IdentityCase(
            "literal variant: [sum {L_ij, pi_j}, gamma/r] = -i gamma/r^3 sum {L_ij, x_j}",
            "runge-lenz-lemma-potential",
            lambda G: AHpr1(G, sign=-1)[0::2],
            2,
            expect_zero=False,
            note="the first equality holds with the commutator reversed",
        ),
        IdentityCase("lemma: [pi^2, x_i/r]", "runge-lenz-lemma-kinetic", AHpr2, 3),
        IdentityCase("lemma: commutator of the S-free part with H", "runge-lenz-lemma-final", final, 4),
        IdentityCase("[A_i, L_kl] = i A_k S_li - i A_l S_ki", "runge-lenz-angular-algebra", comA_L, 3),
        IdentityCase("[A_i, A_j] = -2i H L_ij", "runge-lenz-closure", comA_A, 4),
        IdentityCase("A_i with S equals A_i without S", "runge-lenz-dual-form", A_forms, 2),
        IdentityCase("(1/sqrt N) A_1 dual forms", "runge-lenz-sum-dual-form", A1_forms, 2),
        IdentityCase("[H, L2] = 0", "symmetric-angular-powers", L2k_cons(1), 4),
        IdentityCase("[H, L4] = 0", "symmetric-angular-powers", L2k_cons(2), 6),
        IdentityCase("[H, A_1 sum] = 0", "symmetric-runge-lenz-powers", Ak_cons(1), 4),
        IdentityCase("[H, sum A_i^2] = 0", "symmetric-runge-lenz-powers", Ak_cons(2), 6),
        IdentityCase(
            "control: Coulomb term of A_i with flipped sign",
            "runge-lenz-conserved",
            constAi_fault,
            4,
            control=True,
        ),
    ]


# ----------------------------------------------------------------------------------
# Stark


def _stark_cases() -> list[IdentityCase]:
    def H_exchange(G):
        return [commutator(G.H_stark(), G.exchange(i, j)) for i, j in _pairs(G.N)]

    def Lperp_H(G):
        return [commutator(G.L_perp(i, j), G.H_stark()) for i, j in _pairs(G.N)]

    def Ljac_H(G):
        return [commutator(G.L_jacobi(a, b), G.H_stark()) for a, b in _rel_pairs(G.N)]

    def comLy(G):
        out = []
        for a, b in _rel_pairs(G.N):
            for l in range(G.N):
                yl = _jac_vec(G, l, G.x)
                ya, yb = _jac_vec(G, a, G.x), _jac_vec(G, b, G.x)
                if l == 0:
                    out.append(commutator(G.L_jacobi(a, b), yl))
                    continue
                rhs = (yb * G.S_jacobi(a, l) - ya * G.S_jacobi(b, l)).scale(I)
                out.append(commutator(G.L_jacobi(a, b), yl) - rhs)
        return out

    def Apar_forms(G):
        return G.A_stark() - G.A_stark_vec()

    def Apar_fault(G):
        return G.A_stark() - G.A_stark_vec(x0_sq_coeff=1)

    def comAH(G):
        return commutator(G.A_stark(), G.H_stark())

    def comAH1(G):
        f = G.spec.f
        rhs = commutator(G.A_k(1), G.x0()).scale(f) + commutator(
            G.pi_sq(), G.r_sq() - G.x0_sq()
        ).scale(G.F_field() * Fraction(1, 4))
        return comAH(G) - rhs

    def comHr(G):
        return commutator(G.pi_sq(), G.r_sq()) + G.euler().scale(4 * I) + G.const(2 * G.N)

    def comHx0(G):
        x0p0 = G.x0() * G.p0()
        return [
            commutator(G.pi_sq(), G.x0_sq()) - commutator(G.p0_sq(), G.x0_sq()),
            commutator(G.p0_sq(), G.x0_sq()) + x0p0.scale(4 * I) + G.const(2),
        ]

    def comAx0(G):
        wN = G.F.w() * Fraction(1, G.N)
        lhs = commutator(G.A_k(1), G.x0()).scale(wN)
        x0p0 = G.x0() * G.p0()
        line1 = (
            G.x0() * commutator(G.pi_sq(), G.x0())
            + x0p0.scale(I)
            + G.euler().scale(I)
            + G.const(Fraction(G.N - 1, 2))
        )
        line2 = (G.euler() - x0p0).scale(I) + G.const(Fraction(G.N - 1, 2))
        return [lhs - line1, line1 - line2]

    def Ljac_A(G):
        return [commutator(G.L_jacobi(a, b), G.A_stark()) for a, b in _rel_pairs(G.N)]

    def Lperp_A(G):
        return [commutator(G.L_perp(i, j), G.A_stark()) for i, j in _pairs(G.N)]

    return [
        IdentityCase("[H_stark, s_ij] = 0", "stark-permutation-invariance", H_exchange, 2),
        IdentityCase("[L_perp_ij, H_stark] = 0", "stark-perpendicular-conserved", Lperp_H, 3),
        IdentityCase("[L~_ij, H_stark] = 0", "stark-relative-conserved", Ljac_H, 3),
        IdentityCase("[L~_ij, y_l] relations, [L~_ij, y_0] = 0", "relative-coordinate-commutator", comLy, 1),
        IdentityCase("Stark invariant dual forms (3 x0^2)", "stark-invariant-dual-form", Apar_forms, 2),
        IdentityCase("[A, H_stark] = 0", "stark-invariant-conserved", comAH, 4),
        IdentityCase("lemma: [A, H_stark] decomposition", "stark-lemma-decomposition", comAH1, 4),
        IdentityCase("lemma: [pi^2, r^2] = -4i r p_r - 2N", "stark-lemma-radius", comHr, 2),
        IdentityCase("lemma: [pi^2, x0^2] = [p0^2, x0^2] = -4i x0 p0 - 2", "stark-lemma-centre", comHx0, 2),
        IdentityCase("lemma: (1/sqrt N)[A_1, x0]", "stark-lemma-runge-lenz-centre", comAx0, 2),
        IdentityCase("[L~_ij, A] = 0", "stark-invariant-relative-commute", Ljac_A, 4),
        IdentityCase("[L_perp_ij, A] = 0", "stark-invariant-perpendicular-commute", Lperp_A, 4),
        IdentityCase(
            "control: Stark invariant with x0^2 coefficient 1",
            "stark-invariant-dual-form",
            Apar_fault,
            2,
            control=True,
        ),
    ]


# ----------------------------------------------------------------------------------
# two centres


def _two_center_cases() -> list[IdentityCase]:
    def H_exchange(G):
        return [commutator(G.H_two(), G.exchange(i, j)) for i, j in _pairs(G.N)]

    def Lperp_H(G):
        return [commutator(G.L_perp(i, j), G.H_two()) for i, j in _pairs(G.N)]

    def Mshift(G):
        return [G.L2_shift(s) - G.L2_shift_closed(s) for s in (1, -1)]

    def Ashift(G):
        return [G.A1_shift(s) - G.A1_shift_closed(s) for s in (1, -1)]

    def shifted_cons(G):
        out = []
        al = G.spec.alpha
        N = G.N
        for s in (1, -1):
            comb = G.L2_shift(s) + G.A1_shift(s).scale(2 * al * s)
            out.append(commutator(G.H_center(1 if s == 1 else 2), comb))
            # closed form of the combination
            gam = G.spec.gamma1 if s == 1 else G.spec.gamma2
            rad = "r1" if s == 1 else "r2"
            centre = G.mult(
                (G.F.sum_x() - G.F.const(N * al * s)) * G.F.inv_radical(rad) * (2 * al * s * gam)
            )
            closed = G.L2() - (G.pi_sq() - G.p0_sq()).scale(N * al**2) - centre
            out.append(comb - closed)
        return out

    def comH_AM(G):
        al = G.spec.alpha
        g1 = G.spec.gamma1
        inner = G.L2() + G.a_sq_p0_sq() - G.mult(G.F.sum_x() * G.F.inv_radical("r1") * (2 * al * g1))
        return commutator(G.H_center(1), inner)

    def comH_1(G):
        al, g1 = G.spec.alpha, G.spec.gamma1
        t = G.mult(G.F.sum_x() * G.F.inv_radical("r1") * (2 * al * g1))
        return commutator(G.pi_sq().scale(HALF), t) + commutator(
            G.inv_r1().scale(g1), G.L2() + G.a_sq_p0_sq()
        )

    def comH_2(G):
        al, g2 = G.spec.alpha, G.spec.gamma2
        t = G.mult(G.F.sum_x() * G.F.inv_radical("r2") * (-2 * al * g2))
        return commutator(G.pi_sq().scale(HALF), t) + commutator(
            G.inv_r2().scale(g2), G.L2() + G.a_sq_p0_sq()
        )

    def pi2_L2(G):
        return commutator(G.pi_sq(), G.L2())

    def final(G):
        return commutator(G.H_two(), G.A_two())

    def final_prime(G):
        return [commutator(G.H_two(), G.A_two_prime()), G.A_two_prime() - G.A_two() - G.S_poly(2)]

    def Lperp_Aprime(G):
        return [commutator(G.L_perp(i, j), G.A_two_prime()) for i, j in _pairs(G.N)]

    def Lperp_A(G):
        return [commutator(G.L_perp(i, j), G.A_two()) for i, j in _pairs(G.N)]

    def coincident_limit(G):
        s = G.spec
        G0 = Generators(s.with_(alpha=Fraction(0), gamma1=s.gamma1, gamma2=s.gamma2))
        Gc = Generators(s.with_(alpha=Fraction(0), gamma=s.gamma1 + s.gamma2))
        return G0.H_two() - Gc.H_coulomb()

    def fault(G):
        return commutator(G.H_two(), G.A_two(gamma2_sign=-1))

    return [
        IdentityCase("[H_two, s_ij] = 0", "two-centre-permutation-invariance", H_exchange, 2),
        IdentityCase("[L_perp_ij, H_two] = 0", "two-centre-perpendicular-conserved", Lperp_H, 3),
        IdentityCase("shifted angular momentum square", "shifted-angular-square", Mshift, 2),
        IdentityCase("shifted Runge-Lenz sum", "shifted-runge-lenz-sum", Ashift, 2),
        IdentityCase(
            "single-centre conservation of L2_shift + 2 alpha A1_shift", "shifted-conservation", shifted_cons, 4
        ),
        IdentityCase("[pi^2/2 - g1/r1, L2 + a^2 p0^2 - 2a g1 x0/r1] = 0", "two-centre-chain-1", comH_AM, 4),
        IdentityCase("chain: first-centre relation", "two-centre-chain-2", comH_1, 4),
        IdentityCase("chain: second-centre relation", "two-centre-chain-3", comH_2, 4),
        IdentityCase("[pi^2, L2] = 0", "laplacian-casimir-commute", pi2_L2, 4),
        IdentityCase("[H_two, A] = 0", "two-centre-invariant-conserved", final, 4),
        IdentityCase("[H_two, A'] = 0, A' = A + S(S-N+2)", "two-centre-casimir-invariant", final_prime, 4),
        IdentityCase("[L_perp_ij, A'] = 0", "two-centre-invariant-perpendicular", Lperp_Aprime, 4),
        IdentityCase(
            "literal variant: [L_perp_ij, A] = 0",
            "two-centre-invariant-perpendicular",
            Lperp_A,
            4,
            expect_zero=lambda s: s.g == 0 or s.N == 2,
            note="L2 contains S, which does not commute with L_perp; A' does",
        ),
        IdentityCase("alpha -> 0 reduces to one centre", "two-centre-coincident-limit", coincident_limit, 2),
        IdentityCase(
            "control: two-centre invariant with flipped gamma2", "two-centre-invariant-conserved", fault, 4, control=True
        ),
    ]


# ----------------------------------------------------------------------------------
# structural


def _structural_cases() -> list[IdentityCase]:
    def reduction(G):
        s = G.spec
        F = G.F
        calogero = operator_sum([G.p(i) * G.p(i) for i in range(G.N)], F).scale(HALF)
        for i, j in _pairs(G.N):
            ip = F.inv_pair(i, j)
            calogero = calogero + G.mult(ip * ip * (s.g * (s.g - 1)))
        calogero = calogero - G.inv_r().scale(s.gamma)
        return G.H_coulomb().restrict_symmetric() - calogero

    def generalized_exchange_form(G):
        s = G.spec
        F = G.F
        out = operator_sum([G.p(i) * G.p(i) for i in range(G.N)], F).scale(HALF)
        for i, j in _pairs(G.N):
            ip = F.inv_pair(i, j)
            out = out + G.mult(ip * ip * s.g) * (G.const(s.g) - G.exchange(i, j))
        return G.H_coulomb() - (out - G.inv_r().scale(s.gamma))

    def stark_minus_coulomb(G):
        return G.H_stark() - G.H_coulomb() - G.sum_x().scale(G.spec.f)

    def stark_field_form(G):
        return G.H_stark() - G.H_coulomb() - G.x0().scale(G.F_field())

    def dual_forms(G):
        return (
            [G.A(i) - G.A_vec(i) for i in range(G.N)]
            + [G.A1_scaled() - G.A1_scaled_vec(), G.A_stark() - G.A_stark_vec()]
        )

    def dual_fault(G):
        core = G.pi_sq() - G.inv_r().scale(G.spec.gamma)
        return [
            G.A(i) - (G.x(i) * core - G._euler_shift(G.N + 1) * G.pi(i)) for i in range(G.N)
        ]

    def g0_L(G):
        return [G.L(i, j) - (G.x(i) * G.p(j) - G.x(j) * G.p(i)) for i, j in _pairs(G.N)]

    def g0_no_exchange(G):
        ops = [G.H_coulomb(), G.H_stark(), G.H_two(), G.S(), G.A_two(), G.A_stark(), G.casimir_I()]
        ops += [G.L(i, j) for i, j in _pairs(G.N)] + [G.A(i) for i in range(G.N)]
        e = tuple(range(G.N))
        return [
            Operator(G.F, {k: c for k, c in op.terms.items() if k[1] != e}) for op in ops
        ]

    def coincident_limit(G):
        s = G.spec
        G0 = Generators(s.with_(alpha=Fraction(0)))
        Gc = Generators(s.with_(alpha=Fraction(0), gamma=s.gamma1 + s.gamma2))
        return G0.H_two() - Gc.H_coulomb()

    return [
        IdentityCase("restrict_symmetric(H_gen) = Calogero-Coulomb H", "symmetric-restriction", reduction, 2),
        IdentityCase("H_gen = p^2/2 + sum g(g - s_ij)/(x_i-x_j)^2 - gamma/r", "exchange-hamiltonian", generalized_exchange_form, 2),
        IdentityCase("H_stark - H = f sum x_i", "stark-term", stark_minus_coulomb, 0),
        IdentityCase("H_stark - H = F x0", "stark-term-centre", stark_field_form, 0),
        IdentityCase("dual forms of the invariants", "dual-forms", dual_forms, 2),
        IdentityCase("g = 0: L_ij = x_i p_j - x_j p_i", "classical-limit", g0_L, 1, applies=_expect_g0),
        IdentityCase("g = 0: no exchange terms survive", "classical-limit", g0_no_exchange, 4, applies=_expect_g0),
        IdentityCase("two-centre H at alpha = 0", "two-centre-coincident-limit", coincident_limit, 2),
        IdentityCase(
            "control: A_i dual form with (N-1) replaced by N", "dual-forms", dual_fault, 2, control=True
        ),
    ]


_SUITE_BUILDERS = {
    "cherednik": _cherednik_cases,
    "angular": _angular_cases,
    "coulomb_conservation": _coulomb_cases,
    "stark": _stark_cases,
    "two_center": _two_center_cases,
    "structural": _structural_cases,
}


def suite_cases(suite: str) -> list[IdentityCase]:
    try:
        return _SUITE_BUILDERS[suite]()
    except KeyError:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}") from None


def suite_g_degree(suite: str) -> int:
    """Largest bound on the degree in ``g`` of the residuals of a suite."""
    return max(c.g_degree for c in suite_cases(suite))


def symbolic_g_grid(degree: int) -> list[Fraction]:
    """``degree + 1`` distinct couplings, starting with the acceptance grid.

    A residual polynomial in ``g`` of degree at most ``degree`` that vanishes
    on all of them vanishes identically.
    """
    extra = [Fraction(3), Fraction(-1), Fraction(5, 2), Fraction(-3, 2), Fraction(7, 3), Fraction(4)]
    grid = list(GRID_G) + extra
    return grid[: degree + 1]


def default_specs(Ns: Iterable[int] = GRID_N, gs: Iterable[Fraction] = GRID_G, **params) -> list[ModelSpec]:
    p = dict(GRID_PARAMS)
    p.update(params)
    return [ModelSpec(N, g=g, **p) for N in Ns for g in gs]


# ----------------------------------------------------------------------------------
# running


def _residuals(res: Residual) -> list[Operator]:
    if isinstance(res, Operator):
        return [res]
    return list(res)


def run_case(
    suite: str,
    case: IdentityCase,
    spec: ModelSpec,
    gens: Generators | None = None,
    term_cap: int = DEFAULT_TERM_CAP,
    n_cap: int = 4,
) -> IdentityReport:
    expect = case.expected(spec)
    base = dict(
        suite=suite,
        label=case.label,
        anchor=case.anchor,
        spec=spec,
        expect="zero" if expect else "nonzero",
        control=case.control,
    )
    if spec.N > n_cap or (case.max_N is not None and spec.N > case.max_N):
        cap = n_cap if spec.N > n_cap else case.max_N
        return IdentityReport(verdict="skipped", ms=0.0, reason=f"N={spec.N} exceeds cap {cap}", **base)
    gens = gens or Generators(spec)
    t0 = time.perf_counter()
    try:
        with term_budget(term_cap):
            parts = _residuals(case.build(gens))
    except TermBlowupError as exc:
        ms = (time.perf_counter() - t0) * 1e3
        return IdentityReport(verdict="skipped", ms=ms, reason=str(exc), **base)
    ms = (time.perf_counter() - t0) * 1e3
    nonzero = [op for op in parts if not op.is_zero()]
    is_zero = not nonzero
    verdict = "pass" if is_zero == expect else "fail"
    report = IdentityReport(verdict=verdict, ms=ms, **base)
    if nonzero:
        report.residual_terms = sum(len(op) for op in nonzero)
        if verdict == "fail":
            report.residual = "\n---\n".join(op.serialize() for op in nonzero[:3])
    return report


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DUNKL_LAB_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(
    suite: str,
    specs: Sequence[ModelSpec],
    inject_fault: bool = False,
    term_cap: int = DEFAULT_TERM_CAP,
    n_cap: int = 4,
    controls_only: bool = False,
) -> list[IdentityReport]:
    """Evaluate every case of ``suite`` on every spec.

    Fault controls run only with ``inject_fault``.  Reports are ordered by
    spec and then by the case order of the suite, independent of threading.
    """
    cases = [
        c
        for c in suite_cases(suite)
        if (not c.control or inject_fault) and (c.control or not controls_only)
    ]
    jobs = []
    for spec in specs:
        todo = [c for c in cases if c.applies(spec)]
        jobs.append((spec, todo))

    def work(job):
        spec, todo = job
        gens = Generators(spec) if spec.N <= n_cap else None
        return [run_case(suite, c, spec, gens, term_cap, n_cap) for c in todo]

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(work, jobs))
    else:
        chunks = [work(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def check_commuting_family(ops: Sequence[Operator]) -> list[list[bool]]:
    """Symmetric matrix of ``[A_i, A_j] == 0`` verdicts."""
    n = len(ops)
    out = [[True] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = commutator(ops[i], ops[j]).is_zero()
            out[i][j] = out[j][i] = v
    return out


def emit_report(reports: Sequence[IdentityReport], suite: str | None = None, timing: bool = True) -> dict:
    """JSON-ready report document."""
    if suite is None:
        suites = sorted({r.suite for r in reports})
        suite = suites[0] if len(suites) == 1 else ",".join(suites)
    return {
        "suite": suite,
        "cases": [r.to_json(timing) for r in reports],
    }


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def any_failure(reports: Iterable[IdentityReport]) -> bool:
    return any(r.verdict == "fail" for r in reports)


def verified_forms() -> dict:
    """Forms of the stated relations that the engine confirms."""
    return {
        "exchange_invariant": "S = sum_{i<j} S_ij = -g sum_{i<j} s_ij (vanishes at g = 0)",
        "angular_casimir": "L2 = 2 I - S(S-N+2); r^2 pi^2/2 = (E^2 - i(N-2)E)/2 + I",
        "relative_casimir": "L2_rel = 2 I_rel - S(S-N+3); "
        "y^2 (pi^2 - p0^2)/2 = (E_y^2 - i(N-3)E_y)/2 + I_rel",
        "relative_hamiltonian": "p_y^2/2 - i(N-2)/(2y) p_y + I_rel/y^2 (plus sign, 1/y in the middle term)",
        "angular_centre_commutator": "[L_ij, x0] = -i (x_i - x_j)/sqrt(N)",
        "runge_lenz_sum": "(1/sqrt N) A_1 = (1/(2 sqrt N)) sum_{i,j} {L_ij, pi_j} - gamma x0/r",
        "anticommutator_potential": "[sum_j {L_ij, pi_j}, gamma/r] = +i gamma/r^3 sum_j {L_ij, x_j} "
        "(commutator order reversed relative to the stated first equality)",
        "stark_invariant": "second form holds with H = H_stark and coefficient 3 x0^2",
        "two_centre_invariant": "[H_two, A] = 0 and [H_two, A'] = 0 with A' = A + S(S-N+2); "
        "only A' commutes with L_perp when g != 0 and N >= 3",
    }
